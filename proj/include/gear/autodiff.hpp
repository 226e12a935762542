#pragma once
// Reverse-mode automatic differentiation over small dense matrices.
//
// A Tape records nodes in creation order, which is a topological order of the
// computation graph. backward() sweeps that order in reverse exactly once.
// Leaf gradients (inputs and bound parameters) accumulate across backward
// calls; intermediate gradients are recomputed from zero on every call.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gear/matrix.hpp"

namespace gear {

// A learnable matrix together with its gradient accumulator.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;

    Parameter() = default;
    Parameter(std::string n, Matrix v)
        : name(std::move(n)), value(std::move(v)), grad(Matrix::zeros_like(value)) {}

    void zero_grad() { grad.fill(0.0); }
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;
    Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

    const Matrix& value() const;
    const Matrix& grad() const;
    bool requires_grad() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    double scalar() const { return value()[0]; }

    Tape* tape() const noexcept { return tape_; }
    std::uint32_t id() const noexcept { return id_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    Tape* tape_ = nullptr;
    std::uint32_t id_ = 0;
};

class Tape {
public:
    // Receives the tape and the node's own id; reads the node's gradient and
    // accumulates into its parents via grad_ref().
    using BackwardFn = std::function<void(Tape&, std::uint32_t)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    Var input(Matrix value);
    // Leaf bound to a parameter: its gradient lands in p.grad.
    Var param(Parameter& p);

    Var record(Matrix value, bool requires_grad, BackwardFn backward);

    void backward(Var loss);

    const Matrix& value(std::uint32_t id) const { return nodes_[id].value; }
    const Matrix& grad(std::uint32_t id) const;
    bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
    // Gradient accumulator of a node, allocated on first use.
    Matrix& grad_ref(std::uint32_t id);

    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        Matrix* sink = nullptr; // parameter gradient for bound leaves
        bool requires_grad = false;
        bool leaf = false;
        BackwardFn backward;
    };
    std::vector<Node> nodes_;
};

// Sparse bag entry for bag_project: column index and multiplicity.
struct BagEntry {
    std::size_t column;
    double count;
};

namespace ad {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
// alpha * a + beta * b
Var scale_add(double alpha, Var a, double beta, Var b);
Var concat_rows(Var a, Var b);
Var concat_rows(std::span<const Var> parts);
// Stacks n column vectors of equal length into a (length x n) matrix.
Var stack_columns(std::span<const Var> columns);
Var relu(Var a);
Var tanh(Var a);
Var softmax_vec(Var a);
Var elementwise_max(std::span<const Var> xs);
Var elementwise_mean(std::span<const Var> xs);
Var sum(Var a);
Var pick(Var a, std::size_t row, std::size_t col = 0);
// -log(max(a, floor)) elementwise; gradient is zero where the clamp is active.
Var neg_log_clamped(Var a, double floor);
// W (r x c) times a sparse column vector given as bag entries.
Var bag_project(Var w, std::span<const BagEntry> bag);

} // namespace ad

// Stable softmax on raw values; shared by the autodiff op and by oracles.
std::vector<double> softmax(std::span<const double> logits);

} // namespace gear
