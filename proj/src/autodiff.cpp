#include "gear/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gear/error.hpp"
#include "gear/kernels.hpp"

namespace gear {

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Matrix value) {
    nodes_.push_back(Node{std::move(value), {}, nullptr, false, true, {}});
    return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::input(Matrix value) {
    Matrix g = Matrix::zeros_like(value);
    nodes_.push_back(Node{std::move(value), std::move(g), nullptr, true, true, {}});
    return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::param(Parameter& p) {
    if (!p.grad.same_shape(p.value)) p.grad = Matrix::zeros_like(p.value);
    nodes_.push_back(Node{p.value, {}, &p.grad, true, true, {}});
    return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(Matrix value, bool requires_grad, BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), {}, nullptr, requires_grad, false,
                          requires_grad ? std::move(backward) : BackwardFn{}});
    return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

const Matrix& Tape::grad(std::uint32_t id) const {
    const Node& n = nodes_[id];
    if (n.sink) return *n.sink;
    return n.grad;
}

Matrix& Tape::grad_ref(std::uint32_t id) {
    Node& n = nodes_[id];
    if (n.sink) return *n.sink;
    if (!n.grad.same_shape(n.value)) n.grad = Matrix::zeros_like(n.value);
    return n.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape() != this) throw ContractError("backward: loss belongs to another tape");
    const Matrix& lv = value(loss.id());
    if (lv.rows() != 1 || lv.cols() != 1)
        throw ContractError("backward: loss must be 1x1, got " + lv.shape_string());
    for (Node& n : nodes_)
        if (!n.leaf && n.requires_grad) n.grad = Matrix::zeros_like(n.value);
    if (!nodes_[loss.id()].requires_grad) return;
    grad_ref(loss.id())[0] += 1.0;
    for (std::uint32_t id = loss.id() + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (n.leaf || !n.requires_grad || !n.backward) continue;
        n.backward(*this, id);
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw EmptyAggregationError("softmax of an empty vector");
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return out;
}

namespace ad {
namespace {

Tape& same_tape(Var a, Var b) {
    if (!a.valid() || !b.valid() || a.tape() != b.tape())
        throw ContractError("operands live on different tapes");
    return *a.tape();
}

Tape& tape_of(std::span<const Var> xs) {
    Tape* t = xs.front().tape();
    for (const Var& v : xs)
        if (v.tape() != t) throw ContractError("operands live on different tapes");
    return *t;
}

bool any_grad(std::span<const Var> xs) {
    return std::any_of(xs.begin(), xs.end(), [](const Var& v) { return v.requires_grad(); });
}

} // namespace

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    if (av.cols() != bv.rows())
        throw DimensionError("matmul: " + av.shape_string() + " x " + bv.shape_string());
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    Matrix out(m, n);
    kernels::active().gemm_acc(av.data(), bv.data(), out.data(), m, k, n);
    const std::uint32_t ia = a.id(), ib = b.id();
    return t.record(std::move(out), a.requires_grad() || b.requires_grad(),
                    [ia, ib, m, k, n](Tape& tp, std::uint32_t self) {
                        const auto& kt = kernels::active();
                        const Matrix& g = tp.grad(self);
                        if (tp.requires_grad(ia))
                            kt.gemm_acc_bt(g.data(), tp.value(ib).data(), tp.grad_ref(ia).data(), m,
                                           n, k);
                        if (tp.requires_grad(ib))
                            kt.gemm_acc_at(tp.value(ia).data(), g.data(), tp.grad_ref(ib).data(), m,
                                           k, n);
                    });
}

Var scale_add(double alpha, Var a, double beta, Var b) {
    Tape& t = same_tape(a, b);
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    if (!av.same_shape(bv))
        throw DimensionError("scale_add: " + av.shape_string() + " vs " + bv.shape_string());
    Matrix out(av.rows(), av.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * av[i] + beta * bv[i];
    const std::uint32_t ia = a.id(), ib = b.id();
    return t.record(std::move(out), a.requires_grad() || b.requires_grad(),
                    [ia, ib, alpha, beta](Tape& tp, std::uint32_t self) {
                        const Matrix& g = tp.grad(self);
                        const auto& kt = kernels::active();
                        if (tp.requires_grad(ia)) kt.axpy(alpha, g.data(), tp.grad_ref(ia).data(), g.size());
                        if (tp.requires_grad(ib)) kt.axpy(beta, g.data(), tp.grad_ref(ib).data(), g.size());
                    });
}

Var add(Var a, Var b) { return scale_add(1.0, a, 1.0, b); }
Var sub(Var a, Var b) { return scale_add(1.0, a, -1.0, b); }

Var scale(Var a, double s) {
    Tape& t = *a.tape();
    Matrix out = a.value();
    for (double& v : out.values()) v *= s;
    const std::uint32_t ia = a.id();
    return t.record(std::move(out), a.requires_grad(), [ia, s](Tape& tp, std::uint32_t self) {
        const Matrix& g = tp.grad(self);
        kernels::active().axpy(s, g.data(), tp.grad_ref(ia).data(), g.size());
    });
}

Var concat_rows(Var a, Var b) {
    const Var parts[] = {a, b};
    return concat_rows(parts);
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw EmptyAggregationError("concat_rows: no operands");
    Tape& t = tape_of(parts);
    std::size_t total = 0;
    for (const Var& p : parts) {
        if (p.cols() != 1 && !(p.rows() == 0))
            throw DimensionError("concat_rows: operand is " + p.value().shape_string() +
                                 ", expected a column vector");
        total += p.rows();
    }
    Matrix out(total, 1);
    std::vector<std::pair<std::uint32_t, std::size_t>> spans;
    spans.reserve(parts.size());
    std::size_t off = 0;
    for (const Var& p : parts) {
        std::copy_n(p.value().data(), p.rows(), out.data() + off);
        spans.emplace_back(p.id(), off);
        off += p.rows();
    }
    return t.record(std::move(out), any_grad(parts),
                    [spans = std::move(spans)](Tape& tp, std::uint32_t self) {
                        const Matrix& g = tp.grad(self);
                        for (const auto& [id, o] : spans) {
                            if (!tp.requires_grad(id)) continue;
                            Matrix& pg = tp.grad_ref(id);
                            for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += g[o + i];
                        }
                    });
}

Var stack_columns(std::span<const Var> columns) {
    if (columns.empty()) throw EmptyAggregationError("stack_columns: no operands");
    Tape& t = tape_of(columns);
    const std::size_t rows = columns.front().rows();
    const std::size_t n = columns.size();
    Matrix out(rows, n);
    std::vector<std::uint32_t> ids;
    ids.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Matrix& c = columns[j].value();
        if (c.cols() != 1 || c.rows() != rows)
            throw DimensionError("stack_columns: operand " + std::to_string(j) + " is " +
                                 c.shape_string() + ", expected " + std::to_string(rows) + "x1");
        for (std::size_t i = 0; i < rows; ++i) out(i, j) = c[i];
        ids.push_back(columns[j].id());
    }
    return t.record(std::move(out), any_grad(columns),
                    [ids = std::move(ids), rows](Tape& tp, std::uint32_t self) {
                        const Matrix& g = tp.grad(self);
                        const std::size_t n = ids.size();
                        for (std::size_t j = 0; j < n; ++j) {
                            if (!tp.requires_grad(ids[j])) continue;
                            Matrix& cg = tp.grad_ref(ids[j]);
                            for (std::size_t i = 0; i < rows; ++i) cg[i] += g[i * n + j];
                        }
                    });
}

Var relu(Var a) {
    Tape& t = *a.tape();
    Matrix out = a.value();
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    const std::uint32_t ia = a.id();
    return t.record(std::move(out), a.requires_grad(), [ia](Tape& tp, std::uint32_t self) {
        const Matrix& g = tp.grad(self);
        const Matrix& x = tp.value(ia);
        Matrix& ag = tp.grad_ref(ia);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (x[i] > 0.0) ag[i] += g[i];
    });
}

Var tanh(Var a) {
    Tape& t = *a.tape();
    Matrix out = a.value();
    for (double& v : out.values()) v = std::tanh(v);
    const std::uint32_t ia = a.id();
    return t.record(std::move(out), a.requires_grad(), [ia](Tape& tp, std::uint32_t self) {
        const Matrix& g = tp.grad(self);
        const Matrix& y = tp.value(self);
        Matrix& ag = tp.grad_ref(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ag[i] += g[i] * (1.0 - y[i] * y[i]);
    });
}

Var softmax_vec(Var a) {
    Tape& t = *a.tape();
    const Matrix& x = a.value();
    if (x.cols() != 1) throw DimensionError("softmax_vec: expected a column vector, got " + x.shape_string());
    if (x.rows() == 0) throw EmptyAggregationError("softmax_vec: empty vector");
    const std::vector<double> p = softmax(x.values());
    const std::uint32_t ia = a.id();
    return t.record(Matrix(p.size(), 1, p), a.requires_grad(), [ia](Tape& tp, std::uint32_t self) {
        const Matrix& g = tp.grad(self);
        const Matrix& y = tp.value(self);
        double dotgy = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) dotgy += g[i] * y[i];
        Matrix& ag = tp.grad_ref(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ag[i] += y[i] * (g[i] - dotgy);
    });
}

Var elementwise_max(std::span<const Var> xs) {
    if (xs.empty()) throw EmptyAggregationError("elementwise_max: empty list");
    Tape& t = tape_of(xs);
    const Matrix& first = xs.front().value();
    for (const Var& v : xs)
        if (!v.value().same_shape(first))
            throw DimensionError("elementwise_max: " + v.value().shape_string() + " vs " +
                                 first.shape_string());
    Matrix out = first;
    std::vector<std::uint32_t> argmax(first.size(), 0);
    for (std::uint32_t k = 1; k < xs.size(); ++k) {
        const Matrix& v = xs[k].value();
        for (std::size_t i = 0; i < out.size(); ++i)
            if (v[i] > out[i]) { // strict: ties keep the first index
                out[i] = v[i];
                argmax[i] = k;
            }
    }
    std::vector<std::uint32_t> ids;
    for (const Var& v : xs) ids.push_back(v.id());
    return t.record(std::move(out), any_grad(xs),
                    [ids = std::move(ids), argmax = std::move(argmax)](Tape& tp, std::uint32_t self) {
                        const Matrix& g = tp.grad(self);
                        for (std::size_t i = 0; i < g.size(); ++i) {
                            const std::uint32_t src = ids[argmax[i]];
                            if (tp.requires_grad(src)) tp.grad_ref(src)[i] += g[i];
                        }
                    });
}

Var elementwise_mean(std::span<const Var> xs) {
    if (xs.empty()) throw EmptyAggregationError("elementwise_mean: empty list");
    Tape& t = tape_of(xs);
    const Matrix& first = xs.front().value();
    Matrix out(first.rows(), first.cols());
    for (const Var& v : xs) {
        if (!v.value().same_shape(first))
            throw DimensionError("elementwise_mean: " + v.value().shape_string() + " vs " +
                                 first.shape_string());
        out += v.value();
    }
    const double inv = 1.0 / static_cast<double>(xs.size());
    for (double& v : out.values()) v *= inv;
    std::vector<std::uint32_t> ids;
    for (const Var& v : xs) ids.push_back(v.id());
    return t.record(std::move(out), any_grad(xs),
                    [ids = std::move(ids), inv](Tape& tp, std::uint32_t self) {
                        const Matrix& g = tp.grad(self);
                        for (std::uint32_t id : ids)
                            if (tp.requires_grad(id))
                                kernels::active().axpy(inv, g.data(), tp.grad_ref(id).data(), g.size());
                    });
}

Var sum(Var a) {
    Tape& t = *a.tape();
    double s = 0.0;
    for (double v : a.value().values()) s += v;
    const std::uint32_t ia = a.id();
    return t.record(Matrix(1, 1, s), a.requires_grad(), [ia](Tape& tp, std::uint32_t self) {
        const double g = tp.grad(self)[0];
        for (double& v : tp.grad_ref(ia).values()) v += g;
    });
}

Var pick(Var a, std::size_t row, std::size_t col) {
    Tape& t = *a.tape();
    const Matrix& x = a.value();
    if (row >= x.rows() || col >= x.cols())
        throw DimensionError("pick: (" + std::to_string(row) + "," + std::to_string(col) +
                             ") outside " + x.shape_string());
    const std::size_t idx = row * x.cols() + col;
    const std::uint32_t ia = a.id();
    return t.record(Matrix(1, 1, x[idx]), a.requires_grad(), [ia, idx](Tape& tp, std::uint32_t self) {
        tp.grad_ref(ia)[idx] += tp.grad(self)[0];
    });
}

Var neg_log_clamped(Var a, double floor) {
    Tape& t = *a.tape();
    Matrix out = a.value();
    for (double& v : out.values()) v = -std::log(std::max(v, floor));
    const std::uint32_t ia = a.id();
    return t.record(std::move(out), a.requires_grad(), [ia, floor](Tape& tp, std::uint32_t self) {
        const Matrix& g = tp.grad(self);
        const Matrix& x = tp.value(ia);
        Matrix& ag = tp.grad_ref(ia);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (x[i] > floor) ag[i] -= g[i] / x[i];
    });
}

Var bag_project(Var w, std::span<const BagEntry> bag) {
    Tape& t = *w.tape();
    const Matrix& wv = w.value();
    const std::size_t r = wv.rows(), c = wv.cols();
    Matrix out(r, 1);
    for (const BagEntry& e : bag) {
        if (e.column >= c)
            throw DimensionError("bag_project: column " + std::to_string(e.column) +
                                 " outside " + wv.shape_string());
        for (std::size_t i = 0; i < r; ++i) out[i] += e.count * wv(i, e.column);
    }
    const std::uint32_t iw = w.id();
    return t.record(std::move(out), w.requires_grad(),
                    [iw, entries = std::vector<BagEntry>(bag.begin(), bag.end())](Tape& tp,
                                                                                   std::uint32_t self) {
                        const Matrix& g = tp.grad(self);
                        Matrix& wg = tp.grad_ref(iw);
                        const std::size_t cols = wg.cols();
                        for (const BagEntry& e : entries)
                            for (std::size_t i = 0; i < g.size(); ++i)
                                wg[i * cols + e.column] += e.count * g[i];
                    });
}

} // namespace ad
} // namespace gear
