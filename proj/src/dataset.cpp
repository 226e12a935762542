#include "gear/dataset.hpp"

#include <set>

#include "gear/error.hpp"

namespace gear {

void DatasetSplit::validate() const {
    std::set<std::string> seen;
    for (const LabeledExample& ex : examples) {
        if (!seen.insert(ex.id).second)
            throw ValidationError(name + ": duplicate example id '" + ex.id + "'");
        if (ex.label == Label::Nei && !ex.gold_groups.empty())
            throw ValidationError(name + ": NEI example '" + ex.id + "' has gold evidence");
        for (const EvidenceGroup& g : ex.gold_groups) {
            if (g.sentences.empty())
                throw ValidationError(name + ": example '" + ex.id + "' has an empty evidence group");
            if (g.texts.size() != g.sentences.size() || g.resolved.size() != g.sentences.size())
                throw ValidationError(name + ": example '" + ex.id + "' has ragged group fields");
        }
        if (ex.retrieved.size() > 5)
            throw ValidationError(name + ": example '" + ex.id + "' has more than 5 retrieved sentences");
    }
}

} // namespace gear
