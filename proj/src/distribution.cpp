#include "entropy_forge/distribution.hpp"

#include <algorithm>
#include <map>

namespace ef {

Distribution::Distribution(std::vector<std::string> outcomes, std::vector<uint64_t> weight_num,
                           int denom_log2)
    : outcomes_(std::move(outcomes)), weights_(std::move(weight_num)), denom_log2_(denom_log2) {
    rebuild_index();
    validate();
}

void Distribution::rebuild_index() {
    index_.clear();
    index_.reserve(outcomes_.size());
    for (size_t i = 0; i < outcomes_.size(); ++i) {
        auto [it, inserted] = index_.emplace(outcomes_[i], i);
        if (!inserted) throw ParamError("Distribution: duplicate outcome");
    }
}

void Distribution::validate() const {
    if (outcomes_.size() != weights_.size()) throw ParamError("Distribution: ragged table");
    if (denom_log2_ < 0 || denom_log2_ > 63) throw ParamError("Distribution: bad denominator");
    unsigned __int128 total = 0;
    for (uint64_t w : weights_) {
        if (w == 0) throw ParamError("Distribution: zero weight in support");
        total += w;
    }
    if (total != (unsigned __int128)1 << denom_log2_)
        throw ParamError("Distribution: weights do not sum to 1");
}

Distribution Distribution::from_counts(
    const std::vector<std::pair<std::string, uint64_t>>& counts) {
    std::map<std::string, uint64_t> merged;
    unsigned __int128 total = 0;
    for (const auto& [o, c] : counts) {
        if (c == 0) continue;
        merged[o] += c;
        total += c;
    }
    if (total == 0) throw ParamError("Distribution::from_counts: empty");
    if ((total & (total - 1)) != 0)
        throw ParamError("Distribution::from_counts: total count is not a power of two");
    int L = 0;
    while (((unsigned __int128)1 << L) < total) ++L;
    std::vector<std::string> outcomes;
    std::vector<uint64_t> weights;
    outcomes.reserve(merged.size());
    for (auto& [o, c] : merged) {
        outcomes.push_back(o);
        weights.push_back(c);
    }
    return Distribution(std::move(outcomes), std::move(weights), L);
}

Distribution Distribution::uniform(std::vector<std::string> outcomes) {
    std::vector<std::pair<std::string, uint64_t>> counts;
    counts.reserve(outcomes.size());
    for (auto& o : outcomes) counts.emplace_back(std::move(o), 1);
    return from_counts(counts);
}

uint64_t Distribution::weight_of(const std::string& outcome) const {
    auto it = index_.find(outcome);
    return it == index_.end() ? 0 : weights_[it->second];
}

JointDistribution::JointDistribution(Distribution dist, std::vector<int> coord_bytes)
    : dist_(std::move(dist)), coord_bytes_(std::move(coord_bytes)) {
    offsets_.resize(coord_bytes_.size());
    int off = 0;
    for (size_t i = 0; i < coord_bytes_.size(); ++i) {
        if (coord_bytes_[i] < 0) throw ParamError("JointDistribution: negative coordinate width");
        offsets_[i] = off;
        off += coord_bytes_[i];
    }
    for (const std::string& o : dist_.outcomes())
        if ((int)o.size() != off) throw ParamError("JointDistribution: outcome does not match schema");
}

std::string JointDistribution::pack(const std::vector<std::string>& tuple,
                                    const std::vector<int>& schema) {
    if (tuple.size() != schema.size()) throw ParamError("JointDistribution::pack: arity mismatch");
    std::string out;
    for (size_t i = 0; i < tuple.size(); ++i) {
        if ((int)tuple[i].size() != schema[i])
            throw ParamError("JointDistribution::pack: coordinate width mismatch");
        out += tuple[i];
    }
    return out;
}

std::string JointDistribution::coord(const std::string& outcome, int i) const {
    if (i < 0 || i >= arity()) throw ParamError("JointDistribution::coord: index out of range");
    return outcome.substr(offsets_[i], coord_bytes_[i]);
}

std::string JointDistribution::prefix(const std::string& outcome, int upto) const {
    if (upto < 0 || upto > arity()) throw ParamError("JointDistribution::prefix: index out of range");
    return outcome.substr(0, upto == 0 ? 0 : offsets_[upto - 1] + coord_bytes_[upto - 1]);
}

JointDistribution JointDistribution::marginal(const std::vector<int>& coords) const {
    std::vector<int> schema;
    for (int c : coords) {
        if (c < 0 || c >= arity()) throw ParamError("JointDistribution::marginal: index out of range");
        schema.push_back(coord_bytes_[c]);
    }
    std::map<std::string, uint64_t> acc;
    const auto& outs = dist_.outcomes();
    const auto& ws = dist_.weight_num();
    for (size_t k = 0; k < outs.size(); ++k) {
        std::string key;
        for (int c : coords) key += coord(outs[k], c);
        acc[key] += ws[k];
    }
    std::vector<std::string> outcomes;
    std::vector<uint64_t> weights;
    for (auto& [o, w] : acc) {
        outcomes.push_back(o);
        weights.push_back(w);
    }
    return JointDistribution(Distribution(std::move(outcomes), std::move(weights), dist_.denom_log2()),
                             std::move(schema));
}

JointDistribution JointDistribution::pair(const Distribution& joint, int x_bytes, int y_bytes) {
    return JointDistribution(joint, {x_bytes, y_bytes});
}

}  // namespace ef
