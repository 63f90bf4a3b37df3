#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "entropy_forge/errors.hpp"

namespace ef {

/**
 * Exact finite probability table. Outcomes are opaque byte strings; weights
 * are dyadic, stored as counts over a common denominator 2^denom_log2. Every
 * distribution in this project arises from uniform seed bits, so dyadic
 * weights are exact by construction. Only the support is stored (weights are
 * strictly positive).
 */
class Distribution {
public:
    Distribution() = default;
    Distribution(std::vector<std::string> outcomes, std::vector<uint64_t> weight_num,
                 int denom_log2);

    // Build from (outcome, count) pairs; the total count must be a power of
    // two. Duplicate outcomes are merged.
    static Distribution from_counts(const std::vector<std::pair<std::string, uint64_t>>& counts);

    // Uniform over distinct outcomes; count must be a power of two.
    static Distribution uniform(std::vector<std::string> outcomes);

    static Distribution point(std::string outcome) { return uniform({std::move(outcome)}); }

    size_t support_size() const { return outcomes_.size(); }
    int denom_log2() const { return denom_log2_; }
    const std::vector<std::string>& outcomes() const { return outcomes_; }
    const std::vector<uint64_t>& weight_num() const { return weights_; }

    // Numerator of Pr[outcome], 0 if outside support.
    uint64_t weight_of(const std::string& outcome) const;
    bool contains(const std::string& outcome) const { return weight_of(outcome) != 0; }

    void validate() const;

private:
    std::vector<std::string> outcomes_;
    std::vector<uint64_t> weights_;
    int denom_log2_ = 0;
    std::unordered_map<std::string, size_t> index_;

    void rebuild_index();
};

/**
 * A distribution over fixed-arity tuples. The tuple is flattened into one
 * byte string using a per-coordinate byte-length schema, which keeps the
 * encoding injective and makes prefix grouping cheap.
 */
class JointDistribution {
public:
    JointDistribution() = default;
    JointDistribution(Distribution dist, std::vector<int> coord_bytes);

    int arity() const { return (int)coord_bytes_.size(); }
    const Distribution& dist() const { return dist_; }
    const std::vector<int>& schema() const { return coord_bytes_; }

    static std::string pack(const std::vector<std::string>& tuple, const std::vector<int>& schema);
    std::string coord(const std::string& outcome, int i) const;        // i in [0, arity)
    std::string prefix(const std::string& outcome, int upto) const;    // first `upto` coords

    // Marginal over a coordinate subset (ascending order).
    JointDistribution marginal(const std::vector<int>& coords) const;

    // 2-coordinate helper: pair (x, y) with x = coord 0, y = coord 1.
    static JointDistribution pair(const Distribution& joint_over_pairs, int x_bytes, int y_bytes);

private:
    Distribution dist_;
    std::vector<int> coord_bytes_;
    std::vector<int> offsets_;  // byte offset of each coordinate
};

}  // namespace ef
