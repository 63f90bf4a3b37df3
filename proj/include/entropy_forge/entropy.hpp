#pragma once

#include <vector>

#include "entropy_forge/distribution.hpp"
#include "entropy_forge/frac.hpp"

namespace ef {

// All entropies are base-2 (bits). Sample entropy of an outcome outside the
// support is +infinity (the 2^-inf = 0 convention); infinities are legal
// returns, never errors.

double sample_entropy(const Distribution& d, const std::string& outcome);

double shannon_entropy(const Distribution& d);
double min_entropy(const Distribution& d);
double max_entropy(const Distribution& d);
Frac collision_probability(const Distribution& d);
double renyi2_entropy(const Distribution& d);

// Pointwise -log2 Pr[X=x | Y=y] on an (X, Y) pair; +inf outside support.
double cond_sample_entropy(const JointDistribution& xy, const std::string& x, const std::string& y);
// H(X | Y) = H(X,Y) - H(Y) on an (X, Y) pair.
double cond_shannon_entropy(const JointDistribution& xy);

Frac statistical_distance(const Distribution& a, const Distribution& b);
double kl_divergence(const Distribution& p, const Distribution& q);

// Sum over i in J of the conditional sample entropy of coordinate i given
// all strictly earlier coordinates. J uses 0-based coordinate indices.
double block_entropy_sum(const JointDistribution& j, const std::vector<int>& J,
                         const std::string& outcome);

}  // namespace ef
