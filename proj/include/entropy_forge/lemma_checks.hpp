#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "entropy_forge/distribution.hpp"
#include "entropy_forge/rng.hpp"

namespace ef {

/**
 * Numeric verification of the information-theoretic facts this project leans
 * on, each over an explicitly enumerated distribution. Exact checkers never
 * report false failures: every asserted bound is either an identity or a
 * theorem for the exact quantities computed.
 *
 * Tags (D = plain distribution, J = joint):
 *   support-size-identity        D  E[2^H(x)] = |Supp|, plus the Markov tail
 *   high-entropy-tail            D  H <= (1-e)k + e(H0 - log e) given tail e at k
 *   conditioning-drop            J  Pr[H_{X|Y} < Hmin(X) - H0(Y) - t] < 2^-t
 *   smoothing                    D  mass-capping witness: SD <= tail, Hmin >= k
 *   flattening                   D  exact lower tail of t-fold sample-entropy sums
 *   flattening-conditional       J  same for conditional sample-entropy
 *   block-sum-expectation        J  E[sum_J H_{X_i|X_<i}] = sum_J H(X_i|X_<i) <= H0(X_J)
 *   block-sum-tail               J  block-sum analogue of high-entropy-tail
 *   block-sum-support-size       J  E[2^{sum_J H}] <= |Supp(X_J)|
 *   subadditivity                J  E[2^{H(x) - sum_i H_i(x_i)}] <= 1
 *
 * The flattening checkers verify a Chebyshev instance of the statement
 * (deviation sqrt(t Var / eps) at tail eps) so that no unspecified constant
 * is involved; the deviation actually used is recorded in the report.
 */
struct VerificationReport {
    std::string lemma;
    double bound = 0.0;
    double measured = 0.0;
    bool pass = false;
    nlohmann::json params;

    nlohmann::json to_json() const;
};

std::vector<std::string> lemma_tags();
bool lemma_wants_joint(const std::string& tag);

// Exact checks by default. A "budget" entry in params switches the
// support-size-identity and high-entropy-tail checkers to Monte-Carlo
// estimates (lifting the 2^20 support cap); sampled reports carry a 99%
// Hoeffding interval in their params and pass within it.
VerificationReport verify_lemma(const std::string& tag, const Distribution& d,
                                const nlohmann::json& params = nlohmann::json::object());
VerificationReport verify_lemma(const std::string& tag, const JointDistribution& j,
                                const nlohmann::json& params = nlohmann::json::object());

// The built-in corpus the CLI sweeps: named distributions and joints chosen
// to exercise every checker, plus seeded random dyadic tables.
struct LemmaCorpus {
    std::vector<std::pair<std::string, Distribution>> dists;
    std::vector<std::pair<std::string, JointDistribution>> joints;
};
LemmaCorpus builtin_lemma_corpus(uint64_t seed, int random_count = 8);

// Random dyadic distribution: `support` outcomes with positive dyadic
// weights over denominator 2^denom_log2.
Distribution random_dyadic_distribution(SeedStream& rng, size_t support, int denom_log2);

// Sweep every applicable tag over the corpus; returns one report per
// (tag, instance) pair. Instances are independent, so the sweep shards
// across threads; the output order is by task index either way.
std::vector<VerificationReport> verify_all_lemmas(const LemmaCorpus& corpus, int threads = 1);

}  // namespace ef
