#ifndef AIF_VERIFY_HPP
#define AIF_VERIFY_HPP

#include <cstdint>
#include <ostream>
#include <random>

#include "aif/genmodel.hpp"
#include "aif/inference.hpp"

namespace aif {

/// Random fully-supported model for oracle checks: Dirichlet(alpha) columns
/// for every A/B table and the prior. Larger alpha keeps likelihood contrasts
/// moderate, the regime where the mean-field factorization is informative.
GenerativeModel random_model(std::mt19937_64& rng, const std::vector<int>& factor_cards,
                             const std::vector<int>& modality_cards,
                             const std::vector<int>& control_cards, int horizon,
                             double alpha = 1.0);

/// Direct trajectory enumeration of the expected free energy: sums the
/// integrand over every (state, observation) sequence under the predictive
/// rollout, using one-step Bayes posteriors against independently recomputed
/// marginals. Independent of the EfeEvaluator path.
double efe_enumeration(const GenerativeModel& gm, const Belief& belief,
                       const Policy& policy);

// Seeded check suites; print one line per check, return overall success.
bool verify_oracle_suite(std::uint64_t seed, std::ostream& out, int n_single = 100,
                         int n_two_factor = 50);
bool verify_efe_suite(std::uint64_t seed, std::ostream& out, int n_toys = 20);
bool verify_srp_suite(std::uint64_t seed, std::ostream& out);

} // namespace aif

#endif
