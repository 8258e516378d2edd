#ifndef UNIREGRET_RANDOMIZED_HPP
#define UNIREGRET_RANDOMIZED_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "uniregret/predictor.hpp"
#include "uniregret/sequence.hpp"

namespace uniregret {

/// Sequential predictor: maps x[1..t-1] to a prediction of x[t].
using HistoryPredictor = std::function<double(std::span<const double>)>;

/// Selection probabilities at step t from x[1..t-1] and a fixed seed.
using ProbabilityRule =
    std::function<std::vector<double>(std::span<const double>, std::uint64_t)>;

/// Tolerance on sum(p) = 1 at every step.
inline constexpr double kProbabilitySumTolerance = 1e-12;

/**
 * At each step picks constituent k with probability p_k[t] and outputs its
 * prediction. Constituents see only the shared history, never the realized
 * selections.
 */
struct RandomizedPredictor {
  std::vector<HistoryPredictor> constituents;
  ProbabilityRule prob_rule;
  std::uint64_t seed = 0;
};

struct RandomizedRun {
  double p_rand_mc = 0.0;         ///< Monte-Carlo mean of the accumulated loss
  double mc_std_error = 0.0;
  double p_rand_analytic = 0.0;   ///< sum_t sum_k p_k (x - f_k)^2
  std::vector<double> per_step_expected_losses;
};

/// Accumulated expected loss P_rand(n), by simulation and in closed form.
/// Trial i draws selections from derive_seed(rp.seed, i).
RandomizedRun run_randomized(const RandomizedPredictor& rp, const SequenceD& seq,
                             std::size_t trials);

/// Mixture mean sum_k p_k[t] f_k, a deterministic sequential predictor.
HistoryPredictor derandomize(RandomizedPredictor rp);

struct VarianceDecomposition {
  double bias_sq_total = 0.0;   ///< sum_t (x[t] - E f)^2
  double variance_total = 0.0;  ///< sum_t Var(f)
};

VarianceDecomposition variance_decomposition(const RandomizedPredictor& rp, const SequenceD& seq);

/// Runs a deterministic history predictor over the sequence.
OnlineRunResult<double> run_predictor(const HistoryPredictor& predictor, const SequenceD& seq);

/**
 * Universal predictor as a history closure. It keeps its statistics between
 * calls and catches up incrementally when the history grows; a shorter
 * history restarts it. Not safe to call concurrently.
 */
HistoryPredictor make_universal_constituent(const FeatureSpec& spec, double bound, double delta,
                                            bool clip = false);

/// Constant probability vector, ignoring history and seed.
ProbabilityRule fixed_probabilities(std::vector<double> probs);

}  // namespace uniregret

#endif  // UNIREGRET_RANDOMIZED_HPP
