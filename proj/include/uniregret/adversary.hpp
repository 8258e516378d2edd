#ifndef UNIREGRET_ADVERSARY_HPP
#define UNIREGRET_ADVERSARY_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uniregret/rng.hpp"
#include "uniregret/sequence.hpp"

namespace uniregret {

enum class AdversaryKind {
  SignFlipLag,       ///< x[t] = +-x[t-k]
  SignFlipMonomial,  ///< x[t] = +-(A/M) f_1(history) for a sign-monomial f_1
};

/**
 * Lower-bound sequence law: theta ~ beta(C, C), then a +-A chain that keeps
 * its reference value with probability theta and flips it otherwise.
 */
struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::SignFlipLag;
  int lag_k = 1;
  Monomial monomial;
  double beta_C = 1.0;
  double bound_A = 1.0;
  std::size_t horizon_n = 128;
  std::uint64_t seed = 0;

  static AdversarySpec sign_flip_lag(int k, double beta_C, double bound_A, std::size_t n,
                                     std::uint64_t seed);
  static AdversarySpec sign_flip_monomial(Monomial mono, double beta_C, double bound_A,
                                          std::size_t n, std::uint64_t seed);

  void validate() const;

  /// Number of leading samples fixed at +A.
  int memory() const;

  /// Feature class whose best member is the conditional mean given theta.
  FeatureSpec comparator() const;
};

/// Draw from beta(C, C) as G1 / (G1 + G2) with G_i ~ Gamma(C).
double sample_theta(double beta_C, Rng& rng);

/**
 * Value whose sign the chain keeps or flips at time t: x[t-k] for the lag
 * law, sign(f_1) * A for the monomial law. Zero for t <= memory().
 */
double reference_value(const AdversarySpec& spec, std::span<const double> history,
                       std::ptrdiff_t t);

/// Sequence of length spec.horizon_n; theta in [0, 1].
SequenceD generate(const AdversarySpec& spec, double theta, Rng& rng);

/**
 * Posterior-mean (MMSE) prediction of x[t], t = history.size() + 1, under the
 * beta(C, C) prior: (2 theta_hat - 1) * reference with
 * theta_hat = (stays + C) / (stays + flips + 2C), counting every transition
 * observed in the history. Returns 0 while t <= memory().
 */
double bayes_predict(const AdversarySpec& spec, const SequenceD& history);

/// Lag-k form; bound and values are taken from the history.
double bayes_predict(const SequenceD& history, double beta_C, int k);

/// Incremental form of bayes_predict: O(1) per step.
class BayesPredictor {
public:
  explicit BayesPredictor(AdversarySpec spec);

  /// Prediction for x[history.size() + 1].
  double predict(std::span<const double> history) const;

  /// Account for the newest sample history.back().
  void observe(std::span<const double> history);

  std::size_t stays() const noexcept { return stays_; }
  std::size_t flips() const noexcept { return flips_; }

private:
  AdversarySpec spec_;
  std::size_t stays_ = 0;
  std::size_t flips_ = 0;
};

struct LowerBoundRow {
  std::size_t n = 0;
  double mean_regret = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

struct LowerBoundTable {
  std::vector<LowerBoundRow> rows;
  double fitted_slope_vs_ln_n = 0.0;
  double slope_lower_half = 0.0;
  double slope_upper_half = 0.0;
};

/// Least-squares slope of y against x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

/**
 * Monte-Carlo estimate of L(n): mean over trials of the Bayes predictor's
 * cumulative loss minus the unregularized batch loss of the comparator class
 * on the same sequence. Each trial draws one sequence of length
 * n_grid.back() from derive_seed(spec.seed, trial) and scores its prefixes.
 * Results do not depend on the number of worker threads.
 */
LowerBoundTable estimate_lower_bound(const AdversarySpec& spec, const FeatureSpec& comparator,
                                     std::span<const std::size_t> n_grid, std::size_t trials,
                                     unsigned threads = 1);

LowerBoundTable estimate_lower_bound(const AdversarySpec& spec,
                                     std::span<const std::size_t> n_grid, std::size_t trials,
                                     unsigned threads = 1);

struct TransitionCheck {
  // Conditional on a fixed theta.
  double flip_fraction_mean = 0.0;
  double flip_count_mean = 0.0;
  double flip_count_variance = 0.0;
  double expected_count_mean = 0.0;
  double expected_count_variance = 0.0;
  double chi_square = 0.0;
  int chi_square_dof = 0;
  // Unconditional over theta ~ beta(C, C): x[n] * x[n-1].
  double lag_product_mean = 0.0;
  double lag_product_std_error = 0.0;
};

/**
 * Monte-Carlo check that, given theta, the flip count of a length-n lag-1
 * chain is binomial(n - 1, 1 - theta), and that E[x[n] x[n-1]] = 0 once theta
 * is integrated out.
 */
TransitionCheck transition_posterior_check(std::size_t n, double beta_C, double theta,
                                           std::size_t trials, std::uint64_t seed);

}  // namespace uniregret

#endif  // UNIREGRET_ADVERSARY_HPP
