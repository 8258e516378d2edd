#include "uniregret/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "uniregret/batch.hpp"

namespace uniregret {

AdversarySpec AdversarySpec::sign_flip_lag(int k, double beta_C, double bound_A, std::size_t n,
                                           std::uint64_t seed) {
  AdversarySpec s;
  s.kind = AdversaryKind::SignFlipLag;
  s.lag_k = k;
  s.beta_C = beta_C;
  s.bound_A = bound_A;
  s.horizon_n = n;
  s.seed = seed;
  s.validate();
  return s;
}

AdversarySpec AdversarySpec::sign_flip_monomial(Monomial mono, double beta_C, double bound_A,
                                                std::size_t n, std::uint64_t seed) {
  AdversarySpec s;
  s.kind = AdversaryKind::SignFlipMonomial;
  s.monomial = std::move(mono);
  s.beta_C = beta_C;
  s.bound_A = bound_A;
  s.horizon_n = n;
  s.seed = seed;
  s.validate();
  return s;
}

void AdversarySpec::validate() const {
  if (!(beta_C > 0.0) || !std::isfinite(beta_C)) throw ParameterError("beta parameter C must be > 0");
  if (!(bound_A > 0.0) || !std::isfinite(bound_A)) throw ParameterError("bound A must be > 0");
  if (kind == AdversaryKind::SignFlipLag) {
    if (lag_k < 1) throw SpecError("adversary lag k must be >= 1");
  } else {
    // Nonnegative integer exponents on +-A inputs always give |f_1| = A^deg = M,
    // so the normalized reference is exactly +-A.
    FeatureSpec::multivariate({monomial});
  }
}

int AdversarySpec::memory() const {
  return kind == AdversaryKind::SignFlipLag ? lag_k : max_lag(monomial);
}

FeatureSpec AdversarySpec::comparator() const {
  return kind == AdversaryKind::SignFlipLag ? FeatureSpec::linear_lag(lag_k, 1)
                                            : FeatureSpec::multivariate({monomial});
}

double sample_theta(double beta_C, Rng& rng) {
  if (!(beta_C > 0.0)) throw ParameterError("beta parameter C must be > 0");
  for (;;) {
    const double a = rng.gamma(beta_C);
    const double b = rng.gamma(beta_C);
    const double theta = a / (a + b);
    if (theta > 0.0 && theta < 1.0) return theta;
  }
}

double reference_value(const AdversarySpec& spec, std::span<const double> history,
                       std::ptrdiff_t t) {
  if (t <= spec.memory()) return 0.0;
  if (t - 1 > static_cast<std::ptrdiff_t>(history.size())) {
    throw RangeError("reference at t=" + std::to_string(t) + " needs more history");
  }
  auto x = [&](std::ptrdiff_t i) { return history[static_cast<std::size_t>(i - 1)]; };
  if (spec.kind == AdversaryKind::SignFlipLag) return x(t - spec.lag_k);
  bool negative = false;
  for (const auto& f : spec.monomial) {
    if (f.exponent % 2 == 1 && x(t - f.lag) < 0.0) negative = !negative;
  }
  return negative ? -spec.bound_A : spec.bound_A;
}

SequenceD generate(const AdversarySpec& spec, double theta, Rng& rng) {
  spec.validate();
  if (!(theta >= 0.0 && theta <= 1.0)) throw ParameterError("theta must lie in [0, 1]");
  std::vector<double> x;
  x.reserve(spec.horizon_n);
  const auto mem = static_cast<std::size_t>(spec.memory());
  for (std::size_t t = 1; t <= spec.horizon_n; ++t) {
    if (t <= mem) {
      x.push_back(spec.bound_A);
      continue;
    }
    const double ref = reference_value(spec, x, static_cast<std::ptrdiff_t>(t));
    x.push_back(rng.uniform() < theta ? ref : -ref);
  }
  return SequenceD(std::move(x), spec.bound_A);
}

namespace {

void require_sign_values(const SequenceD& history, double bound) {
  for (const double v : history.values()) {
    if (v != bound && v != -bound) throw ParameterError("adversary history must take values in {+A, -A}");
  }
}

double posterior_prediction(std::size_t stays, std::size_t flips, double beta_C, double ref) {
  const double theta_hat = (static_cast<double>(stays) + beta_C) /
                           (static_cast<double>(stays + flips) + 2.0 * beta_C);
  return (2.0 * theta_hat - 1.0) * ref;
}

}  // namespace

double bayes_predict(const AdversarySpec& spec, const SequenceD& history) {
  spec.validate();
  require_sign_values(history, spec.bound_A);
  const auto values = history.values();
  const auto t = static_cast<std::ptrdiff_t>(values.size()) + 1;
  if (t <= spec.memory()) return 0.0;
  std::size_t stays = 0, flips = 0;
  for (std::ptrdiff_t s = spec.memory() + 1; s < t; ++s) {
    const double ref = reference_value(spec, values, s);
    (values[static_cast<std::size_t>(s - 1)] == ref ? stays : flips) += 1;
  }
  return posterior_prediction(stays, flips, spec.beta_C, reference_value(spec, values, t));
}

double bayes_predict(const SequenceD& history, double beta_C, int k) {
  AdversarySpec spec = AdversarySpec::sign_flip_lag(k, beta_C, history.bound(), history.size(), 0);
  return bayes_predict(spec, history);
}

BayesPredictor::BayesPredictor(AdversarySpec spec) : spec_(std::move(spec)) { spec_.validate(); }

double BayesPredictor::predict(std::span<const double> history) const {
  const auto t = static_cast<std::ptrdiff_t>(history.size()) + 1;
  if (t <= spec_.memory()) return 0.0;
  return posterior_prediction(stays_, flips_, spec_.beta_C, reference_value(spec_, history, t));
}

void BayesPredictor::observe(std::span<const double> history) {
  const auto t = static_cast<std::ptrdiff_t>(history.size());
  if (t <= spec_.memory()) return;
  const double ref = reference_value(spec_, history.first(history.size() - 1), t);
  (history.back() == ref ? stays_ : flips_) += 1;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("slope fit needs equally long inputs");
  if (x.size() < 2) return 0.0;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

namespace {

/// Regret of one trial at every grid point.
std::vector<double> trial_regrets(const AdversarySpec& spec, const FeatureSpec& comparator,
                                  std::span<const std::size_t> n_grid, std::size_t trial) {
  Rng rng(derive_seed(spec.seed, trial));
  const double theta = sample_theta(spec.beta_C, rng);
  AdversarySpec full = spec;
  full.horizon_n = n_grid.back();
  const SequenceD seq = generate(full, theta, rng);
  const auto x = seq.values();

  BayesPredictor bayes(full);
  std::vector<double> out;
  out.reserve(n_grid.size());
  double cumulative = 0.0;
  std::size_t next = 0;
  for (std::size_t t = 1; t <= x.size() && next < n_grid.size(); ++t) {
    const double p = bayes.predict(x.first(t - 1));
    const double e = x[t - 1] - p;
    cumulative += e * e;
    bayes.observe(x.first(t));
    if (t == n_grid[next]) {
      const auto batch = batch_solve(comparator, seq.prefix(t), 0.0);
      out.push_back(cumulative - batch.loss);
      ++next;
    }
  }
  return out;
}

}  // namespace

LowerBoundTable estimate_lower_bound(const AdversarySpec& spec, const FeatureSpec& comparator,
                                     std::span<const std::size_t> n_grid, std::size_t trials,
                                     unsigned threads) {
  spec.validate();
  comparator.validate();
  if (n_grid.empty()) throw ParameterError("n grid is empty");
  if (trials < 1) throw ParameterError("need at least one trial");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
      throw ParameterError("n grid must be positive and strictly increasing");
    }
  }

  std::vector<std::vector<double>> per_trial(trials);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
  if (workers == 1) {
    for (std::size_t i = 0; i < trials; ++i) per_trial[i] = trial_regrets(spec, comparator, n_grid, i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < trials; i += workers) {
          per_trial[i] = trial_regrets(spec, comparator, n_grid, i);
        }
      });
    }
  }

  // Reduce in trial order so the table is independent of the worker count.
  LowerBoundTable table;
  std::vector<double> log_n, means;
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    double sum = 0.0;
    for (const auto& r : per_trial) sum += r[j];
    const double mean = sum / static_cast<double>(trials);
    double ss = 0.0;
    for (const auto& r : per_trial) ss += (r[j] - mean) * (r[j] - mean);
    const double se = trials > 1 ? std::sqrt(ss / static_cast<double>(trials - 1) /
                                             static_cast<double>(trials))
                                 : 0.0;
    table.rows.push_back({n_grid[j], mean, se, trials});
    log_n.push_back(std::log(static_cast<double>(n_grid[j])));
    means.push_back(mean);
  }
  table.fitted_slope_vs_ln_n = least_squares_slope(log_n, means);
  const std::size_t half = (n_grid.size() + 1) / 2;
  const std::size_t upper_start = n_grid.size() - half;
  table.slope_lower_half = least_squares_slope(std::span(log_n).first(half), std::span(means).first(half));
  table.slope_upper_half = least_squares_slope(std::span(log_n).subspan(upper_start),
                                               std::span(means).subspan(upper_start));
  return table;
}

LowerBoundTable estimate_lower_bound(const AdversarySpec& spec,
                                     std::span<const std::size_t> n_grid, std::size_t trials,
                                     unsigned threads) {
  return estimate_lower_bound(spec, spec.comparator(), n_grid, trials, threads);
}

namespace {

double binomial_pmf(std::size_t k, std::size_t size, double p) {
  const double kk = static_cast<double>(k), nn = static_cast<double>(size);
  return std::exp(std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) +
                  kk * std::log(p) + (nn - kk) * std::log1p(-p));
}

}  // namespace

TransitionCheck transition_posterior_check(std::size_t n, double beta_C, double theta,
                                           std::size_t trials, std::uint64_t seed) {
  if (n < 2) throw ParameterError("transition check needs n >= 2");
  if (!(theta > 0.0 && theta < 1.0)) throw ParameterError("theta must lie in (0, 1)");
  if (trials < 2) throw ParameterError("transition check needs at least two trials");
  const auto spec = AdversarySpec::sign_flip_lag(1, beta_C, 1.0, n, seed);
  const std::size_t transitions = n - 1;

  std::vector<std::size_t> histogram(transitions + 1, 0);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng(derive_seed(seed, 2 * i));
    const auto seq = generate(spec, theta, rng);
    const auto x = seq.values();
    std::size_t flips = 0;
    for (std::size_t t = 1; t < x.size(); ++t) flips += x[t] != x[t - 1] ? 1 : 0;
    ++histogram[flips];
    sum += static_cast<double>(flips);
    sum_sq += static_cast<double>(flips) * static_cast<double>(flips);
  }
  const double T = static_cast<double>(trials);
  TransitionCheck out;
  out.flip_count_mean = sum / T;
  out.flip_count_variance = (sum_sq - T * out.flip_count_mean * out.flip_count_mean) / (T - 1.0);
  out.flip_fraction_mean = out.flip_count_mean / static_cast<double>(transitions);
  out.expected_count_mean = static_cast<double>(transitions) * (1.0 - theta);
  out.expected_count_variance = static_cast<double>(transitions) * theta * (1.0 - theta);

  // Pool adjacent counts until each bin expects at least five hits.
  double observed = 0.0, expected = 0.0;
  int bins = 0;
  double last_o = 0.0, last_e = 0.0;
  for (std::size_t k = 0; k <= transitions; ++k) {
    observed += static_cast<double>(histogram[k]);
    expected += T * binomial_pmf(k, transitions, 1.0 - theta);
    if (expected >= 5.0) {
      out.chi_square += (observed - expected) * (observed - expected) / expected;
      last_o = observed;
      last_e = expected;
      observed = expected = 0.0;
      ++bins;
    }
  }
  if (expected > 0.0 || observed > 0.0) {
    if (bins == 0) {
      out.chi_square = (observed - expected) * (observed - expected) / expected;
      bins = 1;
    } else {
      // Fold the short tail into the final bin.
      out.chi_square -= (last_o - last_e) * (last_o - last_e) / last_e;
      last_o += observed;
      last_e += expected;
      out.chi_square += (last_o - last_e) * (last_o - last_e) / last_e;
    }
  }
  out.chi_square_dof = std::max(bins - 1, 0);

  double psum = 0.0, psum_sq = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng(derive_seed(seed, 2 * i + 1));
    const double th = sample_theta(beta_C, rng);
    const auto seq = generate(spec, th, rng);
    const auto x = seq.values();
    const double prod = x[n - 1] * x[n - 2];
    psum += prod;
    psum_sq += prod * prod;
  }
  out.lag_product_mean = psum / T;
  const double pvar = (psum_sq - T * out.lag_product_mean * out.lag_product_mean) / (T - 1.0);
  out.lag_product_std_error = std::sqrt(std::max(pvar, 0.0) / T);
  return out;
}

}  // namespace uniregret
