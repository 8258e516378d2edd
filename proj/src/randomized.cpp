#include "uniregret/randomized.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "uniregret/rng.hpp"

namespace uniregret {

namespace {

struct StepMixture {
  std::vector<double> outputs;
  std::vector<double> probs;
};

std::vector<double> checked_probabilities(const RandomizedPredictor& rp,
                                          std::span<const double> history) {
  auto probs = rp.prob_rule(history, rp.seed);
  if (probs.size() != rp.constituents.size()) {
    throw ShapeError("probability rule returned " + std::to_string(probs.size()) +
                     " entries for " + std::to_string(rp.constituents.size()) + " constituents");
  }
  double sum = 0.0;
  for (const double p : probs) {
    if (!(p >= 0.0)) throw ParameterError("selection probabilities must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw ParameterError("selection probabilities must sum to one");
  }
  return probs;
}

void require_constituents(const RandomizedPredictor& rp) {
  if (rp.constituents.empty()) throw UsageError("randomized predictor has no constituents");
  if (!rp.prob_rule) throw UsageError("randomized predictor has no probability rule");
}

/// Constituent outputs and probabilities at every step, one causal pass.
std::vector<StepMixture> evaluate_steps(const RandomizedPredictor& rp, const SequenceD& seq) {
  require_constituents(rp);
  const auto x = seq.values();
  std::vector<StepMixture> steps(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    const auto history = x.first(t);
    steps[t].probs = checked_probabilities(rp, history);
    steps[t].outputs.reserve(rp.constituents.size());
    for (const auto& c : rp.constituents) steps[t].outputs.push_back(c(history));
  }
  return steps;
}

double mixture_mean(const StepMixture& s) {
  double mean = 0.0;
  for (std::size_t k = 0; k < s.probs.size(); ++k) mean += s.probs[k] * s.outputs[k];
  return mean;
}

}  // namespace

RandomizedRun run_randomized(const RandomizedPredictor& rp, const SequenceD& seq,
                             std::size_t trials) {
  if (trials < 1) throw ParameterError("need at least one trial");
  const auto steps = evaluate_steps(rp, seq);
  const auto x = seq.values();

  RandomizedRun out;
  out.per_step_expected_losses.reserve(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    double expected = 0.0;
    for (std::size_t k = 0; k < steps[t].probs.size(); ++k) {
      const double e = x[t] - steps[t].outputs[k];
      expected += steps[t].probs[k] * e * e;
    }
    out.per_step_expected_losses.push_back(expected);
    out.p_rand_analytic += expected;
  }

  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng(derive_seed(rp.seed, i));
    double total = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      const std::size_t k = rng.categorical(steps[t].probs);
      const double e = x[t] - steps[t].outputs[k];
      total += e * e;
    }
    sum += total;
    sum_sq += total * total;
  }
  const double T = static_cast<double>(trials);
  out.p_rand_mc = sum / T;
  if (trials > 1) {
    const double var = std::max(0.0, (sum_sq - T * out.p_rand_mc * out.p_rand_mc) / (T - 1.0));
    out.mc_std_error = std::sqrt(var / T);
  }
  return out;
}

HistoryPredictor derandomize(RandomizedPredictor rp) {
  require_constituents(rp);
  return [rp = std::move(rp)](std::span<const double> history) {
    const auto probs = checked_probabilities(rp, history);
    double mean = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) mean += probs[k] * rp.constituents[k](history);
    return mean;
  };
}

VarianceDecomposition variance_decomposition(const RandomizedPredictor& rp, const SequenceD& seq) {
  const auto steps = evaluate_steps(rp, seq);
  const auto x = seq.values();
  VarianceDecomposition out;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double mean = mixture_mean(steps[t]);
    double var = 0.0;
    for (std::size_t k = 0; k < steps[t].probs.size(); ++k) {
      const double d = steps[t].outputs[k] - mean;
      var += steps[t].probs[k] * d * d;
    }
    out.bias_sq_total += (x[t] - mean) * (x[t] - mean);
    out.variance_total += var;
  }
  return out;
}

OnlineRunResult<double> run_predictor(const HistoryPredictor& predictor, const SequenceD& seq) {
  if (seq.empty()) throw UsageError("predictor run needs a nonempty sequence");
  const auto x = seq.values();
  OnlineRunResult<double> out;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double p = predictor(x.first(t));
    const double e = x[t] - p;
    out.predictions.push_back(p);
    out.per_step_losses.push_back(e * e);
    out.cumulative_loss += e * e;
  }
  return out;
}

HistoryPredictor make_universal_constituent(const FeatureSpec& spec, double bound, double delta,
                                            bool clip) {
  spec.validate();
  struct Cache {
    PredictorState<double> state;
    std::size_t seen = 0;
    std::vector<double> values;
  };
  auto cache = std::make_shared<Cache>(Cache{init<double>(spec.order_m, delta), 0, {}});
  return [spec, bound, delta, clip, cache](std::span<const double> history) {
    // restart whenever the caller switches to a different sequence
    const bool same_prefix = history.size() >= cache->seen &&
                             std::equal(cache->values.begin(), cache->values.end(), history.begin());
    if (!same_prefix) *cache = Cache{init<double>(spec.order_m, delta), 0, {}};
    while (cache->seen < history.size()) {
      const auto t = static_cast<std::ptrdiff_t>(cache->seen) + 1;
      const Vector<double> f = features(spec, history, t);
      cache->state = update(std::move(cache->state), f, history[cache->seen]);
      cache->values.push_back(history[cache->seen]);
      ++cache->seen;
    }
    const Vector<double> f = features(spec, history, static_cast<std::ptrdiff_t>(history.size()) + 1);
    const double p = predict_universal(cache->state, f);
    return clip ? std::clamp(p, -bound, bound) : p;
  };
}

ProbabilityRule fixed_probabilities(std::vector<double> probs) {
  return [probs = std::move(probs)](std::span<const double>, std::uint64_t) { return probs; };
}

}  // namespace uniregret
