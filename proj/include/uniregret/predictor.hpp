#ifndef UNIREGRET_PREDICTOR_HPP
#define UNIREGRET_PREDICTOR_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <type_traits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "uniregret/sequence.hpp"

namespace uniregret {

/// Refresh period of the rank-1 maintained inverse from a dense factorization.
inline constexpr std::size_t kInverseRefreshPeriod = 512;

/**
 * Sufficient statistics of the online regularized least-squares predictor.
 *
 * gram = sum f f^T and cross = sum x f over the updates seen so far;
 * inverse tracks (gram + delta I)^{-1} through Sherman-Morrison updates.
 */
template <typename Scalar>
struct PredictorState {
  Matrix<Scalar> gram;
  Vector<Scalar> cross;
  Scalar delta;
  std::size_t steps = 0;
  Matrix<Scalar> inverse;

  Eigen::Index dimension() const noexcept { return cross.size(); }
};

template <typename Scalar>
PredictorState<Scalar> init(int m, Scalar delta) {
  if (m < 1) throw ParameterError("predictor dimension must be >= 1");
  if (!(delta > Scalar(0))) throw ParameterError("regularizer delta must be > 0");
  PredictorState<Scalar> s{Matrix<Scalar>::Zero(m, m), Vector<Scalar>::Zero(m), delta, 0,
                           Matrix<Scalar>::Identity(m, m) / delta};
  return s;
}

namespace detail {

template <typename Scalar, typename Derived>
void check_dimension(const PredictorState<Scalar>& state, const Eigen::MatrixBase<Derived>& f) {
  if (f.size() != state.dimension()) {
    throw ShapeError("feature dimension " + std::to_string(f.size()) +
                     " does not match predictor dimension " +
                     std::to_string(state.dimension()));
  }
}

}  // namespace detail

/// Ridge prediction cross^T (gram + delta I)^{-1} f from the current statistics.
template <typename Scalar, typename Derived>
Scalar predict(const PredictorState<Scalar>& state, const Eigen::MatrixBase<Derived>& f) {
  detail::check_dimension(state, f);
  return state.cross.dot(state.inverse * f);
}

/**
 * Universal prediction: the current feature vector enters the Gram matrix
 * before solving, cross^T (gram + f f^T + delta I)^{-1} f. This is the form
 * whose cumulative loss obeys the log-determinant regret bound for every
 * bounded sequence.
 */
template <typename Scalar, typename Derived>
Scalar predict_universal(const PredictorState<Scalar>& state,
                         const Eigen::MatrixBase<Derived>& f) {
  detail::check_dimension(state, f);
  const Vector<Scalar> pf = state.inverse * f;
  return state.cross.dot(pf) / (Scalar(1) + f.dot(pf));
}

/// Recompute the inverse from a dense Cholesky factorization.
template <typename Scalar>
void refresh_inverse(PredictorState<Scalar>& state) {
  const auto m = state.dimension();
  Matrix<Scalar> regularized = state.gram;
  regularized.diagonal().array() += state.delta;
  Eigen::LLT<Matrix<Scalar>> llt(regularized);
  if (llt.info() != Eigen::Success) throw NumericError("regularized Gram matrix lost definiteness");
  state.inverse = llt.solve(Matrix<Scalar>::Identity(m, m));
}

template <typename Scalar, typename Derived>
PredictorState<Scalar> update(PredictorState<Scalar> state, const Eigen::MatrixBase<Derived>& f,
                              std::type_identity_t<Scalar> x) {
  detail::check_dimension(state, f);
  const Vector<Scalar> pf = state.inverse * f;
  const Scalar denom = Scalar(1) + f.dot(pf);
  if (!(denom > Scalar(0))) throw NumericError("rank-1 update denominator is not positive");
  state.inverse.noalias() -= (pf * pf.transpose()) / denom;
  state.gram.noalias() += f * f.transpose();
  state.cross += x * f;
  ++state.steps;
  if (state.steps % kInverseRefreshPeriod == 0) refresh_inverse(state);
  return state;
}

/// Dense solve of (gram + delta I) a = cross.
template <typename Scalar>
Vector<Scalar> direct_weights(const PredictorState<Scalar>& state) {
  Matrix<Scalar> regularized = state.gram;
  regularized.diagonal().array() += state.delta;
  return regularized.llt().solve(state.cross);
}

template <typename Scalar>
struct OnlineRunResult {
  std::vector<Scalar> predictions;
  std::vector<Scalar> per_step_losses;
  Scalar cumulative_loss = Scalar(0);
};

enum class Variant {
  Universal,  ///< predict_universal before each update
  Ridge,      ///< predict before each update (plain online ridge / RLS)
};

template <typename Scalar>
struct OnlineOptions {
  Scalar delta = Scalar(1);
  bool clip = false;
  Variant variant = Variant::Universal;
};

namespace detail {

template <typename Scalar>
void record(OnlineRunResult<Scalar>& out, Scalar prediction, Scalar target) {
  const Scalar e = target - prediction;
  out.predictions.push_back(prediction);
  out.per_step_losses.push_back(e * e);
  out.cumulative_loss += e * e;
}

template <typename Scalar>
void require_nonempty(const BoundedSequence<Scalar>& seq) {
  if (seq.empty()) throw UsageError("online run needs a nonempty sequence");
}

}  // namespace detail

template <typename Scalar>
OnlineRunResult<Scalar> run_online(const FeatureSpec& spec, const BoundedSequence<Scalar>& seq,
                                   const OnlineOptions<Scalar>& options) {
  detail::require_nonempty(seq);
  auto state = init<Scalar>(spec.order_m, options.delta);
  OnlineRunResult<Scalar> out;
  out.predictions.reserve(seq.size());
  out.per_step_losses.reserve(seq.size());
  const Scalar bound = seq.bound();
  const auto n = static_cast<std::ptrdiff_t>(seq.size());
  for (std::ptrdiff_t t = 1; t <= n; ++t) {
    const Vector<Scalar> f = features(spec, seq, t);
    Scalar p = options.variant == Variant::Universal ? predict_universal(state, f)
                                                     : predict(state, f);
    if (options.clip) p = std::clamp(p, -bound, bound);
    const Scalar x = seq.at(t);
    detail::record(out, p, x);
    state = update(std::move(state), f, x);
  }
  return out;
}

template <typename Scalar>
OnlineRunResult<Scalar> run_online(const FeatureSpec& spec, const BoundedSequence<Scalar>& seq,
                                   Scalar delta = Scalar(1), bool clip = false) {
  return run_online(spec, seq, OnlineOptions<Scalar>{delta, clip, Variant::Universal});
}

/// LMS baseline: w <- w + mu e f, starting from w = 0.
template <typename Scalar>
OnlineRunResult<Scalar> run_lms(const FeatureSpec& spec, const BoundedSequence<Scalar>& seq,
                                Scalar step_size) {
  detail::require_nonempty(seq);
  if (!(step_size >= Scalar(0))) throw ParameterError("LMS step size must be >= 0");
  Vector<Scalar> w = Vector<Scalar>::Zero(spec.order_m);
  OnlineRunResult<Scalar> out;
  const auto n = static_cast<std::ptrdiff_t>(seq.size());
  for (std::ptrdiff_t t = 1; t <= n; ++t) {
    const Vector<Scalar> f = features(spec, seq, t);
    const Scalar p = w.dot(f);
    const Scalar x = seq.at(t);
    detail::record(out, p, x);
    w += step_size * (x - p) * f;
  }
  return out;
}

/**
 * Exponentially weighted RLS in its classic gain form. At forgetting = 1
 * it reproduces run_online with Variant::Ridge.
 */
template <typename Scalar>
OnlineRunResult<Scalar> run_rls(const FeatureSpec& spec, const BoundedSequence<Scalar>& seq,
                                Scalar delta = Scalar(1), Scalar forgetting = Scalar(1)) {
  detail::require_nonempty(seq);
  if (!(delta > Scalar(0))) throw ParameterError("regularizer delta must be > 0");
  if (!(forgetting > Scalar(0) && forgetting <= Scalar(1))) {
    throw ParameterError("forgetting factor must lie in (0, 1]");
  }
  const int m = spec.order_m;
  Vector<Scalar> w = Vector<Scalar>::Zero(m);
  Matrix<Scalar> p = Matrix<Scalar>::Identity(m, m) / delta;
  OnlineRunResult<Scalar> out;
  const auto n = static_cast<std::ptrdiff_t>(seq.size());
  for (std::ptrdiff_t t = 1; t <= n; ++t) {
    const Vector<Scalar> f = features(spec, seq, t);
    const Scalar pred = w.dot(f);
    const Scalar x = seq.at(t);
    detail::record(out, pred, x);
    const Vector<Scalar> pf = p * f;
    const Vector<Scalar> gain = pf / (forgetting + f.dot(pf));
    w += gain * (x - pred);
    p = (p - gain * pf.transpose()) / forgetting;
  }
  return out;
}

}  // namespace uniregret

#endif  // UNIREGRET_PREDICTOR_HPP
