#ifndef UNIREGRET_BATCH_HPP
#define UNIREGRET_BATCH_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include "uniregret/predictor.hpp"
#include "uniregret/sequence.hpp"

namespace uniregret {

/// Relative singular-value cutoff of the unregularized pseudo-solve.
inline constexpr double kPseudoSolveTolerance = 1e-10;

/// Absolute slack allowed when checking the log-determinant regret bound.
inline constexpr double kBoundSlack = 1e-6;

template <typename Scalar>
struct BatchSolution {
  Vector<Scalar> weights;
  Scalar loss = Scalar(0);       ///< sum (x - a^T f)^2 at the minimizer
  Scalar objective = Scalar(0);  ///< loss + delta |a|^2
};

/**
 * Hindsight minimizer of sum (x[t] - a^T f_t)^2 + delta |a|^2 over the whole
 * sequence. delta = 0 gives the minimum-norm least-squares solution through
 * a thresholded SVD of the feature matrix.
 */
template <typename Scalar>
BatchSolution<Scalar> batch_solve(const FeatureSpec& spec, const BoundedSequence<Scalar>& seq,
                                  Scalar delta) {
  if (!(delta >= Scalar(0))) throw ParameterError("batch regularizer must be >= 0");
  const Matrix<Scalar> rows = feature_matrix(spec, seq);
  const Eigen::Map<const Vector<Scalar>> x(seq.values().data(),
                                           static_cast<Eigen::Index>(seq.size()));
  BatchSolution<Scalar> out;
  if (delta > Scalar(0)) {
    Matrix<Scalar> regularized = rows.transpose() * rows;
    regularized.diagonal().array() += delta;
    Eigen::LLT<Matrix<Scalar>> llt(regularized);
    if (llt.info() != Eigen::Success) throw NumericError("ridge normal equations not positive definite");
    out.weights = llt.solve(rows.transpose() * x);
  } else if (rows.rows() == 0) {
    out.weights = Vector<Scalar>::Zero(spec.order_m);
  } else {
    Eigen::BDCSVD<Matrix<Scalar>> svd(rows, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(Scalar(kPseudoSolveTolerance));
    out.weights = svd.solve(x);
  }
  out.loss = (x - rows * out.weights).squaredNorm();
  out.objective = out.loss + delta * out.weights.squaredNorm();
  return out;
}

/// ln det(I + gram / delta), summed from the Cholesky diagonal.
template <typename Scalar>
Scalar log_det_regularized(const Matrix<Scalar>& gram, Scalar delta) {
  if (!(delta > Scalar(0))) throw ParameterError("delta must be > 0");
  Matrix<Scalar> scaled = gram / delta;
  scaled.diagonal().array() += Scalar(1);
  Eigen::LLT<Matrix<Scalar>> llt(scaled);
  if (llt.info() != Eigen::Success) throw NumericError("I + R/delta is not positive definite");
  Scalar sum(0);
  for (Eigen::Index i = 0; i < scaled.rows(); ++i) sum += std::log(llt.matrixLLT()(i, i));
  return Scalar(2) * sum;
}

/**
 * Regret accounting for one online run against the batch comparators.
 *
 * The bound check is sequential_loss <= batch_loss_ridge + det_bound with
 * batch_loss_ridge the penalized objective; every sum runs over t = 1..n,
 * including the zero-padded start-up steps.
 */
template <typename Scalar>
struct RegretReport {
  std::size_t n = 0;
  int m = 0;
  FeatureClass kind = FeatureClass::LinearLag;
  Scalar delta = Scalar(1);
  Scalar bound = Scalar(1);

  Scalar sequential_loss = Scalar(0);
  Scalar batch_loss_ridge = Scalar(0);          ///< min_a { loss(a) + delta |a|^2 }
  Scalar ridge_fit_loss = Scalar(0);            ///< loss(a*) without the penalty
  Scalar batch_loss_unregularized = Scalar(0);  ///< min_a loss(a)
  Scalar regret_vs_unregularized = Scalar(0);
  Scalar det_bound = Scalar(0);     ///< A^2 ln det(I + R/delta)
  Scalar simple_bound = Scalar(0);  ///< A^2 m ln(1 + A^2 n / delta)
  Vector<Scalar> weights_star;

  Scalar bound_slack() const { return batch_loss_ridge + det_bound - sequential_loss; }
  bool bound_holds(Scalar slack = Scalar(kBoundSlack)) const { return bound_slack() >= -slack; }
};

template <typename Scalar>
RegretReport<Scalar> regret_report(const FeatureSpec& spec, const BoundedSequence<Scalar>& seq,
                                   Scalar delta, const OnlineRunResult<Scalar>& online) {
  if (online.predictions.size() != seq.size() || online.per_step_losses.size() != seq.size()) {
    throw UsageError("online result has a different horizon than the sequence");
  }
  const auto ridge = batch_solve(spec, seq, delta);
  const auto raw = batch_solve(spec, seq, Scalar(0));
  const Matrix<Scalar> rows = feature_matrix(spec, seq);
  const Matrix<Scalar> gram = rows.transpose() * rows;
  const Scalar a2 = seq.bound() * seq.bound();

  RegretReport<Scalar> rep;
  rep.n = seq.size();
  rep.m = spec.order_m;
  rep.kind = spec.kind;
  rep.delta = delta;
  rep.bound = seq.bound();
  rep.sequential_loss = online.cumulative_loss;
  rep.batch_loss_ridge = ridge.objective;
  rep.ridge_fit_loss = ridge.loss;
  rep.batch_loss_unregularized = raw.loss;
  rep.regret_vs_unregularized = online.cumulative_loss - raw.loss;
  rep.det_bound = a2 * log_det_regularized(gram, delta);
  rep.simple_bound = a2 * Scalar(spec.order_m) *
                     std::log1p(a2 * Scalar(seq.size()) / delta);
  rep.weights_star = ridge.weights;
  return rep;
}

/// -2h ln P_u evaluated by completing the square and by chaining the
/// per-step Gaussian predictive densities.
template <typename Scalar>
struct MixtureEvidence {
  Scalar closed_form = Scalar(0);
  Scalar sequential = Scalar(0);
};

namespace detail {

template <typename Scalar>
void check_mixture_inputs(const FeatureSpec& spec, Scalar h, Scalar sigma2) {
  if (spec.order_m != 1) throw UnsupportedClassError("mixture evidence is defined for scalar features (m = 1)");
  if (!(h > Scalar(0)) || !(sigma2 > Scalar(0))) throw ParameterError("h and sigma^2 must be > 0");
}

}  // namespace detail

/**
 * Gaussian-mixture evidence for the scalar class. With P_beta =
 * exp(-sum (x - beta f)^2 / 2h) and a N(0, sigma2) prior on beta,
 *
 *   -2h ln P_u = min_beta { sum (x - beta f)^2 + (h / sigma2) beta^2 }
 *                + h ln(1 + sigma2 R / h).
 */
template <typename Scalar>
MixtureEvidence<Scalar> mixture_log_evidence(const FeatureSpec& spec,
                                             const BoundedSequence<Scalar>& seq, Scalar h,
                                             Scalar sigma2) {
  detail::check_mixture_inputs(spec, h, sigma2);
  const Scalar lambda = h / sigma2;
  Scalar gram(0), cross(0), sequential(0);
  const auto n = static_cast<std::ptrdiff_t>(seq.size());
  std::vector<Scalar> f(seq.size());
  for (std::ptrdiff_t t = 1; t <= n; ++t) {
    const Scalar ft = features(spec, seq, t)(0);
    const Scalar xt = seq.at(t);
    f[static_cast<std::size_t>(t - 1)] = ft;
    const Scalar before = gram + lambda;
    const Scalar after = before + ft * ft;
    const Scalar e = xt - (cross / before) * ft;
    sequential += (before / after) * e * e + h * std::log(after / before);
    gram += ft * ft;
    cross += xt * ft;
  }
  const Scalar beta = cross / (gram + lambda);
  Scalar residual(0);
  for (std::ptrdiff_t t = 1; t <= n; ++t) {
    const Scalar e = seq.at(t) - beta * f[static_cast<std::size_t>(t - 1)];
    residual += e * e;
  }
  MixtureEvidence<Scalar> out;
  out.closed_form = residual + lambda * beta * beta + h * std::log1p(sigma2 * gram / h);
  out.sequential = sequential;
  return out;
}

/**
 * Trapezoidal evaluation of -2h ln of the integral of p(beta) P_beta over
 * [-width*sigma, width*sigma]. The integrand is shifted by its largest
 * log-value so long sequences do not underflow.
 */
template <typename Scalar>
Scalar mixture_log_evidence_quadrature(const FeatureSpec& spec,
                                       const BoundedSequence<Scalar>& seq, Scalar h,
                                       Scalar sigma2, int intervals = 20000,
                                       Scalar width = Scalar(10)) {
  detail::check_mixture_inputs(spec, h, sigma2);
  if (intervals < 2) throw ParameterError("quadrature needs at least 2 intervals");
  Scalar sxx(0), sxf(0), sff(0);
  const auto n = static_cast<std::ptrdiff_t>(seq.size());
  for (std::ptrdiff_t t = 1; t <= n; ++t) {
    const Scalar ft = features(spec, seq, t)(0);
    const Scalar xt = seq.at(t);
    sxx += xt * xt;
    sxf += xt * ft;
    sff += ft * ft;
  }
  const Scalar sigma = std::sqrt(sigma2);
  const Scalar lo = -width * sigma;
  const Scalar step = Scalar(2) * width * sigma / Scalar(intervals);
  auto log_integrand = [&](Scalar beta) {
    const Scalar loss = sxx - Scalar(2) * beta * sxf + beta * beta * sff;
    return -loss / (Scalar(2) * h) - beta * beta / (Scalar(2) * sigma2);
  };
  Scalar peak = log_integrand(lo);
  for (int i = 1; i <= intervals; ++i) peak = std::max(peak, log_integrand(lo + Scalar(i) * step));
  Scalar sum(0);
  for (int i = 0; i <= intervals; ++i) {
    const Scalar w = (i == 0 || i == intervals) ? Scalar(0.5) : Scalar(1);
    sum += w * std::exp(log_integrand(lo + Scalar(i) * step) - peak);
  }
  const Scalar pi = Scalar(3.14159265358979323846);
  const Scalar log_pu = peak + std::log(sum * step) - std::log(std::sqrt(Scalar(2) * pi) * sigma);
  return Scalar(-2) * h * log_pu;
}

}  // namespace uniregret

#endif  // UNIREGRET_BATCH_HPP
