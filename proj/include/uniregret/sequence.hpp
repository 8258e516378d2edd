#ifndef UNIREGRET_SEQUENCE_HPP
#define UNIREGRET_SEQUENCE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uniregret/errors.hpp"

namespace uniregret {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/**
 * A finite real sequence x[1..n] together with a declared amplitude bound A.
 *
 * Time indices are 1-based, matching the usual x[t] notation. Reads before
 * the start of the sequence return zero, which is how every feature class
 * pads missing history.
 */
template <typename Scalar>
class BoundedSequence {
public:
  BoundedSequence(std::vector<Scalar> values, Scalar bound)
      : values_(std::move(values)), bound_(bound) {
    if (!(bound_ > Scalar(0)) || !std::isfinite(static_cast<double>(bound_))) {
      throw ParameterError("sequence bound A must be positive and finite");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(std::abs(values_[i]) <= bound_)) {
        throw ParameterError("sample x[" + std::to_string(i + 1) +
                             "] exceeds the declared bound");
      }
    }
  }

  /// Uses A = max|x[t]|; an all-zero (or empty) sequence gets A = 1.
  static BoundedSequence with_tight_bound(std::vector<Scalar> values) {
    Scalar bound(0);
    for (const Scalar v : values) bound = std::max(bound, Scalar(std::abs(v)));
    if (bound == Scalar(0)) bound = Scalar(1);
    return BoundedSequence(std::move(values), bound);
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  Scalar bound() const noexcept { return bound_; }
  std::span<const Scalar> values() const noexcept { return values_; }

  /// x[t] for 1 <= t <= n; zero for t < 1.
  Scalar at(std::ptrdiff_t t) const {
    if (t < 1) return Scalar(0);
    if (t > static_cast<std::ptrdiff_t>(values_.size())) {
      throw RangeError("time index " + std::to_string(t) + " past end of sequence");
    }
    return values_[static_cast<std::size_t>(t - 1)];
  }

  BoundedSequence prefix(std::size_t n) const {
    if (n > values_.size()) throw RangeError("prefix longer than sequence");
    return BoundedSequence(std::vector<Scalar>(values_.begin(), values_.begin() + n), bound_);
  }

private:
  std::vector<Scalar> values_;
  Scalar bound_;
};

enum class FeatureClass { UnivariatePoly, MultivariateMonomials, LinearLag };

/// One factor x[t - lag]^exponent of a monomial.
struct MonomialFactor {
  int lag = 1;
  int exponent = 1;
};

using Monomial = std::vector<MonomialFactor>;

inline int total_degree(const Monomial& mono) {
  int deg = 0;
  for (const auto& f : mono) deg += f.exponent;
  return deg;
}

inline int max_lag(const Monomial& mono) {
  int lag = 0;
  for (const auto& f : mono) lag = std::max(lag, f.lag);
  return lag;
}

/**
 * A parametric predictor class: which feature map, its dimension m, the
 * lookahead k and how far back the features reach (memory a).
 *
 * Build through the named constructors; they establish the per-class
 * invariants that validate() checks.
 */
struct FeatureSpec {
  FeatureClass kind = FeatureClass::LinearLag;
  int order_m = 1;
  int lookahead_k = 1;
  int memory_a = 1;
  std::vector<Monomial> monomials;

  /// Features x[t-1]^i for i = 1..m.
  static FeatureSpec univariate_poly(int m) {
    FeatureSpec s;
    s.kind = FeatureClass::UnivariatePoly;
    s.order_m = m;
    s.lookahead_k = 1;
    s.memory_a = 1;
    s.validate();
    return s;
  }

  /// Features [x[t-k], ..., x[t-k-m+1]].
  static FeatureSpec linear_lag(int k, int m) {
    FeatureSpec s;
    s.kind = FeatureClass::LinearLag;
    s.order_m = m;
    s.lookahead_k = k;
    s.memory_a = k + m - 1;
    s.validate();
    return s;
  }

  /// One feature per monomial; nonnegative integer exponents only.
  static FeatureSpec multivariate(std::vector<Monomial> monos) {
    FeatureSpec s;
    s.kind = FeatureClass::MultivariateMonomials;
    s.order_m = static_cast<int>(monos.size());
    s.lookahead_k = 1;
    s.memory_a = 0;
    for (const auto& mono : monos) s.memory_a = std::max(s.memory_a, max_lag(mono));
    s.monomials = std::move(monos);
    s.validate();
    return s;
  }

  void validate() const {
    if (order_m < 1) throw SpecError("feature order m must be >= 1");
    if (lookahead_k < 1) throw SpecError("lookahead k must be >= 1");
    if (memory_a < 0) throw SpecError("memory a must be >= 0");
    switch (kind) {
      case FeatureClass::UnivariatePoly:
        if (memory_a != 1 || lookahead_k != 1 || !monomials.empty()) {
          throw SpecError("univariate polynomial class needs k = 1, a = 1 and no monomials");
        }
        break;
      case FeatureClass::LinearLag:
        if (memory_a != lookahead_k + order_m - 1 || !monomials.empty()) {
          throw SpecError("linear lag class needs a = k + m - 1 and no monomials");
        }
        break;
      case FeatureClass::MultivariateMonomials: {
        if (static_cast<int>(monomials.size()) != order_m) {
          throw SpecError("monomial class needs exactly m monomials");
        }
        if (lookahead_k != 1) throw SpecError("monomial class is one-step only");
        int reach = 0;
        for (const auto& mono : monomials) {
          if (mono.empty()) throw SpecError("empty monomial");
          for (const auto& f : mono) {
            if (f.lag < 1) throw SpecError("monomial lag must be >= 1");
            if (f.exponent < 0) throw SpecError("negative exponents are not supported");
          }
          if (total_degree(mono) < 1) throw SpecError("monomial total degree must be >= 1");
          reach = std::max(reach, max_lag(mono));
        }
        if (memory_a != reach) throw SpecError("memory a must equal the largest monomial lag");
        break;
      }
    }
  }
};

inline const char* class_name(FeatureClass kind) {
  switch (kind) {
    case FeatureClass::UnivariatePoly: return "univar";
    case FeatureClass::MultivariateMonomials: return "monomial";
    case FeatureClass::LinearLag: return "linear";
  }
  return "unknown";
}

namespace detail {

template <typename Scalar>
Scalar sample_at(std::span<const Scalar> history, std::ptrdiff_t t) {
  return t < 1 ? Scalar(0) : history[static_cast<std::size_t>(t - 1)];
}

}  // namespace detail

template <typename Scalar>
Scalar evaluate_monomial(const Monomial& mono, std::span<const Scalar> history, std::ptrdiff_t t) {
  Scalar v(1);
  for (const auto& f : mono) {
    const Scalar base = detail::sample_at(history, t - f.lag);
    for (int e = 0; e < f.exponent; ++e) v *= base;
  }
  return v;
}

/**
 * Feature vector used to predict x[t] from the samples x[1..t-1] in
 * history, for 1 <= t <= history.size() + 1. Samples with index < 1 read
 * as zero.
 */
template <typename Scalar>
Vector<Scalar> features(const FeatureSpec& spec, std::span<const Scalar> history,
                        std::ptrdiff_t t) {
  spec.validate();
  if (t < 1 || t > static_cast<std::ptrdiff_t>(history.size()) + 1) {
    throw RangeError("feature time t=" + std::to_string(t) + " outside [1, n+1]");
  }
  Vector<Scalar> f(spec.order_m);
  switch (spec.kind) {
    case FeatureClass::UnivariatePoly: {
      const Scalar base = detail::sample_at(history, t - 1);
      Scalar p = base;
      for (int i = 0; i < spec.order_m; ++i) {
        f(i) = p;
        p *= base;
      }
      break;
    }
    case FeatureClass::LinearLag:
      for (int j = 0; j < spec.order_m; ++j) {
        f(j) = detail::sample_at(history, t - spec.lookahead_k - j);
      }
      break;
    case FeatureClass::MultivariateMonomials:
      for (int j = 0; j < spec.order_m; ++j) {
        f(j) = evaluate_monomial(spec.monomials[static_cast<std::size_t>(j)], history, t);
      }
      break;
  }
  return f;
}

template <typename Scalar>
Vector<Scalar> features(const FeatureSpec& spec, const BoundedSequence<Scalar>& seq,
                        std::ptrdiff_t t) {
  return features(spec, seq.values(), t);
}

/// Rows are features(spec, seq, t) for t = 1..n.
template <typename Scalar>
Matrix<Scalar> feature_matrix(const FeatureSpec& spec, const BoundedSequence<Scalar>& seq) {
  const auto n = static_cast<Eigen::Index>(seq.size());
  Matrix<Scalar> rows(n, spec.order_m);
  for (Eigen::Index t = 1; t <= n; ++t) rows.row(t - 1) = features(spec, seq, t).transpose();
  return rows;
}

/// M = max_j sup_{|x| <= A} |feature_j|, by degree arithmetic.
template <typename Scalar>
Scalar normalization_constant(const FeatureSpec& spec, Scalar bound) {
  spec.validate();
  if (!(bound > Scalar(0))) throw ParameterError("bound A must be positive");
  using std::pow;
  switch (spec.kind) {
    case FeatureClass::UnivariatePoly:
      return std::max(bound, Scalar(pow(bound, spec.order_m)));
    case FeatureClass::LinearLag:
      return bound;
    case FeatureClass::MultivariateMonomials: {
      Scalar best(0);
      for (const auto& mono : spec.monomials) {
        best = std::max(best, Scalar(pow(bound, total_degree(mono))));
      }
      return best;
    }
  }
  return bound;
}

using SequenceD = BoundedSequence<double>;

}  // namespace uniregret

#endif  // UNIREGRET_SEQUENCE_HPP
