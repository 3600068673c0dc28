#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bregforest/error.hpp"
#include "bregforest/types.hpp"

namespace bregforest {

enum class DivergenceKind : std::uint8_t {
  kSquaredEuclidean = 0,
  kDiagonalMahalanobis = 1,
  kItakuraSaito = 2,
  kExponential = 3,
};

std::string_view to_string(DivergenceKind kind);

// Parses the CLI names `se`, `mahalanobis`, `isd`, `exp` (and the long names).
DivergenceKind parse_divergence_kind(std::string_view name);

/// A separable Bregman generator f(x) = sum_i f_i(x_i).
///
/// Per-coordinate generators:
///   squared-euclidean     f(t) = t^2,            f'(t) = 2t
///   diagonal-mahalanobis  f(t) = q_i t^2 / 2,    f'(t) = q_i t
///   itakura-saito         f(t) = -log t,         f'(t) = -1/t   (t > floor)
///   exponential           f(t) = e^t,            f'(t) = e^t
///
/// Immutable after construction.
class DivergenceSpec {
 public:
  static constexpr double kDefaultItakuraSaitoFloor = 1e-12;

  static DivergenceSpec squared_euclidean();
  // `weights` is the diagonal of Q; every entry must be strictly positive.
  static DivergenceSpec diagonal_mahalanobis(VectorXd weights);
  // Full Q is only accepted when it is diagonal.
  static DivergenceSpec mahalanobis(const Eigen::MatrixXd& q);
  static DivergenceSpec itakura_saito(double floor = kDefaultItakuraSaitoFloor);
  static DivergenceSpec exponential();

  // Weights are required for (and only for) diagonal-mahalanobis.
  static DivergenceSpec from_kind(DivergenceKind kind, std::optional<VectorXd> weights = {},
                                  double itakura_saito_floor = kDefaultItakuraSaitoFloor);

  DivergenceKind kind() const { return kind_; }
  std::string_view name() const { return to_string(kind_); }
  const VectorXd& weights() const { return weights_; }
  bool has_weights() const { return kind_ == DivergenceKind::kDiagonalMahalanobis; }
  double domain_floor() const { return floor_; }

  // Spec over the sub-vector made of the given original dimensions (weights
  // are gathered; other kinds are unchanged).
  DivergenceSpec restrict(std::span<const Index> dims) const;

  double weight(Index dim) const { return has_weights() ? weights_[dim] : 1.0; }

  bool in_domain(double t) const {
    if (!std::isfinite(t)) return false;
    return kind_ == DivergenceKind::kItakuraSaito ? t > floor_ : true;
  }

  bool in_grad_range(double s) const {
    if (!std::isfinite(s)) return false;
    switch (kind_) {
      case DivergenceKind::kItakuraSaito:
        return s < 0.0;
      case DivergenceKind::kExponential:
        return s > 0.0;
      default:
        return true;
    }
  }

  // Unchecked per-coordinate kernels. Callers validate the domain first.
  double value_unchecked(Index dim, double t) const {
    switch (kind_) {
      case DivergenceKind::kSquaredEuclidean:
        return t * t;
      case DivergenceKind::kDiagonalMahalanobis:
        return 0.5 * weights_[dim] * t * t;
      case DivergenceKind::kItakuraSaito:
        return -std::log(t);
      case DivergenceKind::kExponential:
        return std::exp(t);
    }
    return 0.0;
  }

  double grad_unchecked(Index dim, double t) const {
    switch (kind_) {
      case DivergenceKind::kSquaredEuclidean:
        return 2.0 * t;
      case DivergenceKind::kDiagonalMahalanobis:
        return weights_[dim] * t;
      case DivergenceKind::kItakuraSaito:
        return -1.0 / t;
      case DivergenceKind::kExponential:
        return std::exp(t);
    }
    return 0.0;
  }

  double grad_inverse_unchecked(Index dim, double s) const {
    switch (kind_) {
      case DivergenceKind::kSquaredEuclidean:
        return 0.5 * s;
      case DivergenceKind::kDiagonalMahalanobis:
        return s / weights_[dim];
      case DivergenceKind::kItakuraSaito:
        return -1.0 / s;
      case DivergenceKind::kExponential:
        return std::log(s);
    }
    return 0.0;
  }

  // One term f(x) - f(y) - f'(y)(x - y).
  double term_unchecked(Index dim, double x, double y) const {
    switch (kind_) {
      case DivergenceKind::kSquaredEuclidean: {
        const double diff = x - y;
        return diff * diff;
      }
      case DivergenceKind::kDiagonalMahalanobis: {
        const double diff = x - y;
        return 0.5 * weights_[dim] * diff * diff;
      }
      case DivergenceKind::kItakuraSaito: {
        // Written as a product with 1/y so QueryKernel can cache it.
        const double ratio = x * (1.0 / y);
        return ratio - std::log(ratio) - 1.0;
      }
      case DivergenceKind::kExponential: {
        const double ey = std::exp(y);
        return std::exp(x) - ey - ey * (x - y);
      }
    }
    return 0.0;
  }

  // Throws DomainError naming the coordinate.
  void check_domain(Index dim, double t) const;

  template <typename Derived>
  void validate(const Eigen::DenseBase<Derived>& v) const {
    if (kind_ != DivergenceKind::kItakuraSaito) {
      for (Index i = 0; i < v.size(); ++i) check_domain(i, static_cast<double>(v.derived().coeff(i)));
      return;
    }
    for (Index i = 0; i < v.size(); ++i) {
      const double t = static_cast<double>(v.derived().coeff(i));
      if (!(t > floor_) || !std::isfinite(t)) check_domain(i, t);
    }
  }

 private:
  DivergenceSpec(DivergenceKind kind, VectorXd weights, double floor)
      : kind_(kind), weights_(std::move(weights)), floor_(floor) {}

  DivergenceKind kind_;
  VectorXd weights_;
  double floor_;
};

double generator_value(const DivergenceSpec& spec, Index dim, double t);
double generator_grad(const DivergenceSpec& spec, Index dim, double t);
double generator_grad_inverse(const DivergenceSpec& spec, Index dim, double s);

/// D_f(x, y) = sum_i f(x_i) - f(y_i) - f'(y_i)(x_i - y_i), accumulated in
/// double. Domain checks are left to the caller; see the checked overload.
template <typename DerivedX, typename DerivedY>
double bregman_distance_unchecked(const DivergenceSpec& spec, const Eigen::MatrixBase<DerivedX>& x,
                                  const Eigen::MatrixBase<DerivedY>& y) {
  double sum = 0.0;
  const Index size = x.size();
  switch (spec.kind()) {
    case DivergenceKind::kSquaredEuclidean:
      for (Index i = 0; i < size; ++i) {
        const double diff = static_cast<double>(x.coeff(i)) - static_cast<double>(y.coeff(i));
        sum += diff * diff;
      }
      return sum;
    case DivergenceKind::kDiagonalMahalanobis:
      for (Index i = 0; i < size; ++i) {
        const double diff = static_cast<double>(x.coeff(i)) - static_cast<double>(y.coeff(i));
        sum += 0.5 * spec.weights()[i] * diff * diff;
      }
      return sum;
    default:
      for (Index i = 0; i < size; ++i) {
        sum += spec.term_unchecked(i, static_cast<double>(x.coeff(i)), static_cast<double>(y.coeff(i)));
      }
      return sum;
  }
}

/// D_f(., y) for one fixed y: caches 1/y (Itakura-Saito) or e^y
/// (exponential). Bit-identical to bregman_distance_unchecked(spec, x, y).
/// Holds a reference to `spec`.
class QueryKernel {
 public:
  QueryKernel(const DivergenceSpec& spec, const Eigen::Ref<const VectorXd>& y) : spec_(spec), y_(y), aux_(y.size()) {
    for (Index i = 0; i < y.size(); ++i) {
      if (spec.kind() == DivergenceKind::kItakuraSaito) aux_[i] = 1.0 / y[i];
      if (spec.kind() == DivergenceKind::kExponential) aux_[i] = std::exp(y[i]);
    }
  }

  template <typename Derived>
  double operator()(const Eigen::MatrixBase<Derived>& x) const {
    const Index size = x.size();
    double sum = 0.0;
    switch (spec_.kind()) {
      case DivergenceKind::kItakuraSaito:
        for (Index i = 0; i < size; ++i) {
          const double ratio = static_cast<double>(x.coeff(i)) * aux_[i];
          sum += ratio - std::log(ratio) - 1.0;
        }
        return sum;
      case DivergenceKind::kExponential:
        for (Index i = 0; i < size; ++i) {
          const double xi = static_cast<double>(x.coeff(i));
          sum += std::exp(xi) - aux_[i] - aux_[i] * (xi - y_[i]);
        }
        return sum;
      default:
        return bregman_distance_unchecked(spec_, x, y_);
    }
  }

 private:
  const DivergenceSpec& spec_;
  VectorXd y_;
  VectorXd aux_;
};

template <typename DerivedX, typename DerivedY>
double bregman_distance(const DivergenceSpec& spec, const Eigen::MatrixBase<DerivedX>& x,
                        const Eigen::MatrixBase<DerivedY>& y) {
  if (x.size() != y.size()) {
    throw InvalidArgument("bregman_distance: length mismatch (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
  if (spec.has_weights() && spec.weights().size() != x.size()) {
    throw InvalidArgument("bregman_distance: weights have length " + std::to_string(spec.weights().size()) +
                          " but vectors have length " + std::to_string(x.size()) + "; pass dim_offsets");
  }
  spec.validate(x);
  spec.validate(y);
  return bregman_distance_unchecked(spec, x, y);
}

/// Sub-vector form: position i of x and y corresponds to original dimension
/// dim_offsets[i] (used for the Mahalanobis weight lookup).
template <typename DerivedX, typename DerivedY>
double bregman_distance(const DivergenceSpec& spec, const Eigen::MatrixBase<DerivedX>& x,
                        const Eigen::MatrixBase<DerivedY>& y, std::span<const Index> dim_offsets) {
  if (x.size() != y.size() || static_cast<std::size_t>(x.size()) != dim_offsets.size()) {
    throw InvalidArgument("bregman_distance: length mismatch between x, y and dim_offsets");
  }
  double sum = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const Index dim = dim_offsets[static_cast<std::size_t>(i)];
    if (spec.has_weights() && (dim < 0 || dim >= spec.weights().size())) {
      throw InvalidArgument("bregman_distance: dim offset " + std::to_string(dim) + " out of range");
    }
    const double xi = static_cast<double>(x.coeff(i));
    const double yi = static_cast<double>(y.coeff(i));
    spec.check_domain(dim, xi);
    spec.check_domain(dim, yi);
    sum += spec.term_unchecked(dim, xi, yi);
  }
  return sum;
}

}  // namespace bregforest
