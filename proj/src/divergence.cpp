#include "bregforest/divergence.hpp"

#include <sstream>

namespace bregforest {

std::string_view to_string(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::kSquaredEuclidean:
      return "squared-euclidean";
    case DivergenceKind::kDiagonalMahalanobis:
      return "diagonal-mahalanobis";
    case DivergenceKind::kItakuraSaito:
      return "itakura-saito";
    case DivergenceKind::kExponential:
      return "exponential";
  }
  return "unknown";
}

DivergenceKind parse_divergence_kind(std::string_view name) {
  if (name == "se" || name == "squared-euclidean") return DivergenceKind::kSquaredEuclidean;
  if (name == "mahalanobis" || name == "diagonal-mahalanobis") return DivergenceKind::kDiagonalMahalanobis;
  if (name == "isd" || name == "itakura-saito") return DivergenceKind::kItakuraSaito;
  if (name == "exp" || name == "exponential") return DivergenceKind::kExponential;
  if (name == "kl" || name == "kullback-leibler") {
    throw InvalidArgument("KL-divergence is not supported: it does not decompose over partitioned subspaces");
  }
  throw InvalidArgument("unknown divergence '" + std::string(name) + "' (expected se|mahalanobis|isd|exp)");
}

DivergenceSpec DivergenceSpec::squared_euclidean() {
  return {DivergenceKind::kSquaredEuclidean, VectorXd(), 0.0};
}

DivergenceSpec DivergenceSpec::diagonal_mahalanobis(VectorXd weights) {
  if (weights.size() == 0) throw InvalidArgument("mahalanobis: weight vector is empty");
  for (Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      std::ostringstream msg;
      msg << "mahalanobis: weight " << i << " = " << weights[i] << " is not strictly positive";
      throw InvalidArgument(msg.str());
    }
  }
  return {DivergenceKind::kDiagonalMahalanobis, std::move(weights), 0.0};
}

DivergenceSpec DivergenceSpec::mahalanobis(const Eigen::MatrixXd& q) {
  if (q.rows() != q.cols()) throw InvalidArgument("mahalanobis: Q must be square");
  for (Index i = 0; i < q.rows(); ++i) {
    for (Index j = 0; j < q.cols(); ++j) {
      if (i != j && q(i, j) != 0.0) {
        throw InvalidArgument("mahalanobis: only diagonal Q is supported (non-zero entry at (" +
                              std::to_string(i) + ", " + std::to_string(j) + "))");
      }
    }
  }
  return diagonal_mahalanobis(q.diagonal());
}

DivergenceSpec DivergenceSpec::itakura_saito(double floor) {
  if (!(floor >= 0.0) || !std::isfinite(floor)) throw InvalidArgument("itakura-saito: floor must be >= 0");
  return {DivergenceKind::kItakuraSaito, VectorXd(), floor};
}

DivergenceSpec DivergenceSpec::exponential() { return {DivergenceKind::kExponential, VectorXd(), 0.0}; }

DivergenceSpec DivergenceSpec::from_kind(DivergenceKind kind, std::optional<VectorXd> weights,
                                         double itakura_saito_floor) {
  if (kind == DivergenceKind::kDiagonalMahalanobis) {
    if (!weights) throw InvalidArgument("mahalanobis requires a weight vector");
    return diagonal_mahalanobis(std::move(*weights));
  }
  if (weights) throw InvalidArgument(std::string(to_string(kind)) + " does not take weights");
  switch (kind) {
    case DivergenceKind::kSquaredEuclidean:
      return squared_euclidean();
    case DivergenceKind::kItakuraSaito:
      return itakura_saito(itakura_saito_floor);
    case DivergenceKind::kExponential:
      return exponential();
    default:
      break;
  }
  throw InvalidArgument("unknown divergence kind");
}

DivergenceSpec DivergenceSpec::restrict(std::span<const Index> dims) const {
  if (!has_weights()) return *this;
  VectorXd sub(static_cast<Index>(dims.size()));
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 0 || dims[i] >= weights_.size()) {
      throw InvalidArgument("restrict: dimension " + std::to_string(dims[i]) + " out of range");
    }
    sub[static_cast<Index>(i)] = weights_[dims[i]];
  }
  return {kind_, std::move(sub), floor_};
}

void DivergenceSpec::check_domain(Index dim, double t) const {
  if (has_weights() && (dim < 0 || dim >= weights_.size())) {
    throw InvalidArgument("coordinate " + std::to_string(dim) + " has no mahalanobis weight");
  }
  if (in_domain(t)) return;
  std::ostringstream msg;
  msg << "coordinate " << dim << " = " << t << " is outside the domain of " << name();
  if (kind_ == DivergenceKind::kItakuraSaito) msg << " (must exceed " << floor_ << ")";
  throw DomainError(msg.str());
}

double generator_value(const DivergenceSpec& spec, Index dim, double t) {
  spec.check_domain(dim, t);
  return spec.value_unchecked(dim, t);
}

double generator_grad(const DivergenceSpec& spec, Index dim, double t) {
  spec.check_domain(dim, t);
  return spec.grad_unchecked(dim, t);
}

double generator_grad_inverse(const DivergenceSpec& spec, Index dim, double s) {
  if (spec.has_weights() && (dim < 0 || dim >= spec.weights().size())) {
    throw InvalidArgument("coordinate " + std::to_string(dim) + " has no mahalanobis weight");
  }
  if (!spec.in_grad_range(s)) {
    std::ostringstream msg;
    msg << "gradient value " << s << " at coordinate " << dim << " is outside the range of " << spec.name()
        << "'s derivative";
    throw DomainError(msg.str());
  }
  return spec.grad_inverse_unchecked(dim, s);
}

}  // namespace bregforest
