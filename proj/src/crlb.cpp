#include "sonarcrlb/crlb.hpp"

#include <cmath>
#include <limits>

#include "sonarcrlb/errors.hpp"

namespace sonarcrlb {

namespace {

struct ScaledInverse {
  Eigen::MatrixXd inverse;
  double condition = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Inverse through the Jacobi-scaled matrix S = D^-1/2 A D^-1/2, whose eigenvalues
// give a unit-free condition number.
ScaledInverse scaled_inverse(const Eigen::MatrixXd& block) {
  ScaledInverse out;
  const Eigen::VectorXd diag = block.diagonal();
  if (!diag.allFinite() || (diag.array() <= 0.0).any()) return out;
  const Eigen::VectorXd inv_sqrt = diag.array().rsqrt();
  const Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * block * inv_sqrt.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
  if (eig.info() != Eigen::Success) return out;
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return out;
  out.condition = hi / lo;
  if (out.condition > kSingularCondition) return out;
  const Eigen::MatrixXd scaled_inv =
      eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  out.inverse = inv_sqrt.asDiagonal() * scaled_inv * inv_sqrt.asDiagonal();
  out.ok = true;
  return out;
}

}  // namespace

FusionCase fusion_case_from_int(int id) {
  switch (id) {
    case 1:
      return FusionCase::passive_only;
    case 2:
      return FusionCase::fused;
    case 3:
      return FusionCase::bistatic_only;
    default:
      throw ConfigError("fusion case must be 1, 2 or 3, got " + std::to_string(id));
  }
}

int to_int(FusionCase c) { return static_cast<int>(c); }

bool is_symmetric(const FimMatrix& fim, double tolerance) {
  const double scale = std::max(1.0, fim.cwiseAbs().maxCoeff());
  return (fim - fim.transpose()).cwiseAbs().maxCoeff() <= tolerance * scale;
}

bool is_symmetric_psd(const FimMatrix& fim) {
  if (!fim.allFinite() || !is_symmetric(fim)) return false;
  const Eigen::SelfAdjointEigenSolver<FimMatrix> eig(fim);
  return eig.eigenvalues().minCoeff() >= -1e-9 * std::abs(fim.trace());
}

FimMatrix fuse(FusionCase case_id, const FimMatrix& fim_n1, const FimMatrix& fim_n2,
               const FimMatrix& fim_bs) {
  switch (case_id) {
    case FusionCase::passive_only:
      return fim_n1 + fim_n2;
    case FusionCase::fused:
      return fim_n1 + fim_n2 + fim_bs;
    case FusionCase::bistatic_only:
      return fim_bs;
  }
  throw ConfigError("unknown fusion case");
}

std::optional<Eigen::MatrixXd> crlb_matrix(const FimMatrix& fim, FusionCase case_id) {
  const Eigen::MatrixXd block = case_id == FusionCase::passive_only
                                    ? Eigen::MatrixXd(fim.topLeftCorner<2, 2>())
                                    : Eigen::MatrixXd(fim);
  ScaledInverse inv = scaled_inverse(block);
  if (!inv.ok) return std::nullopt;
  return inv.inverse;
}

CrlbResult crlb(const FimMatrix& fim, FusionCase case_id) {
  CrlbResult out;
  out.case_id = case_id;
  const Eigen::MatrixXd block = case_id == FusionCase::passive_only
                                    ? Eigen::MatrixXd(fim.topLeftCorner<2, 2>())
                                    : Eigen::MatrixXd(fim);
  const ScaledInverse inv = scaled_inverse(block);
  out.condition_number = inv.condition;
  if (!inv.ok) return out;

  const double position_variance = inv.inverse(0, 0) + inv.inverse(1, 1);
  if (position_variance >= 0.0 && std::isfinite(position_variance)) {
    out.sqrt_crlb_position = std::sqrt(position_variance);
  }
  if (case_id != FusionCase::passive_only) {
    const double eta_variance = inv.inverse(2, 2);
    if (eta_variance >= 0.0 && std::isfinite(eta_variance)) out.sqrt_crlb_eta = std::sqrt(eta_variance);
  }
  return out;
}

}  // namespace sonarcrlb
