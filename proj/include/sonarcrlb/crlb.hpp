#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

namespace sonarcrlb {

/// 3 x 3 Fisher information over theta = [x, y, eta].
using FimMatrix = Eigen::Matrix3d;

enum class FusionCase {
  passive_only = 1,   // I_n1 + I_n2
  fused = 2,          // I_n1 + I_n2 + I_bs
  bistatic_only = 3,  // I_bs
};

FusionCase fusion_case_from_int(int id);
int to_int(FusionCase c);

/// Fused FIMs whose Jacobi-scaled condition number exceeds this are reported singular.
inline constexpr double kSingularCondition = 1e12;

bool is_symmetric(const FimMatrix& fim, double tolerance = 1e-12);

/// Symmetric to 1e-12 (relative to the largest entry) with eigenvalues >= -1e-9 trace.
bool is_symmetric_psd(const FimMatrix& fim);

FimMatrix fuse(FusionCase case_id, const FimMatrix& fim_n1, const FimMatrix& fim_n2,
               const FimMatrix& fim_bs);

/// sqrt(CRLB) for position and Doppler scale. Empty optionals mark singular fields.
struct CrlbResult {
  std::optional<double> sqrt_crlb_position;
  std::optional<double> sqrt_crlb_eta;
  FusionCase case_id = FusionCase::fused;
  double condition_number = 0.0;

  bool position_singular() const { return !sqrt_crlb_position.has_value(); }
  bool eta_singular() const { return !sqrt_crlb_eta.has_value(); }
};

/// Inverts the FIM and extracts sqrt(tr of the position block) and sqrt([I^-1]_33).
/// Case 1 carries no eta information, so only the 2 x 2 position block is inverted and
/// eta is always reported singular. The condition number is that of the
/// diagonally scaled matrix D^-1/2 I D^-1/2, which does not depend on parameter units.
CrlbResult crlb(const FimMatrix& fim, FusionCase case_id);

/// Full CRLB matrix (inverse of the informative block) or nullopt when singular.
/// For case 1 the result is 2 x 2.
std::optional<Eigen::MatrixXd> crlb_matrix(const FimMatrix& fim, FusionCase case_id);

}  // namespace sonarcrlb
