#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "grid.hpp"

namespace dbo {

// Orthonormality tolerance the factored state is expected to satisfy.
inline constexpr double kOrthTol = 1e-8;
// Relative cutoff for the Sigma pseudo-inverse; values below
// kSigmaCutoff * sigma_max invert to zero and floor to the same level.
inline constexpr double kSigmaCutoff = 1e-12;
// Reorthonormalization skips a factor whose drift is already below this.
inline constexpr double kReorthSkip = 1e-13;

// Rank-r factored field Phi ~= U * Sigma * Y^T. U carries the spatial
// modes (orthonormal in the dx-weighted product), Y the species modes
// (Euclidean-orthonormal), Sigma the r x r correlation factor.
struct DboState {
  Grid1D grid;
  Eigen::MatrixXd U;      // N x r
  Eigen::MatrixXd Sigma;  // r x r
  Eigen::MatrixXd Y;      // n_s x r
  double t = 0.0;

  int rank() const { return static_cast<int>(Sigma.rows()); }
  int n_species() const { return static_cast<int>(Y.rows()); }
};

// Skew-symmetric gauge pair (phi, theta). Any choice leaves the
// reconstructed field invariant; zero is the production default.
struct SkewGauge {
  Eigen::MatrixXd phi;
  Eigen::MatrixXd theta;

  static SkewGauge zero(int r);
  // Exact skew-symmetrization (A - A^T)/2 of seeded normal draws.
  static SkewGauge random(int r, std::uint64_t seed);
  bool is_zero() const { return phi.size() == 0 || (phi.isZero(0.0) && theta.isZero(0.0)); }
};

struct CanonicalForm {
  Eigen::MatrixXd U_tilde;      // N x r
  Eigen::VectorXd sigma_tilde;  // r, nonincreasing
  Eigen::MatrixXd Y_tilde;      // n_s x r
  Eigen::MatrixXd R_U, R_Y;     // r x r rotations, Sigma = R_U diag R_Y^T
};

struct DboDeriv {
  Eigen::MatrixXd dU, dSigma, dY;
};

struct InitReport {
  double truncation_error = 0.0;  // sqrt(sum_{i>r} s_i^2) / ||phi0||
  bool rank_deficient = false;
};

struct ReorthReport {
  double drift_u = 0.0;  // ||gram(U,U) - I|| before the pass
  double drift_y = 0.0;
  bool u_factored = false;
  bool y_factored = false;
  bool sigma_floored = false;
};

// Best rank-r start: truncated SVD of phi0 under the dx-weighted product.
// Rank-deficient inputs are accepted; trailing singular values are floored
// and the report flags it.
DboState init_from_field(const Grid1D& grid, const Eigen::MatrixXd& phi0, int r,
                         InitReport* report = nullptr);

// U * Sigma * Y^T, either in full or for a subset of species columns
// (0-based indices). The subset form never touches the other columns.
Eigen::MatrixXd reconstruct(const DboState& s);
Eigen::MatrixXd reconstruct(const DboState& s, const std::vector<int>& species);

// Low-rank species correlation C = Sigma * Sigma^T.
Eigen::MatrixXd low_rank_correlation(const DboState& s);

// SVD pseudo-inverse under the relative cutoff policy.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& sigma);

// Evolution right-hand side. MY = M(Phi) Y and MtU = <M(Phi), U> come from
// the transport model. When mtu_perp is supplied it is used directly as the
// already-projected species driver (I - Y Y^T) MtU; passing the structurally
// assembled projection keeps exact invariants (constant Y under equal
// diffusivities) bit-clean instead of roundoff-clean.
DboDeriv dbo_rhs(const DboState& s, const Eigen::MatrixXd& MY, const Eigen::MatrixXd& MtU,
                 const SkewGauge& gauge, const Eigen::MatrixXd* mtu_perp = nullptr);

// Rotation transport for the gauge-equivalence harness:
// dR_U = R_U phi_b - phi_a R_U, dR_Y = R_Y theta_b - theta_a R_Y.
void gauge_transport_rhs(const Eigen::MatrixXd& R_U, const Eigen::MatrixXd& R_Y,
                         const SkewGauge& gauge_a, const SkewGauge& gauge_b,
                         Eigen::MatrixXd& dR_U, Eigen::MatrixXd& dR_Y);

// QR-based cleanup of both factors with the triangular parts absorbed into
// Sigma; reconstruction-neutral to roundoff. Factors already orthonormal to
// kReorthSkip are left untouched byte for byte.
DboState reorthonormalize(const DboState& s, ReorthReport* report = nullptr);

// Rotation to diagonal Sigma with nonincreasing singular values. Sign
// convention: the largest-magnitude entry of each R_U column is nonnegative.
CanonicalForm canonical_form(const DboState& s);

// || phi_full - U Sigma Y^T ||_F / || phi_full ||_F, column-blocked.
// Throws when the reference norm vanishes.
double relative_error(const DboState& s, const Eigen::MatrixXd& phi_full);

// Frobenius deviation of the factor grams from identity.
double orth_defect_u(const DboState& s);
double orth_defect_y(const DboState& s);

}  // namespace dbo
