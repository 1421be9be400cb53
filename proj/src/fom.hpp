#pragma once

#include <Eigen/Dense>

#include "grid.hpp"
#include "lowrank.hpp"
#include "transport.hpp"

namespace dbo {

// Full-order species field: every column evolved directly. Ground truth
// for the factored runs.
struct FomState {
  Grid1D grid;
  Eigen::MatrixXd phi;  // N x n_s
  double t = 0.0;

  int n_species() const { return static_cast<int>(phi.cols()); }
};

// Instantaneous SVD of the field under the dx-weighted product. Factors are
// thin (min(N, n_s) columns); singular values cover the whole spectrum.
struct IpcaResult {
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd U_hat;  // N x k, orthonormal under gram
  Eigen::MatrixXd Y_hat;  // n_s x k
  double t = 0.0;
};

struct SpectrumComparison {
  Eigen::VectorXd gaps;    // |sigma_tilde_i - sigma_hat_i| / sigma_hat_i, i = 1..r
  Eigen::VectorXd angles;  // principal angles between the leading-r subspaces
};

// Column i: -v phi_i,x + alpha_i g(x,t) phi_i,xx + S_i(Phi). source may be
// null (zero).
Eigen::MatrixXd fom_rhs(const FomState& s, const VelocityField& vel, const DiffusivitySpec& diff,
                        const SourceModel* source);

IpcaResult ipca(const FomState& s);

// Best-possible relative error of a rank-r truncation:
// sqrt(sum_{i>r} sigma_i^2) / ||phi||.
double ipca_truncation_error(const IpcaResult& res, int r);

// Per-mode relative spectrum gaps plus principal angles for the leading r
// modes. step is the run's dt; time stamps further apart than one step are
// rejected.
SpectrumComparison compare_spectra(const DboState& dbo, const IpcaResult& ref, int r,
                                   double step);

}  // namespace dbo
