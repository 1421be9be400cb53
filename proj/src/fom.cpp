#include "fom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "errors.hpp"

namespace dbo {

Eigen::MatrixXd fom_rhs(const FomState& s, const VelocityField& vel, const DiffusivitySpec& diff,
                        const SourceModel* source) {
  const Grid1D& g = s.grid;
  const int n_s = s.n_species();
  if (s.phi.rows() != g.n) throw std::invalid_argument("field rows != grid size");
  if (vel.v.size() != g.n) throw std::invalid_argument("velocity grid mismatch");
  if (diff.alpha.size() != n_s) throw std::invalid_argument("diffusivity count mismatch");

  Eigen::MatrixXd px, pxx;
  derivatives(g, s.phi, px, pxx);

  Eigen::MatrixXd rhs = -(vel.v.asDiagonal() * px);
  if (diff.has_scaling()) {
    const Eigen::VectorXd x = g.nodes();
    Eigen::VectorXd gvec(g.n);
    for (int j = 0; j < g.n; ++j) gvec(j) = diff.scaling(x(j), s.t);
    rhs += gvec.asDiagonal() * (pxx * diff.alpha.asDiagonal());
  } else {
    rhs += pxx * diff.alpha.asDiagonal();
  }

  if (source && !source->is_zero()) {
    Eigen::VectorXd s_pt(n_s), phi_pt(n_s);
    for (int j = 0; j < g.n; ++j) {
      phi_pt = s.phi.row(j);
      source->eval(phi_pt.data(), n_s, s_pt.data());
      rhs.row(j) += s_pt;
    }
  }

  if (!rhs.allFinite()) {
    for (int i = 0; i < n_s; ++i) {
      for (int j = 0; j < g.n; ++j) {
        if (!std::isfinite(rhs(j, i)))
          throw NumericsError("non-finite transport value for species " + std::to_string(i) +
                              " at grid index " + std::to_string(j));
      }
    }
  }
  return rhs;
}

IpcaResult ipca(const FomState& s) {
  if (s.phi.rows() != s.grid.n) throw std::invalid_argument("field rows != grid size");
  if (!s.phi.allFinite()) throw std::invalid_argument("field has non-finite values");

  const double sqw = std::sqrt(s.grid.dx());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sqw * s.phi, Eigen::ComputeThinU | Eigen::ComputeThinV);

  IpcaResult res;
  res.t = s.t;
  res.singular_values = svd.singularValues();
  res.U_hat = svd.matrixU() / sqw;
  res.Y_hat = svd.matrixV();

  // Deterministic signs, matching the canonical-form convention: the
  // largest-magnitude entry of each spatial mode points up.
  for (Eigen::Index j = 0; j < res.U_hat.cols(); ++j) {
    Eigen::Index imax = 0;
    res.U_hat.col(j).cwiseAbs().maxCoeff(&imax);
    if (res.U_hat(imax, j) < 0.0) {
      res.U_hat.col(j) *= -1.0;
      res.Y_hat.col(j) *= -1.0;
    }
  }
  return res;
}

double ipca_truncation_error(const IpcaResult& res, int r) {
  const Eigen::Index k = res.singular_values.size();
  if (r < 0 || r > k) throw std::invalid_argument("truncation rank out of range");
  const double total = res.singular_values.squaredNorm();
  if (total == 0.0) return 0.0;
  const double tail = res.singular_values.tail(k - r).squaredNorm();
  return std::sqrt(tail / total);
}

SpectrumComparison compare_spectra(const DboState& dbo, const IpcaResult& ref, int r,
                                   double step) {
  if (r < 1 || r > dbo.rank() || r > ref.singular_values.size())
    throw std::invalid_argument("comparison rank out of range");
  if (std::abs(dbo.t - ref.t) > step * (1.0 + 1e-9))
    throw std::invalid_argument("time stamps differ by more than one step");

  const CanonicalForm canon = canonical_form(dbo);

  SpectrumComparison cmp;
  cmp.gaps.resize(r);
  for (int i = 0; i < r; ++i) {
    const double hat = ref.singular_values(i);
    const double diff = std::abs(canon.sigma_tilde(i) - hat);
    cmp.gaps(i) = hat > 0.0 ? diff / hat : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  }

  const Eigen::MatrixXd overlap =
      gram(dbo.grid, canon.U_tilde.leftCols(r), ref.U_hat.leftCols(r));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(overlap);
  cmp.angles.resize(r);
  for (int i = 0; i < r; ++i) {
    const double c = std::clamp(svd.singularValues()(i), 0.0, 1.0);
    cmp.angles(i) = std::acos(c);
  }
  return cmp;
}

}  // namespace dbo
