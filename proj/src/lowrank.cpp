#include "lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "errors.hpp"
#include "rng.hpp"

namespace dbo {

namespace {

void require_valid(const DboState& s) {
  const int r = s.rank();
  if (s.U.rows() != s.grid.n || s.U.cols() != r || s.Sigma.cols() != r || s.Y.cols() != r)
    throw std::invalid_argument("inconsistent factor shapes in low-rank state");
}

// Thin QR with the diagonal of the triangular factor made nonnegative, so
// repeated passes are deterministic no-ops.
void signed_thin_qr(const Eigen::MatrixXd& a, Eigen::MatrixXd& q, Eigen::MatrixXd& t,
                    bool* collapsed) {
  const auto rows = a.rows();
  const auto cols = a.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  t = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (t(j, j) < 0.0) {
      t.row(j) *= -1.0;
      q.col(j) *= -1.0;
    }
    if (collapsed && t(j, j) == 0.0) *collapsed = true;
  }
}

}  // namespace

SkewGauge SkewGauge::zero(int r) {
  return {Eigen::MatrixXd::Zero(r, r), Eigen::MatrixXd::Zero(r, r)};
}

SkewGauge SkewGauge::random(int r, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd a(r, r), b(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) a(i, j) = rng.normal();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) b(i, j) = rng.normal();
  return {0.5 * (a - a.transpose()), 0.5 * (b - b.transpose())};
}

DboState init_from_field(const Grid1D& grid, const Eigen::MatrixXd& phi0, int r,
                         InitReport* report) {
  if (phi0.rows() != grid.n) throw std::invalid_argument("initial field rows != grid size");
  const int n_s = static_cast<int>(phi0.cols());
  if (r < 1 || r > std::min(grid.n, n_s))
    throw std::invalid_argument("rank must satisfy 1 <= r <= min(N, n_s)");
  if (!phi0.allFinite()) throw std::invalid_argument("initial field has non-finite values");

  const double sqw = std::sqrt(grid.dx());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sqw * phi0, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();

  DboState s;
  s.grid = grid;
  s.t = 0.0;
  s.U = svd.matrixU().leftCols(r) / sqw;
  s.Y = svd.matrixV().leftCols(r);

  Eigen::VectorXd kept = sv.head(r);
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double floor_value = kSigmaCutoff * smax;
  bool deficient = false;
  for (int i = 0; i < r; ++i) {
    if (kept(i) < floor_value) {
      kept(i) = floor_value;
      deficient = true;
    }
  }
  s.Sigma = kept.asDiagonal();

  if (report) {
    const double total = sv.squaredNorm();
    const double tail = sv.tail(sv.size() - r).squaredNorm();
    report->truncation_error = total > 0.0 ? std::sqrt(tail / total) : 0.0;
    report->rank_deficient = deficient;
  }
  return s;
}

Eigen::MatrixXd reconstruct(const DboState& s) {
  require_valid(s);
  return s.U * (s.Sigma * s.Y.transpose());
}

Eigen::MatrixXd reconstruct(const DboState& s, const std::vector<int>& species) {
  require_valid(s);
  const int n_s = s.n_species();
  Eigen::MatrixXd y_sub(static_cast<Eigen::Index>(species.size()), s.rank());
  for (std::size_t k = 0; k < species.size(); ++k) {
    const int i = species[k];
    if (i < 0 || i >= n_s) throw std::out_of_range("species index out of range");
    y_sub.row(static_cast<Eigen::Index>(k)) = s.Y.row(i);
  }
  return s.U * (s.Sigma * y_sub.transpose());
}

Eigen::MatrixXd low_rank_correlation(const DboState& s) {
  require_valid(s);
  return s.Sigma * s.Sigma.transpose();
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& sigma) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double cutoff = kSigmaCutoff * smax;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

DboDeriv dbo_rhs(const DboState& s, const Eigen::MatrixXd& MY, const Eigen::MatrixXd& MtU,
                 const SkewGauge& gauge, const Eigen::MatrixXd* mtu_perp) {
  require_valid(s);
  if (MY.rows() != s.grid.n || MY.cols() != s.rank())
    throw std::invalid_argument("MY shape mismatch");
  if (MtU.rows() != s.n_species() || MtU.cols() != s.rank())
    throw std::invalid_argument("MtU shape mismatch");

  const Eigen::MatrixXd sigma_pinv = pseudo_inverse(s.Sigma);
  const Eigen::MatrixXd g_umy = gram(s.grid, s.U, MY);  // <U, MY>, r x r

  DboDeriv d;
  d.dU = (MY - s.U * g_umy) * sigma_pinv;
  d.dSigma = g_umy;

  if (mtu_perp) {
    d.dY = (*mtu_perp) * sigma_pinv.transpose();
  } else {
    const Eigen::MatrixXd projected = MtU - s.Y * (s.Y.transpose() * MtU);
    d.dY = projected * sigma_pinv.transpose();
  }

  if (!gauge.is_zero()) {
    d.dU += s.U * gauge.phi;
    // The gauge terms rotate Sigma consistently with the factor rotations:
    // d(U S Y^T)/dt must not pick up any gauge residue.
    d.dSigma += -gauge.phi * s.Sigma + s.Sigma * gauge.theta;
    d.dY += s.Y * gauge.theta;
  }
  return d;
}

void gauge_transport_rhs(const Eigen::MatrixXd& R_U, const Eigen::MatrixXd& R_Y,
                         const SkewGauge& gauge_a, const SkewGauge& gauge_b,
                         Eigen::MatrixXd& dR_U, Eigen::MatrixXd& dR_Y) {
  dR_U = R_U * gauge_b.phi - gauge_a.phi * R_U;
  dR_Y = R_Y * gauge_b.theta - gauge_a.theta * R_Y;
}

DboState reorthonormalize(const DboState& s, ReorthReport* report) {
  require_valid(s);
  const int r = s.rank();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(r, r);

  ReorthReport rep;
  rep.drift_u = (gram(s.grid, s.U, s.U) - eye).norm();
  rep.drift_y = (s.Y.transpose() * s.Y - eye).norm();

  DboState out = s;
  bool collapsed = false;

  Eigen::MatrixXd t_u = eye, t_y = eye;
  if (rep.drift_u > kReorthSkip) {
    const double sqw = std::sqrt(s.grid.dx());
    Eigen::MatrixXd q;
    signed_thin_qr(sqw * s.U, q, t_u, &collapsed);
    out.U = q / sqw;
    rep.u_factored = true;
  }
  if (rep.drift_y > kReorthSkip) {
    Eigen::MatrixXd q;
    signed_thin_qr(s.Y, q, t_y, &collapsed);
    out.Y = q;
    rep.y_factored = true;
  }
  if (rep.u_factored || rep.y_factored)
    out.Sigma = t_u * s.Sigma * t_y.transpose();

  // Rank collapse shows up as vanishing singular values; floor them so the
  // pseudo-inverse keeps the dynamics finite.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.Sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax > 0.0) {
    const double floor_value = kSigmaCutoff * smax;
    if (collapsed || sv(sv.size() - 1) < floor_value) {
      Eigen::VectorXd lifted = sv.cwiseMax(floor_value);
      out.Sigma = svd.matrixU() * lifted.asDiagonal() * svd.matrixV().transpose();
      rep.sigma_floored = true;
    }
  }

  if (report) *report = rep;
  return out;
}

CanonicalForm canonical_form(const DboState& s) {
  require_valid(s);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.Sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  CanonicalForm c;
  c.R_U = svd.matrixU();
  c.R_Y = svd.matrixV();
  c.sigma_tilde = svd.singularValues();
  // Deterministic output despite SVD sign freedom: make the
  // largest-magnitude entry of each left rotation column nonnegative.
  for (Eigen::Index j = 0; j < c.R_U.cols(); ++j) {
    Eigen::Index imax = 0;
    c.R_U.col(j).cwiseAbs().maxCoeff(&imax);
    if (c.R_U(imax, j) < 0.0) {
      c.R_U.col(j) *= -1.0;
      c.R_Y.col(j) *= -1.0;
    }
  }
  c.U_tilde = s.U * c.R_U;
  c.Y_tilde = s.Y * c.R_Y;
  return c;
}

double relative_error(const DboState& s, const Eigen::MatrixXd& phi_full) {
  require_valid(s);
  if (phi_full.rows() != s.grid.n || phi_full.cols() != s.n_species())
    throw std::invalid_argument("reference field shape mismatch");

  const double ref_norm = frobenius_norm(s.grid, phi_full);
  if (ref_norm == 0.0) throw std::invalid_argument("relative_error: reference field is zero");

  const Eigen::Index block = 256;
  const Eigen::MatrixXd sy_t = s.Sigma * s.Y.transpose();  // r x n_s
  double acc = 0.0;
  for (Eigen::Index j0 = 0; j0 < phi_full.cols(); j0 += block) {
    const Eigen::Index w = std::min(block, phi_full.cols() - j0);
    acc += (s.U * sy_t.middleCols(j0, w) - phi_full.middleCols(j0, w)).squaredNorm();
  }
  return std::sqrt(s.grid.dx() * acc) / ref_norm;
}

double orth_defect_u(const DboState& s) {
  const int r = s.rank();
  return (gram(s.grid, s.U, s.U) - Eigen::MatrixXd::Identity(r, r)).norm();
}

double orth_defect_y(const DboState& s) {
  const int r = s.rank();
  return (s.Y.transpose() * s.Y - Eigen::MatrixXd::Identity(r, r)).norm();
}

}  // namespace dbo
