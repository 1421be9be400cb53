#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "errors.hpp"
#include "fom.hpp"
#include "grid.hpp"
#include "lowrank.hpp"
#include "timeint.hpp"
#include "transport.hpp"

using namespace dbo;

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd randn(int rows, int cols, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = nd(eng);
  return m;
}
}  // namespace

TEST_CASE("fom_rhs: zero model, analytic diffusion column") {
  const Grid1D g(64, 2.0 * kPi);
  const FomState zero{g, Eigen::MatrixXd::Zero(g.n, 3), 0.0};
  CHECK(fom_rhs(zero, {Eigen::VectorXd::Zero(g.n), 0.0}, DiffusivitySpec::constant(0.3, 3),
                nullptr)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // Single species, v = 0, alpha = 1: d/dt sin(x) = -sin(x).
  const Eigen::VectorXd x = g.nodes();
  Eigen::MatrixXd phi(g.n, 1);
  for (int i = 0; i < g.n; ++i) phi(i, 0) = std::sin(x(i));
  const FomState s{g, phi, 0.0};
  const Eigen::MatrixXd d =
      fom_rhs(s, {Eigen::VectorXd::Zero(g.n), 0.0}, DiffusivitySpec::constant(1.0, 1), nullptr);
  CHECK((d + phi).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("full-order step error decays at fourth order") {
  const Grid1D g(64, 2.0 * kPi);
  const int n_s = 4;
  const Eigen::MatrixXd phi0 = species_ic(g, n_s, 2.0, 5);
  const DiffusivitySpec diff = DiffusivitySpec::inverse_sqrt_law(0.02, n_s);
  const auto src = toy_kinetics(0.5);

  auto advance = [&](double dt) {
    CompositeState cs;
    cs.t = 0.0;
    cs.add_block("v", burgers_initial_velocity(g));
    cs.add_block("phi", phi0);
    RhsFn rhs = [&](const CompositeState& c) {
      const VelocityField vel{c.block("v").col(0), 0.02};
      const FomState fs{g, c.block("phi"), c.t};
      CompositeState out;
      out.t = c.t;
      out.add_block("v", burgers_rhs(g, vel));
      out.add_block("phi", fom_rhs(fs, vel, diff, src.get()));
      return out;
    };
    return integrate(std::move(cs), rhs, dt, 0.5, {}).block("phi");
  };

  const Eigen::MatrixXd ref = advance(1.0 / 512.0);
  const double e1 = (advance(1.0 / 32.0) - ref).norm();
  const double e2 = (advance(1.0 / 64.0) - ref).norm();
  CHECK(e1 / e2 > 12.0);  // 16 for a clean fourth-order scheme
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("non-finite source values abort the full-order derivative") {
  struct BadSource final : SourceModel {
    std::string name() const override { return "bad"; }
    void eval(const double*, int n, double* out, const double*, const double*) const override {
      for (int i = 0; i < n; ++i) out[i] = 0.0;
      out[1] = std::numeric_limits<double>::quiet_NaN();
    }
  };
  const Grid1D g(16, 1.0);
  const FomState s{g, Eigen::MatrixXd::Ones(g.n, 3), 0.0};
  const BadSource bad;
  try {
    fom_rhs(s, {Eigen::VectorXd::Zero(g.n), 0.0}, DiffusivitySpec::constant(0.0, 3), &bad);
    CHECK(false);
  } catch (const NumericsError& e) {
    const std::string what = e.what();
    CHECK(what.find("species 1") != std::string::npos);
    CHECK(what.find("grid index") != std::string::npos);
  }
}

TEST_CASE("ipca recovers an exact rank-1 field") {
  const Grid1D g(32, 2.0 * kPi);
  const Eigen::VectorXd x = g.nodes();
  Eigen::VectorXd u(g.n);
  for (int i = 0; i < g.n; ++i) u(i) = std::sin(x(i));
  Eigen::VectorXd y(4);
  y << 2.0, -1.0, 0.5, 0.0;
  const FomState s{g, u * y.transpose(), 0.0};
  const IpcaResult res = ipca(s);

  CHECK(res.singular_values(0) ==
        doctest::Approx(frobenius_norm(g, u) * y.norm()).epsilon(1e-12));
  for (int i = 1; i < res.singular_values.size(); ++i)
    CHECK(res.singular_values(i) < 1e-12 * res.singular_values(0));
  // Leading left mode matches sin up to sign, unit weighted norm.
  CHECK(std::abs(inner_product(g, res.U_hat.col(0), u)) ==
        doctest::Approx(frobenius_norm(g, u)).epsilon(1e-12));
  CHECK(inner_product(g, res.U_hat.col(0), res.U_hat.col(0)) == doctest::Approx(1.0));
}

TEST_CASE("ipca factors are consistent with the weighted correlation eigenproblem") {
  const Grid1D g(48, 2.0 * kPi);
  const int n_s = 7;
  const Eigen::MatrixXd phi = randn(g.n, n_s, 11);
  const FomState s{g, phi, 0.0};
  const IpcaResult res = ipca(s);

  // Orthonormality of both factor sets.
  CHECK((gram(g, res.U_hat, res.U_hat) - Eigen::MatrixXd::Identity(n_s, n_s)).norm() < 1e-12);
  CHECK((res.Y_hat.transpose() * res.Y_hat - Eigen::MatrixXd::Identity(n_s, n_s)).norm() <
        1e-12);

  // Singular values squared = eigenvalues of dx * Phi^T Phi.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.dx() * phi.transpose() * phi);
  Eigen::VectorXd want = eig.eigenvalues().reverse();
  for (int i = 0; i < n_s; ++i)
    CHECK(res.singular_values(i) * res.singular_values(i) ==
          doctest::Approx(want(i)).epsilon(1e-10));

  // Exact reassembly and the energy identity.
  const Eigen::MatrixXd back =
      res.U_hat * res.singular_values.asDiagonal() * res.Y_hat.transpose();
  CHECK((back - phi).norm() < 1e-12 * phi.norm());
  CHECK(res.singular_values.squaredNorm() ==
        doctest::Approx(std::pow(frobenius_norm(g, phi), 2)).epsilon(1e-10));

  // Sign convention matches the canonical factored form.
  for (int k = 0; k < n_s; ++k) {
    int idx;
    res.U_hat.col(k).cwiseAbs().maxCoeff(&idx);
    CHECK(res.U_hat(idx, k) >= 0.0);
  }
}

TEST_CASE("rank-r truncation error is the optimal tail and bounds any factored state") {
  const Grid1D g(48, 2.0 * kPi);
  const int n_s = 6;
  const Eigen::MatrixXd phi = species_ic(g, n_s, 1.5, 17);
  const FomState s{g, phi, 0.0};
  const IpcaResult res = ipca(s);

  for (int r = 1; r <= n_s; ++r) {
    double tail = 0.0;
    for (int i = r; i < n_s; ++i) tail += res.singular_values(i) * res.singular_values(i);
    const double want = std::sqrt(tail) / frobenius_norm(g, phi);
    CHECK(ipca_truncation_error(res, r) == doctest::Approx(want).epsilon(1e-12));

    // Eckart-Young: the truncated reassembly achieves it, nothing beats it.
    const DboState best{g, res.U_hat.leftCols(r),
                        Eigen::MatrixXd(res.singular_values.head(r).asDiagonal()),
                        res.Y_hat.leftCols(r), 0.0};
    CHECK(relative_error(best, phi) == doctest::Approx(want).epsilon(1e-10));
    const DboState other = init_from_field(g, randn(g.n, n_s, 100 + r), r);
    CHECK(relative_error(other, phi) + 1e-12 >= want);
  }
  CHECK(ipca_truncation_error(res, n_s) == 0.0);
  CHECK(ipca_truncation_error(res, 0) == doctest::Approx(1.0));
  CHECK_THROWS(ipca_truncation_error(res, n_s + 1));
}

TEST_CASE("spectrum comparison: exact truncation gives zero gaps and angles") {
  const Grid1D g(48, 2.0 * kPi);
  const int n_s = 6, r = 3;
  const Eigen::MatrixXd phi = species_ic(g, n_s, 1.5, 23);
  const IpcaResult ref = ipca({g, phi, 0.25});

  DboState s{g, ref.U_hat.leftCols(r),
             Eigen::MatrixXd(ref.singular_values.head(r).asDiagonal()), ref.Y_hat.leftCols(r),
             0.25};
  const SpectrumComparison cmp = compare_spectra(s, ref, r, 1.0 / 64.0);
  CHECK(cmp.gaps.size() == r);
  CHECK(cmp.gaps.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(cmp.angles.cwiseAbs().maxCoeff() < 1e-7);

  // The comparison sees through an internal rotation of the factors.
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(randn(r, r, 3)).householderQ() *
      Eigen::MatrixXd::Identity(r, r);
  DboState rotated{g, s.U * q, q.transpose() * s.Sigma, s.Y, 0.25};
  const SpectrumComparison cmp2 = compare_spectra(rotated, ref, r, 1.0 / 64.0);
  CHECK(cmp2.gaps.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(cmp2.angles.cwiseAbs().maxCoeff() < 1e-6);

  // Mismatched time stamps are rejected.
  s.t = 0.25 + 0.5;
  CHECK_THROWS(compare_spectra(s, ref, r, 1.0 / 64.0));
}

TEST_CASE("factored run tracks the leading mode better than the trailing one") {
  // Advect-diffuse a spectrally decaying field for a short horizon, then
  // compare mode-wise against the instantaneous SVD of the full solution.
  const Grid1D g(128, 2.0 * kPi);
  const int n_s = 16, r = 4;
  const Eigen::MatrixXd phi0 = species_ic(g, n_s, 1.0, 42);
  const DiffusivitySpec diff = DiffusivitySpec::inverse_sqrt_law(0.02, n_s);
  const double dt = 1.0 / 256.0, t_end = 0.5;

  CompositeState fom;
  fom.t = 0.0;
  fom.add_block("v", burgers_initial_velocity(g));
  fom.add_block("phi", phi0);
  RhsFn fom_rhs_fn = [&](const CompositeState& c) {
    const VelocityField vel{c.block("v").col(0), 0.02};
    CompositeState out;
    out.t = c.t;
    out.add_block("v", burgers_rhs(g, vel));
    out.add_block("phi", fom_rhs({g, c.block("phi"), c.t}, vel, diff, nullptr));
    return out;
  };
  const CompositeState fom_end = integrate(std::move(fom), fom_rhs_fn, dt, t_end, {});

  const DboState s0 = init_from_field(g, phi0, r);
  CompositeState low;
  low.t = 0.0;
  low.add_block("v", burgers_initial_velocity(g));
  low.add_block("U", s0.U);
  low.add_block("Sigma", s0.Sigma);
  low.add_block("Y", s0.Y);
  const SkewGauge gauge = SkewGauge::zero(r);
  RhsFn dbo_rhs_fn = [&](const CompositeState& c) {
    const VelocityField vel{c.block("v").col(0), 0.02};
    const DboState d{g, c.block("U"), c.block("Sigma"), c.block("Y"), c.t};
    ProjectedRhs pr = project_model_rhs(d, vel, diff, nullptr);
    DboDeriv dd = dbo_rhs(d, pr.MY, pr.MtU, gauge, &pr.MtU_perp);
    CompositeState out;
    out.t = c.t;
    out.add_block("v", burgers_rhs(g, vel));
    out.add_block("U", std::move(dd.dU));
    out.add_block("Sigma", std::move(dd.dSigma));
    out.add_block("Y", std::move(dd.dY));
    return out;
  };
  const CompositeState low_end = integrate(std::move(low), dbo_rhs_fn, dt, t_end, {});

  const IpcaResult ref = ipca({g, fom_end.block("phi"), t_end});
  const DboState sf{g, low_end.block("U"), low_end.block("Sigma"), low_end.block("Y"), t_end};
  const SpectrumComparison cmp = compare_spectra(sf, ref, r, dt);
  CHECK(cmp.gaps(0) < 0.05);          // leading singular value well tracked
  CHECK(cmp.gaps(0) <= cmp.gaps(r - 1) + 1e-12);
  CHECK(relative_error(sf, fom_end.block("phi")) <
        5.0 * ipca_truncation_error(ref, r) + 0.05);
}
