#include "transport.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace dbo {

bool DiffusivitySpec::uniform() const {
  if (alpha.size() == 0) return false;
  return (alpha.array() == alpha(0)).all();
}

DiffusivitySpec DiffusivitySpec::constant(double a, int n_s) {
  if (a < 0.0) throw std::invalid_argument("diffusivity must be nonnegative");
  DiffusivitySpec d;
  d.alpha = Eigen::VectorXd::Constant(n_s, a);
  return d;
}

DiffusivitySpec DiffusivitySpec::inverse_sqrt_law(double c, int n_s) {
  if (c < 0.0) throw std::invalid_argument("diffusivity coefficient must be nonnegative");
  DiffusivitySpec d;
  d.alpha.resize(n_s);
  for (int i = 0; i < n_s; ++i) d.alpha(i) = c / std::sqrt(static_cast<double>(i + 1));
  return d;
}

namespace {

class ZeroSource final : public SourceModel {
 public:
  std::string name() const override { return "none"; }
  bool is_zero() const override { return true; }
  void eval(const double*, int n_species, double* out, const double*,
            const double*) const override {
    for (int i = 0; i < n_species; ++i) out[i] = 0.0;
  }
};

class ToyKinetics final : public SourceModel {
 public:
  explicit ToyKinetics(double rate) : rate_(rate) {}
  std::string name() const override { return "toy_abc"; }
  void eval(const double* phi, int n_species, double* out, const double*,
            const double*) const override {
    for (int i = 0; i < n_species; ++i) out[i] = 0.0;
    if (n_species < 3) throw std::invalid_argument("toy_abc needs at least 3 species");
    const double reaction = rate_ * phi[0] * phi[1];
    out[0] = -reaction;
    out[1] = -reaction;
    out[2] = reaction;
  }

 private:
  double rate_;
};

}  // namespace

std::unique_ptr<SourceModel> SourceModel::create(const std::string& name, double rate) {
  if (name == "none") return std::make_unique<ZeroSource>();
  if (name == "toy_abc") return std::make_unique<ToyKinetics>(rate);
  throw std::invalid_argument("unknown source model: " + name);
}

std::unique_ptr<SourceModel> toy_kinetics(double rate) {
  return std::make_unique<ToyKinetics>(rate);
}

Eigen::VectorXd burgers_rhs(const Grid1D& g, const VelocityField& vel) {
  if (vel.v.size() != g.n) throw std::invalid_argument("velocity size mismatch");
  Eigen::MatrixXd d1, d2;
  derivatives(g, vel.v, d1, d2);
  return (-vel.v.array() * d1.col(0).array() + vel.nu * d2.col(0).array()).matrix();
}

Eigen::VectorXd burgers_initial_velocity(const Grid1D& g) {
  const Eigen::VectorXd x = g.nodes();
  Eigen::VectorXd v(g.n);
  const double shift = 2.0 * std::numbers::pi * 0.37;
  for (int j = 0; j < g.n; ++j)
    v(j) = 0.5 * (std::exp(std::cos(x(j))) - 1.5) * std::sin(x(j) + shift);
  return v;
}

Eigen::MatrixXd species_ic(const Grid1D& g, int n_s, double b, std::uint64_t seed) {
  if (n_s < 1) throw std::invalid_argument("species count must be positive");
  if (!(b > 0.0)) throw std::invalid_argument("spectral decay exponent must be positive");

  const Eigen::VectorXd x = g.nodes();
  Eigen::MatrixXd harmonics(g.n, n_s);
  for (int n = 1; n <= n_s; ++n) {
    const double k = n * std::numbers::pi / g.length;
    for (int j = 0; j < g.n; ++j) harmonics(j, n - 1) = std::sin(k * x(j));
  }

  Rng rng(seed);
  Eigen::MatrixXd coeff(n_s, n_s);  // (harmonic, species)
  for (int i = 0; i < n_s; ++i)
    for (int n = 1; n <= n_s; ++n)
      coeff(n - 1, i) = rng.normal() / std::pow(static_cast<double>(n), b);

  return harmonics * coeff;
}

ProjectedRhs project_model_rhs(const DboState& s, const VelocityField& vel,
                               const DiffusivitySpec& diff, const SourceModel* source,
                               int source_block) {
  const Grid1D& g = s.grid;
  const int r = s.rank();
  const int n_s = s.n_species();
  if (vel.v.size() != g.n) throw std::invalid_argument("velocity grid mismatch");
  if (diff.alpha.size() != n_s) throw std::invalid_argument("diffusivity count mismatch");
  if (diff.alpha.size() > 0 && diff.alpha.minCoeff() < 0.0)
    throw std::invalid_argument("diffusivities must be nonnegative");
  if (source_block < 1) source_block = 1;

  Eigen::MatrixXd Ux, Uxx;
  derivatives(g, s.U, Ux, Uxx);

  ProjectedRhs out;
  const bool uniform_alpha = diff.uniform();
  if (uniform_alpha)
    out.alpha_Y = diff.alpha(0) * Eigen::MatrixXd::Identity(r, r);
  else
    out.alpha_Y = s.Y.transpose() * diff.alpha.asDiagonal() * s.Y;

  Eigen::VectorXd gvec;
  const bool scaled = diff.has_scaling();
  if (scaled) {
    const Eigen::VectorXd x = g.nodes();
    gvec.resize(g.n);
    for (int j = 0; j < g.n; ++j) gvec(j) = diff.scaling(x(j), s.t);
  }

  // M(Phi) Y: convection, then the projected diffusion as r field
  // Laplacians of U (Sigma alpha_Y).
  out.MY = -(vel.v.asDiagonal() * (Ux * s.Sigma));
  Eigen::MatrixXd diffusion_my = d2dx2(g, s.U * (s.Sigma * out.alpha_Y));
  if (scaled) diffusion_my = gvec.asDiagonal() * diffusion_my;
  out.MY += diffusion_my;

  // <M(Phi), U>: both grams are r x r; the species dimension enters only
  // through Y and diag(alpha).
  const Eigen::MatrixXd vUx = vel.v.asDiagonal() * Ux;
  const Eigen::MatrixXd gram_conv = gram(g, vUx, s.U);
  const Eigen::MatrixXd scaled_uxx = scaled ? (gvec.asDiagonal() * Uxx).eval() : Uxx;
  const Eigen::MatrixXd gram_diff = gram(g, scaled_uxx, s.U);
  const Eigen::MatrixXd st_gc = s.Sigma.transpose() * gram_conv;
  const Eigen::MatrixXd st_gd = s.Sigma.transpose() * gram_diff;
  out.MtU = -s.Y * st_gc + diff.alpha.asDiagonal() * (s.Y * st_gd);

  // Projected species driver. The convective term is Y (Sigma^T gram_conv),
  // which the projector annihilates identically, so it is never formed. For
  // uniform alpha the diffusive bracket is exactly zero as well.
  if (uniform_alpha) {
    out.MtU_perp = Eigen::MatrixXd::Zero(n_s, r);
  } else {
    const Eigen::MatrixXd bracket = diff.alpha.asDiagonal() * s.Y - s.Y * out.alpha_Y;
    out.MtU_perp = bracket * st_gd;
  }

  if (source && !source->is_zero()) {
    const double dx = g.dx();
    Eigen::MatrixXd SY(g.n, r);
    const std::size_t block = static_cast<std::size_t>(source_block);
    const std::size_t n_blocks = (static_cast<std::size_t>(g.n) + block - 1) / block;
    std::vector<Eigen::MatrixXd> partial(n_blocks);

    parallel_for_blocked(static_cast<std::size_t>(g.n), block,
                         [&](std::size_t bi, std::size_t lo, std::size_t hi) {
      Eigen::VectorXd phi_pt(n_s), s_pt(n_s);
      Eigen::RowVectorXd w(r);
      Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n_s, r);
      for (std::size_t j = lo; j < hi; ++j) {
        const Eigen::Index jj = static_cast<Eigen::Index>(j);
        w.noalias() = s.U.row(jj) * s.Sigma;
        phi_pt.noalias() = s.Y * w.transpose();
        source->eval(phi_pt.data(), n_s, s_pt.data());
        if (!s_pt.allFinite())
          throw NumericsError("source model returned non-finite values at grid index " +
                              std::to_string(j));
        SY.row(jj).noalias() = s_pt.transpose() * s.Y;
        local.noalias() += s_pt * (dx * s.U.row(jj));
      }
      partial[bi] = std::move(local);
    });

    Eigen::MatrixXd StU = Eigen::MatrixXd::Zero(n_s, r);
    for (std::size_t bi = 0; bi < n_blocks; ++bi) StU += partial[bi];

    out.MY += SY;
    out.MtU += StU;
    out.MtU_perp += StU - s.Y * (s.Y.transpose() * StU);
  }

  return out;
}

}  // namespace dbo
