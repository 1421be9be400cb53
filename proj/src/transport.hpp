#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "grid.hpp"
#include "lowrank.hpp"

namespace dbo {

// Per-species diffusivities with an optional space-time scaling g(x,t)
// multiplying all of them. alpha acts as a diagonal matrix on the species
// index.
struct DiffusivitySpec {
  Eigen::VectorXd alpha;                          // n_s entries, all >= 0
  std::function<double(double, double)> scaling;  // g(x, t); empty means 1

  bool has_scaling() const { return static_cast<bool>(scaling); }
  // True when every species shares one diffusivity; the projected diffusion
  // matrix is then exactly alpha * I.
  bool uniform() const;

  static DiffusivitySpec constant(double a, int n_s);
  // alpha_i = c / sqrt(i), i = 1..n_s.
  static DiffusivitySpec inverse_sqrt_law(double c, int n_s);
};

struct VelocityField {
  Eigen::VectorXd v;  // N nodal values at the current time
  double nu = 0.0;
};

// Pointwise reactive source: maps the species vector at one grid point to
// production rates. rho and temperature are optional context, null when the
// model does not carry them.
class SourceModel {
 public:
  virtual ~SourceModel() = default;
  virtual std::string name() const = 0;
  virtual bool is_zero() const { return false; }
  virtual void eval(const double* phi, int n_species, double* out, const double* rho = nullptr,
                    const double* temperature = nullptr) const = 0;

  // Registry: "none" and "toy_abc" are built in.
  static std::unique_ptr<SourceModel> create(const std::string& name, double rate);
};

// Irreversible A + B -> C with rate k on species 0..2; species beyond the
// first three are inert.
std::unique_ptr<SourceModel> toy_kinetics(double rate);

// Projections of the transport operator M(Phi) needed by the factored
// evolution equations. MtU_perp is (I - Y Y^T) MtU assembled term by term:
// the convective part is dropped analytically (it lies in span(Y)), and the
// diffusive part uses diag(alpha) Y - Y alpha_Y, which cancels bit-exactly
// for uniform alpha.
struct ProjectedRhs {
  Eigen::MatrixXd MY;        // N x r
  Eigen::MatrixXd MtU;       // n_s x r
  Eigen::MatrixXd MtU_perp;  // n_s x r
  Eigen::MatrixXd alpha_Y;   // r x r, Y^T diag(alpha) Y
};

// Viscous Burgers right-hand side: -v v_x + nu v_xx.
Eigen::VectorXd burgers_rhs(const Grid1D& g, const VelocityField& vel);

// Benchmark initial velocity: 0.5 (exp(cos x) - 1.5) sin(x + 2 pi 0.37).
Eigen::VectorXd burgers_initial_velocity(const Grid1D& g);

// Random superposition of sine harmonics with spectral decay n^{-b}:
// phi_i(x) = sum_{n=1..n_s} zeta_i^(n) / n^b * sin(n pi x / L), with the
// zeta drawn i.i.d. standard normal from the platform-stable generator.
// Draw order is species-major, so the field is reproducible byte for byte.
Eigen::MatrixXd species_ic(const Grid1D& g, int n_s, double b, std::uint64_t seed);

// Streaming evaluation of M(Phi) Y, <M(Phi), U> and the projected species
// driver. The source is reconstructed one grid block at a time; the full
// N x n_s source matrix is never formed. source may be null (treated as
// zero). source_block controls the streaming block length; results are
// block-size independent up to roundoff.
ProjectedRhs project_model_rhs(const DboState& s, const VelocityField& vel,
                               const DiffusivitySpec& diff, const SourceModel* source,
                               int source_block = 1024);

}  // namespace dbo
