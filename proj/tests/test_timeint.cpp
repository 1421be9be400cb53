#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "timeint.hpp"
#include "transport.hpp"

using namespace dbo;

namespace {
CompositeState scalar_state(double y0) {
  CompositeState s;
  s.t = 0.0;
  s.add_block("y", Eigen::MatrixXd::Constant(1, 1, y0));
  return s;
}

RhsFn decay_rhs() {
  return [](const CompositeState& s) {
    CompositeState d;
    d.t = s.t;
    d.add_block("y", -s.block("y"));
    return d;
  };
}
}  // namespace

TEST_CASE("one RK4 step reproduces the fourth-order Taylor factor") {
  const CompositeState out = rk4_step(scalar_state(1.0), decay_rhs(), 0.1);
  // 1 - h + h^2/2 - h^3/6 + h^4/24 at h = 0.1
  CHECK(out.block("y")(0, 0) == doctest::Approx(0.9048375).epsilon(1e-14));
  CHECK(out.t == doctest::Approx(0.1));
  CHECK_THROWS(rk4_step(scalar_state(1.0), decay_rhs(), 0.0));
  CHECK_THROWS(rk4_step(scalar_state(1.0), decay_rhs(), -0.1));
}

TEST_CASE("a vanishing derivative leaves the state bit-identical") {
  RhsFn zero = [](const CompositeState& s) {
    CompositeState d;
    d.t = s.t;
    d.add_block("y", Eigen::MatrixXd::Zero(3, 2));
    return d;
  };
  CompositeState s;
  s.t = 0.0;
  Eigen::MatrixXd init(3, 2);
  init << 1.0, -2.0, 0.3, 1e-17, 7.0, -0.0;
  s.add_block("y", init);
  const CompositeState out = integrate(std::move(s), zero, 0.25, 25.0, {});
  CHECK((out.block("y").array() == init.array()).all());
  CHECK(out.t == doctest::Approx(25.0));
}

TEST_CASE("observers fire at step zero and at stride multiples") {
  std::vector<long> seen;
  std::vector<double> times;
  Observer obs;
  obs.stride = 16;
  obs.fn = [&](const CompositeState& s, long step) {
    seen.push_back(step);
    times.push_back(s.t);
  };
  integrate(scalar_state(1.0), decay_rhs(), 1.0 / 1024.0, 1.0, {obs});
  REQUIRE(seen.size() == 65);
  CHECK(seen.front() == 0);
  CHECK(seen.back() == 1024);
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i] - seen[i - 1] == 16);
  // Times are pinned to t0 + i dt, not accumulated.
  CHECK(times.back() == 1.0);
  CHECK(times[32] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("two-segment continuation matches the single shot") {
  const CompositeState whole = integrate(scalar_state(1.0), decay_rhs(), 1.0 / 64.0, 2.0, {});
  CompositeState first = integrate(scalar_state(1.0), decay_rhs(), 1.0 / 64.0, 1.25, {});
  const CompositeState rest = integrate(std::move(first), decay_rhs(), 1.0 / 64.0, 2.0, {});
  CHECK(std::abs(rest.block("y")(0, 0) - whole.block("y")(0, 0)) < 1e-13);
  CHECK(rest.t == whole.t);
}

TEST_CASE("observed convergence order sits at four") {
  // Nonlinear scalar problem y' = -y^2 + sin(t), away from integrable cases.
  RhsFn rhs = [](const CompositeState& s) {
    CompositeState d;
    d.t = s.t;
    const double y = s.block("y")(0, 0);
    d.add_block("y", Eigen::MatrixXd::Constant(1, 1, -y * y + std::sin(s.t)));
    return d;
  };
  auto solve = [&](double dt) {
    return integrate(scalar_state(1.0), rhs, dt, 2.0, {}).block("y")(0, 0);
  };
  const double ref = solve(1.0 / 1024.0);
  const double e1 = std::abs(solve(1.0 / 8.0) - ref);
  const double e2 = std::abs(solve(1.0 / 16.0) - ref);
  const double order = std::log2(e1 / e2);
  CHECK(order > 3.7);
  CHECK(order < 4.3);
}

TEST_CASE("non-finite stage derivatives abort with the stage index") {
  RhsFn blowup = [](const CompositeState& s) {
    CompositeState d;
    d.t = s.t;
    // Finite at the initial time, infinite at the midpoint stages.
    const double v = s.t == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    d.add_block("y", Eigen::MatrixXd::Constant(1, 1, v));
    return d;
  };
  try {
    rk4_step(scalar_state(1.0), blowup, 0.5);
    CHECK(false);
  } catch (const NumericsError& e) {
    CHECK(std::string(e.what()).find("stage 2") != std::string::npos);
  }
}

TEST_CASE("observer failures are wrapped with the simulation time") {
  Observer obs;
  obs.stride = 1;
  obs.fn = [](const CompositeState& s, long) {
    if (s.t > 0.4) throw std::runtime_error("disk full");
  };
  try {
    integrate(scalar_state(1.0), decay_rhs(), 0.25, 1.0, {obs});
    CHECK(false);
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("observer failed at t") != std::string::npos);
    CHECK(what.find("disk full") != std::string::npos);
  }
}

TEST_CASE("span validation: non-integer step counts and backward targets") {
  CHECK_THROWS(integrate(scalar_state(1.0), decay_rhs(), 0.3, 1.0, {}));
  CompositeState late = scalar_state(1.0);
  late.t = 2.0;
  CHECK_THROWS(integrate(std::move(late), decay_rhs(), 0.1, 1.0, {}));
  // Zero-length span: no steps, observers still fire once.
  int calls = 0;
  Observer obs;
  obs.stride = 1;
  obs.fn = [&](const CompositeState&, long) { ++calls; };
  CompositeState even = scalar_state(1.0);
  even.t = 1.0;
  integrate(std::move(even), decay_rhs(), 0.1, 1.0, {obs});
  CHECK(calls == 1);
}

TEST_CASE("the post-step hook runs after the combination and before observers") {
  std::vector<double> observed;
  PostStepHook hook = [](CompositeState s) {
    s.block("y")(0, 0) = std::floor(s.block("y")(0, 0) * 100.0) / 100.0;
    return s;
  };
  Observer obs;
  obs.stride = 1;
  obs.fn = [&](const CompositeState& s, long) { observed.push_back(s.block("y")(0, 0)); };
  const CompositeState out = integrate(scalar_state(1.0), decay_rhs(), 0.5, 1.0, {obs}, hook);
  REQUIRE(observed.size() == 3);
  for (std::size_t i = 1; i < observed.size(); ++i)
    CHECK(observed[i] == std::floor(observed[i] * 100.0) / 100.0);
  CHECK(out.block("y")(0, 0) == observed.back());
}

TEST_CASE("halving the step barely moves a coupled transport solution") {
  const Grid1D g(128, 2.0 * M_PI);
  const int n_s = 8;
  const Eigen::MatrixXd phi0 = species_ic(g, n_s, 2.0, 7);
  const DiffusivitySpec diff = DiffusivitySpec::inverse_sqrt_law(0.05, n_s);
  auto advance = [&](double dt) {
    CompositeState s;
    s.t = 0.0;
    s.add_block("v", burgers_initial_velocity(g));
    s.add_block("phi", phi0);
    RhsFn rhs = [&](const CompositeState& c) {
      const VelocityField vel{c.block("v").col(0), 0.02};
      Eigen::MatrixXd d1, d2;
      derivatives(g, c.block("phi"), d1, d2);
      Eigen::MatrixXd dphi = -(d1.array().colwise() * vel.v.array()).matrix();
      for (int j = 0; j < n_s; ++j) dphi.col(j) += diff.alpha(j) * d2.col(j);
      CompositeState out;
      out.t = c.t;
      out.add_block("v", burgers_rhs(g, vel));
      out.add_block("phi", std::move(dphi));
      return out;
    };
    return integrate(std::move(s), rhs, dt, 1.0, {}).block("phi");
  };
  const Eigen::MatrixXd a = advance(1.0 / 128.0);
  const Eigen::MatrixXd b = advance(1.0 / 256.0);
  CHECK((a - b).norm() / b.norm() < 1e-7);
}
