#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace dbo {

// Ordered, named matrix blocks: the one state shape the stepper knows.
// A velocity field is one N x 1 block; a factored run is four blocks
// (v, U, Sigma, Y); a full-order run is two (v, phi). Derivatives reuse the
// same type with matching block layout.
struct CompositeState {
  double t = 0.0;
  std::vector<std::string> names;
  std::vector<Eigen::MatrixXd> blocks;

  void add_block(std::string name, Eigen::MatrixXd value) {
    names.push_back(std::move(name));
    blocks.push_back(std::move(value));
  }

  Eigen::MatrixXd& block(const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return blocks[i];
    throw std::invalid_argument("no state block named " + name);
  }
  const Eigen::MatrixXd& block(const std::string& name) const {
    return const_cast<CompositeState*>(this)->block(name);
  }

  bool all_finite() const {
    for (const auto& b : blocks)
      if (!b.allFinite()) return false;
    return true;
  }

  void check_layout(const CompositeState& other) const {
    if (other.blocks.size() != blocks.size())
      throw std::invalid_argument("composite state block count mismatch");
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (blocks[i].rows() != other.blocks[i].rows() || blocks[i].cols() != other.blocks[i].cols())
        throw std::invalid_argument("composite state block shape mismatch");
  }

  // this + c * d, blockwise; the caller sets the new time.
  CompositeState plus_scaled(const CompositeState& d, double c) const {
    check_layout(d);
    CompositeState out = *this;
    for (std::size_t i = 0; i < blocks.size(); ++i) out.blocks[i] += c * d.blocks[i];
    return out;
  }

  void axpy(double c, const CompositeState& d) {
    check_layout(d);
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] += c * d.blocks[i];
  }
};

using RhsFn = std::function<CompositeState(const CompositeState&)>;

// One classical RK4 step. Every stage derivative is checked for finite
// values; blowups abort with the stage index rather than propagating NaNs.
inline CompositeState rk4_step(const CompositeState& s, const RhsFn& rhs, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");

  auto stage = [&](const CompositeState& at, int index) {
    CompositeState k = rhs(at);
    if (!k.all_finite())
      throw NumericsError("non-finite derivative in RK4 stage " + std::to_string(index) +
                          " at t = " + std::to_string(at.t));
    return k;
  };

  const CompositeState k1 = stage(s, 1);
  CompositeState mid = s.plus_scaled(k1, 0.5 * dt);
  mid.t = s.t + 0.5 * dt;
  const CompositeState k2 = stage(mid, 2);
  mid = s.plus_scaled(k2, 0.5 * dt);
  mid.t = s.t + 0.5 * dt;
  const CompositeState k3 = stage(mid, 3);
  mid = s.plus_scaled(k3, dt);
  mid.t = s.t + dt;
  const CompositeState k4 = stage(mid, 4);

  CompositeState out = s;
  out.axpy(dt / 6.0, k1);
  out.axpy(dt / 3.0, k2);
  out.axpy(dt / 3.0, k3);
  out.axpy(dt / 6.0, k4);
  out.t = s.t + dt;
  return out;
}

struct Observer {
  long stride = 1;
  std::function<void(const CompositeState&, long step)> fn;
};

// Applied after the full RK4 combination, never between stages, so the
// stepper's order on the reconstruction is untouched.
using PostStepHook = std::function<CompositeState(CompositeState)>;

// Fixed-step march from s0.t to t_final. Observers fire at step 0 and then
// at every multiple of their stride; the hook runs before the observers see
// the state. Times are pinned to t0 + i * dt, not accumulated.
inline CompositeState integrate(CompositeState s0, const RhsFn& rhs, double dt, double t_final,
                                const std::vector<Observer>& observers,
                                const PostStepHook& hook = {}) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  const double t0 = s0.t;
  const double span = t_final - t0;
  if (span < -1e-12) throw std::invalid_argument("t_final precedes the initial time");

  const long steps = std::lround(span / dt);
  if (std::abs(steps * dt - span) > 1e-9 * std::max(1.0, std::abs(span)))
    throw std::invalid_argument("(t_final - t0) is not an integer number of steps");

  auto observe = [&](const CompositeState& s, long step) {
    for (const auto& obs : observers) {
      if (!obs.fn || obs.stride < 1 || step % obs.stride != 0) continue;
      try {
        obs.fn(s, step);
      } catch (const std::exception& e) {
        throw std::runtime_error("observer failed at t = " + std::to_string(s.t) + ": " +
                                 e.what());
      }
    }
  };

  observe(s0, 0);
  CompositeState s = std::move(s0);
  for (long i = 1; i <= steps; ++i) {
    s = rk4_step(s, rhs, dt);
    s.t = t0 + static_cast<double>(i) * dt;
    if (hook) s = hook(std::move(s));
    observe(s, i);
  }
  return s;
}

}  // namespace dbo
