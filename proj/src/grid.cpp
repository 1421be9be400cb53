#include "grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace dbo {

Grid1D::Grid1D(int n_points, double domain_length) : n(n_points), length(domain_length) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("grid size must be even and >= 2");
  if (!(length > 0.0)) throw std::invalid_argument("grid length must be positive");
}

Eigen::VectorXd Grid1D::nodes() const {
  Eigen::VectorXd x(n);
  for (int j = 0; j < n; ++j) x[j] = length * j / n;
  return x;
}

Quasimatrix::Quasimatrix(Grid1D g, Eigen::MatrixXd v) : grid(g), values(std::move(v)) {
  if (values.rows() != grid.n) throw std::invalid_argument("quasimatrix rows != grid size");
}

double inner_product(const Grid1D& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != g.n || v.size() != g.n)
    throw std::invalid_argument("inner_product: size mismatch with grid");
  return g.dx() * u.dot(v);
}

Eigen::MatrixXd gram(const Grid1D& g, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != g.n || b.rows() != g.n)
    throw std::invalid_argument("gram: row count mismatch with grid");
  return g.dx() * (a.transpose() * b);
}

double frobenius_norm(const Grid1D& g, const Eigen::MatrixXd& a) {
  if (a.rows() != g.n) throw std::invalid_argument("frobenius_norm: row count mismatch");
  return std::sqrt(g.dx()) * a.norm();
}

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Per-(n, cols) FFTW workspace. Plans use FFTW_ESTIMATE on purpose: the
// planner is then deterministic, so the same transform always rounds the
// same way. Plan creation is serialized (FFTW requirement); execution on a
// thread-local workspace is safe without locks.
struct FftWorkspace {
  int n = 0;
  int cols = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_complex* spec_work = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  FftWorkspace(int n_, int cols_) : n(n_), cols(cols_) {
    const int nh = n / 2 + 1;
    real = fftw_alloc_real(static_cast<std::size_t>(n) * cols);
    spec = fftw_alloc_complex(static_cast<std::size_t>(nh) * cols);
    spec_work = fftw_alloc_complex(static_cast<std::size_t>(nh) * cols);
    if (!real || !spec || !spec_work) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd = fftw_plan_many_dft_r2c(1, &n, cols, real, nullptr, 1, n, spec, nullptr, 1, nh,
                                 FFTW_ESTIMATE);
    inv = fftw_plan_many_dft_c2r(1, &n, cols, spec_work, nullptr, 1, nh, real, nullptr, 1, n,
                                 FFTW_ESTIMATE);
    if (!fwd || !inv) throw std::runtime_error("fftw plan creation failed");
  }

  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;

  ~FftWorkspace() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
    fftw_free(spec_work);
  }
};

FftWorkspace& workspace_for(int n, int cols) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<FftWorkspace>> cache;
  auto& slot = cache[{n, cols}];
  if (!slot) slot = std::make_unique<FftWorkspace>(n, cols);
  return *slot;
}

enum class DerivOrder { first, second };

// Fills ws.spec_work with the scaled spectrum for the requested derivative,
// including the 1/n normalization of the unnormalized inverse transform.
void scale_spectrum(const FftWorkspace& ws, double length, DerivOrder order) {
  const int nh = ws.n / 2 + 1;
  const double base = 2.0 * std::numbers::pi / length;
  const double norm = 1.0 / ws.n;
  for (int c = 0; c < ws.cols; ++c) {
    const fftw_complex* in = ws.spec + static_cast<std::size_t>(c) * nh;
    fftw_complex* out = ws.spec_work + static_cast<std::size_t>(c) * nh;
    for (int m = 0; m < nh; ++m) {
      const double k = base * m;
      if (order == DerivOrder::first) {
        if (m == ws.n / 2) {
          out[m][0] = 0.0;
          out[m][1] = 0.0;
        } else {
          out[m][0] = -k * in[m][1] * norm;
          out[m][1] = k * in[m][0] * norm;
        }
      } else {
        const double k2 = -k * k * norm;
        out[m][0] = k2 * in[m][0];
        out[m][1] = k2 * in[m][1];
      }
    }
  }
}

void load_and_forward(FftWorkspace& ws, const Eigen::MatrixXd& f) {
  std::memcpy(ws.real, f.data(), sizeof(double) * static_cast<std::size_t>(ws.n) * ws.cols);
  fftw_execute(ws.fwd);
}

void inverse_into(FftWorkspace& ws, Eigen::MatrixXd& out) {
  fftw_execute(ws.inv);
  out.resize(ws.n, ws.cols);
  std::memcpy(out.data(), ws.real, sizeof(double) * static_cast<std::size_t>(ws.n) * ws.cols);
}

void check_shape(const Grid1D& g, const Eigen::MatrixXd& f) {
  if (f.rows() != g.n) throw std::invalid_argument("spectral derivative: rows != grid size");
}

}  // namespace

Eigen::MatrixXd ddx(const Grid1D& g, const Eigen::MatrixXd& f) {
  check_shape(g, f);
  if (f.cols() == 0) return f;
  auto& ws = workspace_for(g.n, static_cast<int>(f.cols()));
  load_and_forward(ws, f);
  scale_spectrum(ws, g.length, DerivOrder::first);
  Eigen::MatrixXd out;
  inverse_into(ws, out);
  return out;
}

Eigen::MatrixXd d2dx2(const Grid1D& g, const Eigen::MatrixXd& f) {
  check_shape(g, f);
  if (f.cols() == 0) return f;
  auto& ws = workspace_for(g.n, static_cast<int>(f.cols()));
  load_and_forward(ws, f);
  scale_spectrum(ws, g.length, DerivOrder::second);
  Eigen::MatrixXd out;
  inverse_into(ws, out);
  return out;
}

void derivatives(const Grid1D& g, const Eigen::MatrixXd& f, Eigen::MatrixXd& d1,
                 Eigen::MatrixXd& d2) {
  check_shape(g, f);
  if (f.cols() == 0) {
    d1 = f;
    d2 = f;
    return;
  }
  auto& ws = workspace_for(g.n, static_cast<int>(f.cols()));
  load_and_forward(ws, f);
  scale_spectrum(ws, g.length, DerivOrder::first);
  inverse_into(ws, d1);
  scale_spectrum(ws, g.length, DerivOrder::second);
  inverse_into(ws, d2);
}

void dealias_two_thirds(const Grid1D& g, Eigen::MatrixXd& f) {
  check_shape(g, f);
  if (f.cols() == 0) return;
  auto& ws = workspace_for(g.n, static_cast<int>(f.cols()));
  load_and_forward(ws, f);
  const int nh = g.n / 2 + 1;
  const int cutoff = g.n / 3;  // keep |m| <= n/3
  const double norm = 1.0 / g.n;
  for (int c = 0; c < ws.cols; ++c) {
    const fftw_complex* in = ws.spec + static_cast<std::size_t>(c) * nh;
    fftw_complex* out = ws.spec_work + static_cast<std::size_t>(c) * nh;
    for (int m = 0; m < nh; ++m) {
      const double keep = m <= cutoff ? norm : 0.0;
      out[m][0] = in[m][0] * keep;
      out[m][1] = in[m][1] * keep;
    }
  }
  inverse_into(ws, f);
}

}  // namespace dbo
