#pragma once

#include <Eigen/Dense>

namespace dbo {

// Uniform periodic grid on [0, length): x_j = j * length / n, j = 0..n-1.
// n must be even so the real FFT has a well-defined Nyquist mode.
struct Grid1D {
  int n = 0;
  double length = 0.0;

  Grid1D() = default;
  Grid1D(int n_points, double domain_length);

  double dx() const { return length / n; }
  Eigen::VectorXd nodes() const;

  bool operator==(const Grid1D&) const = default;
};

// An N x k nodal field: k columns sampled on a shared grid. The discrete
// stand-in for a function-valued matrix whose first index is continuous.
struct Quasimatrix {
  Grid1D grid;
  Eigen::MatrixXd values;

  Quasimatrix() = default;
  Quasimatrix(Grid1D g, Eigen::MatrixXd v);

  int cols() const { return static_cast<int>(values.cols()); }
  int rows() const { return static_cast<int>(values.rows()); }
};

// Weighted L2 pairing: dx * sum_j u_j v_j (rectangle rule, spectrally exact
// for resolved periodic integrands).
double inner_product(const Grid1D& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// gram(A, B)_{ij} = <a_i, b_j>; m x n for A: N x m, B: N x n.
Eigen::MatrixXd gram(const Grid1D& g, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

double frobenius_norm(const Grid1D& g, const Eigen::MatrixXd& a);

// Fourier-spectral derivatives, column by column. ddx zeroes the Nyquist
// mode (its derivative is not representable on the grid); d2dx2 keeps it.
Eigen::MatrixXd ddx(const Grid1D& g, const Eigen::MatrixXd& f);
Eigen::MatrixXd d2dx2(const Grid1D& g, const Eigen::MatrixXd& f);

// Both derivatives from a single forward transform.
void derivatives(const Grid1D& g, const Eigen::MatrixXd& f, Eigen::MatrixXd& d1,
                 Eigen::MatrixXd& d2);

// 2/3-rule truncation, in place. Not applied anywhere by default; available
// for robustness studies on marginally resolved runs.
void dealias_two_thirds(const Grid1D& g, Eigen::MatrixXd& f);

inline double inner_product(const Quasimatrix& u, const Quasimatrix& v) {
  return inner_product(u.grid, u.values.col(0), v.values.col(0));
}
inline Eigen::MatrixXd gram(const Quasimatrix& a, const Quasimatrix& b) {
  return gram(a.grid, a.values, b.values);
}
inline double frobenius_norm(const Quasimatrix& a) { return frobenius_norm(a.grid, a.values); }
inline Quasimatrix ddx(const Quasimatrix& f) { return {f.grid, ddx(f.grid, f.values)}; }
inline Quasimatrix d2dx2(const Quasimatrix& f) { return {f.grid, d2dx2(f.grid, f.values)}; }

}  // namespace dbo
