#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <string>

namespace dbo {

// Shortest-exact decimal for CSV output: 17 significant digits round-trip
// any double.
std::string format_g17(double x);

// Appendable CSV with a stable header:
//   t, sigma_tilde_1..r, relative_error, orth_U, orth_Y, opt_residual,
//   sigma_condition
// relative_error is nan whenever no reference solution is on hand.
class DiagnosticsWriter {
 public:
  DiagnosticsWriter(std::ostream& out, int r);

  void row(double t, const Eigen::VectorXd& sigma_tilde, double relative_error, double orth_u,
           double orth_y, double opt_residual, double sigma_condition);

 private:
  std::ostream& out_;
  int r_;
};

}  // namespace dbo
