#include "diagnostics.hpp"

#include <cstdio>
#include <stdexcept>

namespace dbo {

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

DiagnosticsWriter::DiagnosticsWriter(std::ostream& out, int r) : out_(out), r_(r) {
  if (r < 1) throw std::invalid_argument("diagnostics rank must be >= 1");
  out_ << "t";
  for (int i = 1; i <= r_; ++i) out_ << ",sigma_tilde_" << i;
  out_ << ",relative_error,orth_U,orth_Y,opt_residual,sigma_condition\n";
  if (!out_) throw std::runtime_error("diagnostics stream write failed");
}

void DiagnosticsWriter::row(double t, const Eigen::VectorXd& sigma_tilde, double relative_error,
                            double orth_u, double orth_y, double opt_residual,
                            double sigma_condition) {
  if (sigma_tilde.size() != r_)
    throw std::invalid_argument("diagnostics row has wrong singular value count");
  out_ << format_g17(t);
  for (int i = 0; i < r_; ++i) out_ << ',' << format_g17(sigma_tilde(i));
  out_ << ',' << format_g17(relative_error) << ',' << format_g17(orth_u) << ','
       << format_g17(orth_y) << ',' << format_g17(opt_residual) << ','
       << format_g17(sigma_condition) << '\n';
  if (!out_) throw std::runtime_error("diagnostics stream write failed");
}

}  // namespace dbo
