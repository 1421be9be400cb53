#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace dbo {

// Flat key = value sections in plain text. Unset keys keep the benchmark
// defaults below, so an empty file runs the reference configuration:
// N=512 on [0, 2pi), dt=1/256 to t=4, viscous Burgers velocity (nu=0.01),
// 1000 species with spectral-decay initial data (b=2) and
// alpha_i = 0.01/sqrt(i), source off, rank 8, gauge zero.
struct RunConfig {
  // [grid]
  int n = 512;
  double length = 6.283185307179586476925;
  // [time]
  double dt = 1.0 / 256.0;
  double t_final = 4.0;
  int output_stride = 16;
  int ipca_stride = 16;
  // [model]
  std::string velocity = "burgers";  // burgers | zero
  double nu = 0.01;
  std::string alpha_law = "c/sqrt(i)";  // c/sqrt(i) | list
  double alpha_c = 0.01;
  std::vector<double> alpha_list;
  std::string source = "none";  // none | toy_abc
  double source_k = 1.0;
  // [species]
  int n_s = 1000;
  double ic_b = 2.0;
  std::uint64_t ic_seed = 4;
  // [reduction]
  int r = 8;
  std::string gauge = "zero";  // zero | random
  std::uint64_t gauge_seed = 1;
  // [outputs]
  std::string directory = "out";
  bool snapshots = true;
  bool diagnostics = true;
  std::string restart;  // optional snapshot to resume from

  static RunConfig defaults() { return {}; }
  // Parse + validate. Throws ConfigError with the offending line number.
  static RunConfig load(const std::string& path);
  static RunConfig parse_text(const std::string& text);

  // Single-key override using the section.key spelling, e.g.
  // "species.ic_seed". Value grammar matches the file format.
  void set(const std::string& dotted_key, const std::string& value);

  // Cross-field checks; parse errors are caught per line, these are the
  // rest. Throws ConfigError.
  void validate() const;

  // Canonical echo of the resolved configuration; parses back to an equal
  // config.
  std::string resolved_text() const;

  // The per-species diffusivities the law resolves to.
  Eigen::VectorXd alphas() const;
};

}  // namespace dbo
