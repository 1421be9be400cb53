#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "lowrank.hpp"

namespace dbo {

// On-disk layout, little-endian always:
//   magic "DBO1" | u32 version, then per record
//     f64 t | u64 N | u64 r | u64 n_s | U (N*r, column-major f64)
//     | Sigma (r*r, row-major f64) | Y (n_s*r, row-major f64)
//   magic "FOM1" | u32 version, then per record
//     f64 t | u64 N | u64 n_s | phi (N*n_s, column-major f64)
// A header with zero records is a valid, empty file.
enum class SnapshotKind { low_rank, full_order };

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct DboRecord {
  double t = 0.0;
  Eigen::MatrixXd U, Sigma, Y;
};

struct FomRecord {
  double t = 0.0;
  Eigen::MatrixXd phi;
};

class SnapshotWriter {
 public:
  SnapshotWriter(const std::string& path, SnapshotKind kind);
  void append(const DboState& s);
  void append(double t, const Eigen::MatrixXd& phi);
  void flush();
  const std::string& path() const { return path_; }

 private:
  std::ofstream out_;
  std::string path_;
  SnapshotKind kind_;
};

class SnapshotReader {
 public:
  struct RecordInfo {
    double t = 0.0;
    std::uint64_t n = 0, r = 0, n_s = 0;
    std::uint64_t payload_offset = 0;
  };

  explicit SnapshotReader(const std::string& path);

  SnapshotKind kind() const { return kind_; }
  std::size_t size() const { return records_.size(); }
  const RecordInfo& info(std::size_t i) const;

  DboRecord read_low_rank(std::size_t i);
  FomRecord read_full_order(std::size_t i);

  // Columns for the requested species (0-based), N x count, regardless of
  // the underlying kind.
  Eigen::MatrixXd reconstruct_species(std::size_t i, const std::vector<int>& species);

 private:
  std::ifstream in_;
  std::string path_;
  SnapshotKind kind_ = SnapshotKind::low_rank;
  std::vector<RecordInfo> records_;
};

}  // namespace dbo
