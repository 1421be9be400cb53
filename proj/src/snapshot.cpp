#include "snapshot.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace dbo {

namespace {

constexpr char kMagicDbo[4] = {'D', 'B', 'O', '1'};
constexpr char kMagicFom[4] = {'F', 'O', 'M', '1'};

static_assert(sizeof(double) == 8);

template <class T>
void byteswap_inplace(T& v) {
  auto* p = reinterpret_cast<unsigned char*>(&v);
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(p[i], p[sizeof(T) - 1 - i]);
}

constexpr bool kNativeLittle = std::endian::native == std::endian::little;

void write_u32(std::ostream& out, std::uint32_t v) {
  if constexpr (!kNativeLittle) byteswap_inplace(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  if constexpr (!kNativeLittle) byteswap_inplace(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_f64(std::ostream& out, double x) {
  auto v = std::bit_cast<std::uint64_t>(x);
  write_u64(out, v);
}

void write_f64_array(std::ostream& out, const double* p, std::uint64_t count) {
  if constexpr (kNativeLittle) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * 8));
  } else {
    for (std::uint64_t i = 0; i < count; ++i) write_f64(out, p[i]);
  }
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if constexpr (!kNativeLittle) byteswap_inplace(v);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if constexpr (!kNativeLittle) byteswap_inplace(v);
  return v;
}

double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

void read_f64_array(std::istream& in, double* p, std::uint64_t count) {
  if constexpr (kNativeLittle) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * 8));
  } else {
    for (std::uint64_t i = 0; i < count; ++i) p[i] = read_f64(in);
  }
}

[[noreturn]] void corrupt(const std::string& path, const std::string& why) {
  throw std::runtime_error("snapshot file " + path + ": " + why);
}

// Guard against absurd headers before any allocation.
void check_dims(const std::string& path, std::uint64_t a, std::uint64_t b) {
  constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 31;
  if (a == 0 || b == 0 || a >= kMaxDim || b >= kMaxDim || a * b > (std::uint64_t{1} << 34))
    corrupt(path, "implausible record dimensions");
}

}  // namespace

SnapshotWriter::SnapshotWriter(const std::string& path, SnapshotKind kind)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), kind_(kind) {
  if (!out_) throw std::runtime_error("cannot open snapshot file for writing: " + path);
  out_.write(kind == SnapshotKind::low_rank ? kMagicDbo : kMagicFom, 4);
  write_u32(out_, kSnapshotVersion);
  if (!out_) throw std::runtime_error("write failed on snapshot file: " + path);
}

void SnapshotWriter::append(const DboState& s) {
  if (kind_ != SnapshotKind::low_rank)
    throw std::logic_error("cannot append a factored record to a full-order snapshot");
  const std::uint64_t n = static_cast<std::uint64_t>(s.U.rows());
  const std::uint64_t r = static_cast<std::uint64_t>(s.Sigma.rows());
  const std::uint64_t n_s = static_cast<std::uint64_t>(s.Y.rows());
  write_f64(out_, s.t);
  write_u64(out_, n);
  write_u64(out_, r);
  write_u64(out_, n_s);
  write_f64_array(out_, s.U.data(), n * r);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sigma_rm = s.Sigma;
  write_f64_array(out_, sigma_rm.data(), r * r);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> y_rm = s.Y;
  write_f64_array(out_, y_rm.data(), n_s * r);
  if (!out_) throw std::runtime_error("write failed on snapshot file: " + path_);
}

void SnapshotWriter::append(double t, const Eigen::MatrixXd& phi) {
  if (kind_ != SnapshotKind::full_order)
    throw std::logic_error("cannot append a full-order record to a factored snapshot");
  write_f64(out_, t);
  write_u64(out_, static_cast<std::uint64_t>(phi.rows()));
  write_u64(out_, static_cast<std::uint64_t>(phi.cols()));
  write_f64_array(out_, phi.data(),
                  static_cast<std::uint64_t>(phi.rows()) * static_cast<std::uint64_t>(phi.cols()));
  if (!out_) throw std::runtime_error("write failed on snapshot file: " + path_);
}

void SnapshotWriter::flush() {
  out_.flush();
  if (!out_) throw std::runtime_error("flush failed on snapshot file: " + path_);
}

SnapshotReader::SnapshotReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw std::runtime_error("cannot open snapshot file: " + path);
  in_.seekg(0, std::ios::end);
  const std::uint64_t file_size = static_cast<std::uint64_t>(in_.tellg());
  in_.seekg(0);

  char magic[4] = {};
  in_.read(magic, 4);
  if (!in_ || file_size < 8) corrupt(path_, "missing header");
  if (std::memcmp(magic, kMagicDbo, 4) == 0) kind_ = SnapshotKind::low_rank;
  else if (std::memcmp(magic, kMagicFom, 4) == 0) kind_ = SnapshotKind::full_order;
  else corrupt(path_, "unrecognized magic bytes");
  const std::uint32_t version = read_u32(in_);
  if (version != kSnapshotVersion)
    corrupt(path_, "unsupported format version " + std::to_string(version));

  std::uint64_t pos = 8;
  while (pos < file_size) {
    RecordInfo rec;
    const std::uint64_t head = kind_ == SnapshotKind::low_rank ? 8 + 3 * 8 : 8 + 2 * 8;
    if (file_size - pos < head) corrupt(path_, "truncated record header");
    in_.seekg(static_cast<std::streamoff>(pos));
    rec.t = read_f64(in_);
    if (kind_ == SnapshotKind::low_rank) {
      rec.n = read_u64(in_);
      rec.r = read_u64(in_);
      rec.n_s = read_u64(in_);
      check_dims(path_, rec.n, rec.r);
      check_dims(path_, rec.n_s, rec.r);
    } else {
      rec.n = read_u64(in_);
      rec.n_s = read_u64(in_);
      rec.r = 0;
      check_dims(path_, rec.n, rec.n_s);
    }
    rec.payload_offset = pos + head;
    const std::uint64_t payload =
        kind_ == SnapshotKind::low_rank
            ? 8 * (rec.n * rec.r + rec.r * rec.r + rec.n_s * rec.r)
            : 8 * (rec.n * rec.n_s);
    if (file_size - rec.payload_offset < payload) corrupt(path_, "truncated record payload");
    pos = rec.payload_offset + payload;
    records_.push_back(rec);
  }
}

const SnapshotReader::RecordInfo& SnapshotReader::info(std::size_t i) const {
  if (i >= records_.size()) throw std::out_of_range("snapshot record index out of range");
  return records_[i];
}

DboRecord SnapshotReader::read_low_rank(std::size_t i) {
  if (kind_ != SnapshotKind::low_rank)
    throw std::logic_error("snapshot does not hold factored records");
  const RecordInfo& rec = info(i);
  DboRecord out;
  out.t = rec.t;
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(rec.payload_offset));
  out.U.resize(static_cast<Eigen::Index>(rec.n), static_cast<Eigen::Index>(rec.r));
  read_f64_array(in_, out.U.data(), rec.n * rec.r);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sigma_rm(
      static_cast<Eigen::Index>(rec.r), static_cast<Eigen::Index>(rec.r));
  read_f64_array(in_, sigma_rm.data(), rec.r * rec.r);
  out.Sigma = sigma_rm;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> y_rm(
      static_cast<Eigen::Index>(rec.n_s), static_cast<Eigen::Index>(rec.r));
  read_f64_array(in_, y_rm.data(), rec.n_s * rec.r);
  out.Y = y_rm;
  if (!in_) corrupt(path_, "read failed");
  return out;
}

FomRecord SnapshotReader::read_full_order(std::size_t i) {
  if (kind_ != SnapshotKind::full_order)
    throw std::logic_error("snapshot does not hold full-order records");
  const RecordInfo& rec = info(i);
  FomRecord out;
  out.t = rec.t;
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(rec.payload_offset));
  out.phi.resize(static_cast<Eigen::Index>(rec.n), static_cast<Eigen::Index>(rec.n_s));
  read_f64_array(in_, out.phi.data(), rec.n * rec.n_s);
  if (!in_) corrupt(path_, "read failed");
  return out;
}

Eigen::MatrixXd SnapshotReader::reconstruct_species(std::size_t i,
                                                    const std::vector<int>& species) {
  const RecordInfo& rec = info(i);
  for (int idx : species)
    if (idx < 0 || static_cast<std::uint64_t>(idx) >= rec.n_s)
      throw std::out_of_range("species index out of range");

  if (kind_ == SnapshotKind::full_order) {
    in_.clear();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rec.n),
                        static_cast<Eigen::Index>(species.size()));
    for (std::size_t k = 0; k < species.size(); ++k) {
      in_.seekg(static_cast<std::streamoff>(rec.payload_offset +
                                            8 * rec.n * static_cast<std::uint64_t>(species[k])));
      read_f64_array(in_, out.col(static_cast<Eigen::Index>(k)).data(), rec.n);
    }
    if (!in_) corrupt(path_, "read failed");
    return out;
  }

  const DboRecord full = read_low_rank(i);
  Eigen::MatrixXd y_sub(static_cast<Eigen::Index>(species.size()),
                        static_cast<Eigen::Index>(rec.r));
  for (std::size_t k = 0; k < species.size(); ++k)
    y_sub.row(static_cast<Eigen::Index>(k)) = full.Y.row(species[k]);
  return full.U * (full.Sigma * y_sub.transpose());
}

}  // namespace dbo
