#include "dborom/dborom.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "runner.hpp"
#include "snapshot.hpp"

struct dbo_config {
  dbo::RunConfig cfg;
};

struct dbo_snapshot {
  explicit dbo_snapshot(const char* path) : reader(path) {}
  dbo::SnapshotReader reader;
};

namespace {

void set_err(char* err, size_t err_len, const char* msg) {
  if (!err || err_len == 0) return;
  const size_t n = std::min(err_len - 1, std::strlen(msg));
  std::memcpy(err, msg, n);
  err[n] = '\0';
}

// Exceptions never cross the C boundary; they map onto the status codes the
// CLI reuses as exit codes.
template <typename Fn>
dbo_status guarded(char* err, size_t err_len, Fn&& fn) {
  set_err(err, err_len, "");
  try {
    return fn();
  } catch (const dbo::ConfigError& e) {
    set_err(err, err_len, e.what());
    return DBO_ERR_CONFIG;
  } catch (const std::exception& e) {
    set_err(err, err_len, e.what());
    return DBO_ERR_RUNTIME;
  } catch (...) {
    set_err(err, err_len, "unknown error");
    return DBO_ERR_RUNTIME;
  }
}

dbo_status usage(char* err, size_t err_len, const char* msg) {
  set_err(err, err_len, msg);
  return DBO_ERR_USAGE;
}

}  // namespace

extern "C" {

const char* dbo_version(void) { return "1.0.0"; }

dbo_status dbo_set_threads(int n, char* err, size_t err_len) {
  return guarded(err, err_len, [&]() -> dbo_status {
    dbo::set_threads(n);
    return DBO_OK;
  });
}

dbo_status dbo_config_default(dbo_config** out, char* err, size_t err_len) {
  if (!out) return usage(err, err_len, "null output pointer");
  return guarded(err, err_len, [&]() -> dbo_status {
    *out = new dbo_config{dbo::RunConfig::defaults()};
    return DBO_OK;
  });
}

dbo_status dbo_config_load(const char* path, dbo_config** out, char* err, size_t err_len) {
  if (!path || !out) return usage(err, err_len, "null argument");
  return guarded(err, err_len, [&]() -> dbo_status {
    *out = new dbo_config{dbo::RunConfig::load(path)};
    return DBO_OK;
  });
}

dbo_status dbo_config_parse(const char* text, dbo_config** out, char* err, size_t err_len) {
  if (!text || !out) return usage(err, err_len, "null argument");
  return guarded(err, err_len, [&]() -> dbo_status {
    *out = new dbo_config{dbo::RunConfig::parse_text(text)};
    return DBO_OK;
  });
}

dbo_status dbo_config_set(dbo_config* cfg, const char* dotted_key, const char* value, char* err,
                          size_t err_len) {
  if (!cfg || !dotted_key || !value) return usage(err, err_len, "null argument");
  return guarded(err, err_len, [&]() -> dbo_status {
    cfg->cfg.set(dotted_key, value);
    return DBO_OK;
  });
}

dbo_status dbo_config_validate(const dbo_config* cfg, char* err, size_t err_len) {
  if (!cfg) return usage(err, err_len, "null argument");
  return guarded(err, err_len, [&]() -> dbo_status {
    cfg->cfg.validate();
    return DBO_OK;
  });
}

dbo_status dbo_config_describe(const dbo_config* cfg, char* buf, size_t* len, char* err,
                               size_t err_len) {
  if (!cfg || !len) return usage(err, err_len, "null argument");
  return guarded(err, err_len, [&]() -> dbo_status {
    const std::string text = cfg->cfg.resolved_text();
    const size_t need = text.size() + 1;
    if (!buf) {
      *len = need;
      return DBO_OK;
    }
    if (*len < need) {
      *len = need;
      return usage(err, err_len, "buffer too small");
    }
    std::memcpy(buf, text.c_str(), need);
    *len = need;
    return DBO_OK;
  });
}

void dbo_config_free(dbo_config* cfg) { delete cfg; }

dbo_status dbo_run_low_rank(const dbo_config* cfg, int quiet, char* err, size_t err_len) {
  if (!cfg) return usage(err, err_len, "null configuration");
  return guarded(err, err_len, [&]() -> dbo_status {
    dbo::run_dbo(cfg->cfg, quiet != 0);
    return DBO_OK;
  });
}

dbo_status dbo_run_full_order(const dbo_config* cfg, int quiet, char* err, size_t err_len) {
  if (!cfg) return usage(err, err_len, "null configuration");
  return guarded(err, err_len, [&]() -> dbo_status {
    dbo::run_fom(cfg->cfg, quiet != 0);
    return DBO_OK;
  });
}

dbo_status dbo_compare_runs(const char* dbo_dir, const char* fom_dir, const char* out_dir,
                            int quiet, char* err, size_t err_len) {
  if (!dbo_dir || !fom_dir || !out_dir) return usage(err, err_len, "null argument");
  return guarded(err, err_len, [&]() -> dbo_status {
    dbo::compare_runs(dbo_dir, fom_dir, out_dir, quiet != 0);
    return DBO_OK;
  });
}

dbo_status dbo_export_figures(const char* fom_dir, const char* const* run_dirs, size_t n_runs,
                              const char* out_dir, int quiet, char* err, size_t err_len) {
  if (!fom_dir || !out_dir || (n_runs > 0 && !run_dirs))
    return usage(err, err_len, "null argument");
  return guarded(err, err_len, [&]() -> dbo_status {
    std::vector<std::string> dirs;
    dirs.reserve(n_runs);
    for (size_t i = 0; i < n_runs; ++i) {
      if (!run_dirs[i]) return usage(err, err_len, "null run directory");
      dirs.emplace_back(run_dirs[i]);
    }
    dbo::export_figures(fom_dir, dirs, out_dir, quiet != 0);
    return DBO_OK;
  });
}

dbo_status dbo_snapshot_open(const char* path, dbo_snapshot** out, char* err, size_t err_len) {
  if (!path || !out) return usage(err, err_len, "null argument");
  return guarded(err, err_len, [&]() -> dbo_status {
    *out = new dbo_snapshot(path);
    return DBO_OK;
  });
}

dbo_status dbo_snapshot_kind(const dbo_snapshot* snap, int* kind) {
  if (!snap || !kind) return DBO_ERR_USAGE;
  *kind = snap->reader.kind() == dbo::SnapshotKind::low_rank ? DBO_SNAPSHOT_LOW_RANK
                                                             : DBO_SNAPSHOT_FULL_ORDER;
  return DBO_OK;
}

dbo_status dbo_snapshot_count(const dbo_snapshot* snap, size_t* count) {
  if (!snap || !count) return DBO_ERR_USAGE;
  *count = snap->reader.size();
  return DBO_OK;
}

dbo_status dbo_snapshot_info(const dbo_snapshot* snap, size_t index, double* t, uint64_t* n_grid,
                             uint64_t* rank, uint64_t* n_species, char* err, size_t err_len) {
  if (!snap) return usage(err, err_len, "null snapshot");
  return guarded(err, err_len, [&]() -> dbo_status {
    if (index >= snap->reader.size()) return usage(err, err_len, "record index out of range");
    const auto& info = snap->reader.info(index);
    if (t) *t = info.t;
    if (n_grid) *n_grid = info.n;
    if (rank) *rank = info.r;
    if (n_species) *n_species = info.n_s;
    return DBO_OK;
  });
}

dbo_status dbo_snapshot_reconstruct(dbo_snapshot* snap, size_t index, const int* species,
                                    size_t n_species, double* out, size_t out_len, char* err,
                                    size_t err_len) {
  if (!snap || !out) return usage(err, err_len, "null argument");
  if (n_species > 0 && !species) return usage(err, err_len, "null species list");
  return guarded(err, err_len, [&]() -> dbo_status {
    if (index >= snap->reader.size()) return usage(err, err_len, "record index out of range");
    const auto& info = snap->reader.info(index);
    std::vector<int> sel;
    if (species) {
      sel.assign(species, species + n_species);
    } else {
      sel.resize(info.n_s);
      for (size_t i = 0; i < info.n_s; ++i) sel[static_cast<size_t>(i)] = static_cast<int>(i);
    }
    const size_t need = static_cast<size_t>(info.n) * sel.size();
    if (out_len < need) return usage(err, err_len, "output buffer too small");
    const Eigen::MatrixXd cols = snap->reader.reconstruct_species(index, sel);
    std::memcpy(out, cols.data(), need * sizeof(double));
    return DBO_OK;
  });
}

void dbo_snapshot_free(dbo_snapshot* snap) { delete snap; }

}  // extern "C"
