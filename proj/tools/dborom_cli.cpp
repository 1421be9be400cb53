// Command-line front end. Everything goes through the public C API; the
// status codes it returns are the process exit codes: 0 ok, 1 usage,
// 2 configuration, 3 runtime.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dborom/dborom.h"

namespace {

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tmv{};
  gmtime_r(&now, &tmv);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tmv);
  return buf;
}

void print_error(const std::string& msg) {
  std::fprintf(stderr, "[%s] error: %s\n", timestamp().c_str(), msg.c_str());
}

struct ConfigPtr {
  dbo_config* p = nullptr;
  ~ConfigPtr() { dbo_config_free(p); }
};

struct RunOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool have_seed = false;
  int threads = 0;
  bool have_threads = false;
  bool quiet = false;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config_path, "configuration file")->required();
  cmd->add_option("--out", o.out_dir, "override the configured output directory");
  cmd->add_option("--seed-override", o.seed, "override species.ic_seed");
  cmd->add_option("--threads", o.threads, "worker threads for the source loop");
  cmd->add_flag("--quiet", o.quiet, "suppress progress logging");
}

// Load + apply overrides + validate; returns 0 and fills cfg on success.
int build_config(const RunOptions& o, ConfigPtr& cfg) {
  char err[1024];
  dbo_status st = dbo_config_load(o.config_path.c_str(), &cfg.p, err, sizeof err);
  if (st != DBO_OK) {
    print_error(err);
    return st;
  }
  if (o.have_seed) {
    st = dbo_config_set(cfg.p, "species.ic_seed", std::to_string(o.seed).c_str(), err, sizeof err);
    if (st != DBO_OK) {
      print_error(err);
      return st;
    }
  }
  if (!o.out_dir.empty()) {
    st = dbo_config_set(cfg.p, "outputs.directory", o.out_dir.c_str(), err, sizeof err);
    if (st != DBO_OK) {
      print_error(err);
      return st;
    }
  }
  st = dbo_config_validate(cfg.p, err, sizeof err);
  if (st != DBO_OK) {
    print_error(err);
    return st;
  }
  if (o.have_threads) {
    st = dbo_set_threads(o.threads, err, sizeof err);
    if (st != DBO_OK) {
      print_error(err);
      return st;
    }
  }
  return 0;
}

int do_run(const RunOptions& o, bool low_rank) {
  ConfigPtr cfg;
  if (int rc = build_config(o, cfg); rc != 0) return rc;
  char err[1024];
  const dbo_status st = low_rank ? dbo_run_low_rank(cfg.p, o.quiet ? 1 : 0, err, sizeof err)
                                 : dbo_run_full_order(cfg.p, o.quiet ? 1 : 0, err, sizeof err);
  if (st != DBO_OK) {
    print_error(err);
    return st;
  }
  return 0;
}

int do_validate(const std::string& path) {
  char err[1024];
  ConfigPtr cfg;
  dbo_status st = dbo_config_load(path.c_str(), &cfg.p, err, sizeof err);
  if (st != DBO_OK) {
    print_error(err);
    return st;
  }
  size_t len = 0;
  st = dbo_config_describe(cfg.p, nullptr, &len, err, sizeof err);
  if (st != DBO_OK) {
    print_error(err);
    return st;
  }
  std::string text(len, '\0');
  st = dbo_config_describe(cfg.p, text.data(), &len, err, sizeof err);
  if (st != DBO_OK) {
    print_error(err);
    return st;
  }
  std::fputs(text.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-rank reduced-order transport runs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dbo_version());

  RunOptions dbo_opts;
  auto* cmd_dbo = app.add_subcommand("run-dbo", "advance the factored low-rank system");
  add_run_options(cmd_dbo, dbo_opts);

  RunOptions fom_opts;
  auto* cmd_fom = app.add_subcommand("run-fom", "advance the full-order system");
  add_run_options(cmd_fom, fom_opts);

  std::string cmp_dbo, cmp_fom, cmp_out;
  bool cmp_quiet = false;
  auto* cmd_cmp = app.add_subcommand("compare", "error and spectrum comparison of two runs");
  cmd_cmp->add_option("--dbo", cmp_dbo, "factored run directory")->required();
  cmd_cmp->add_option("--fom", cmp_fom, "full-order run directory")->required();
  cmd_cmp->add_option("--out", cmp_out, "output directory")->required();
  cmd_cmp->add_flag("--quiet", cmp_quiet, "suppress logging");

  std::string fig_fom, fig_out;
  std::vector<std::string> fig_runs;
  bool fig_quiet = false;
  auto* cmd_fig = app.add_subcommand("export-figures", "columnar data files for plots");
  cmd_fig->add_option("--fom", fig_fom, "full-order run directory")->required();
  cmd_fig->add_option("--run", fig_runs, "factored run directory (repeatable)");
  cmd_fig->add_option("--out", fig_out, "output directory")->required();
  cmd_fig->add_flag("--quiet", fig_quiet, "suppress logging");

  std::string val_config;
  auto* cmd_val = app.add_subcommand("validate-config", "parse a config and echo the resolved form");
  cmd_val->add_option("--config", val_config, "configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
    print_error(e.what());
    return 1;
  }

  dbo_opts.have_seed = cmd_dbo->count("--seed-override") > 0;
  dbo_opts.have_threads = cmd_dbo->count("--threads") > 0;
  fom_opts.have_seed = cmd_fom->count("--seed-override") > 0;
  fom_opts.have_threads = cmd_fom->count("--threads") > 0;

  if (cmd_dbo->parsed()) return do_run(dbo_opts, true);
  if (cmd_fom->parsed()) return do_run(fom_opts, false);
  if (cmd_cmp->parsed()) {
    char err[1024];
    const dbo_status st = dbo_compare_runs(cmp_dbo.c_str(), cmp_fom.c_str(), cmp_out.c_str(),
                                           cmp_quiet ? 1 : 0, err, sizeof err);
    if (st != DBO_OK) {
      print_error(err);
      return st;
    }
    return 0;
  }
  if (cmd_fig->parsed()) {
    std::vector<const char*> dirs;
    dirs.reserve(fig_runs.size());
    for (const auto& d : fig_runs) dirs.push_back(d.c_str());
    char err[1024];
    const dbo_status st =
        dbo_export_figures(fig_fom.c_str(), dirs.empty() ? nullptr : dirs.data(), dirs.size(),
                           fig_out.c_str(), fig_quiet ? 1 : 0, err, sizeof err);
    if (st != DBO_OK) {
      print_error(err);
      return st;
    }
    return 0;
  }
  if (cmd_val->parsed()) return do_validate(val_config);

  print_error("no subcommand given");
  return 1;
}
