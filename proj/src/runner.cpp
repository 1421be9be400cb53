#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diagnostics.hpp"
#include "errors.hpp"
#include "fom.hpp"
#include "snapshot.hpp"
#include "timeint.hpp"
#include "transport.hpp"

namespace dbo {

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tmv{};
  gmtime_r(&now, &tmv);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tmv);
  return buf;
}

void log_info(bool quiet, const std::string& msg) {
  if (quiet) return;
  std::fprintf(stderr, "[%s] info: %s\n", timestamp_utc().c_str(), msg.c_str());
}

namespace {

namespace fs = std::filesystem;

struct ModelSetup {
  Grid1D grid;
  Eigen::VectorXd v0;
  DiffusivitySpec diff;
  std::unique_ptr<SourceModel> source;
  bool moving_velocity = false;
};

ModelSetup build_model(const RunConfig& cfg) {
  ModelSetup m;
  m.grid = Grid1D(cfg.n, cfg.length);
  m.moving_velocity = cfg.velocity == "burgers";
  m.v0 = m.moving_velocity ? burgers_initial_velocity(m.grid) : Eigen::VectorXd::Zero(cfg.n);
  m.diff.alpha = cfg.alphas();
  m.source = SourceModel::create(cfg.source, cfg.source_k);
  return m;
}

Eigen::VectorXd velocity_rhs(const ModelSetup& m, const Eigen::VectorXd& v, double nu) {
  if (!m.moving_velocity) return Eigen::VectorXd::Zero(v.size());
  return burgers_rhs(m.grid, VelocityField{v, nu});
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::unique_ptr<std::ofstream> open_csv(const std::string& path) {
  auto out = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

// Pin a restart time onto the configured step grid.
void check_on_step_grid(double t, double dt, const std::string& what) {
  const long k = std::lround(t / dt);
  if (std::abs(static_cast<double>(k) * dt - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw ConfigError(what + " time " + std::to_string(t) +
                      " is not a multiple of the configured step size");
}

// Velocity advanced alone from t = 0 reproduces, bit for bit, the velocity
// block of a combined run: its stage arithmetic never reads the species
// blocks, and the stepper updates blocks independently.
Eigen::VectorXd advance_velocity(const ModelSetup& m, const RunConfig& cfg, double t_to) {
  if (!m.moving_velocity || !(t_to > 0.0)) return m.v0;
  CompositeState s;
  s.t = 0.0;
  s.add_block("v", m.v0);
  RhsFn rhs = [&](const CompositeState& cs) {
    CompositeState d;
    d.t = cs.t;
    d.add_block("v", velocity_rhs(m, cs.block("v").col(0), cfg.nu));
    return d;
  };
  CompositeState out = integrate(std::move(s), rhs, cfg.dt, t_to, {});
  return out.block("v").col(0);
}

Observer progress_observer(bool quiet, double t0, double dt, long steps) {
  const long stride = std::max<long>(1, steps / 8);
  return {stride, [quiet, t0, dt, steps](const CompositeState&, long step) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "t = %.6g (step %ld/%ld)",
                          t0 + static_cast<double>(step) * dt, step, steps);
            log_info(quiet, buf);
          }};
}

}  // namespace

void run_dbo(const RunConfig& cfg, bool quiet) {
  const ModelSetup m = build_model(cfg);
  ensure_dir(cfg.directory);
  write_text_file(cfg.directory + "/" + kResolvedConfigName, cfg.resolved_text());

  DboState state;
  state.grid = m.grid;
  Eigen::VectorXd v = m.v0;

  if (cfg.restart.empty()) {
    log_info(quiet, "drawing initial field for " + std::to_string(cfg.n_s) + " species");
    const Eigen::MatrixXd phi0 = species_ic(m.grid, cfg.n_s, cfg.ic_b, cfg.ic_seed);
    InitReport init;
    state = init_from_field(m.grid, phi0, cfg.r, &init);
    log_info(quiet, "rank-" + std::to_string(cfg.r) + " start, truncation error " +
                        format_g17(init.truncation_error));
  } else {
    SnapshotReader reader(cfg.restart);
    if (reader.kind() != SnapshotKind::low_rank)
      throw ConfigError("restart file " + cfg.restart + " does not hold factored records");
    if (reader.size() == 0) throw ConfigError("restart file " + cfg.restart + " is empty");
    DboRecord rec = reader.read_low_rank(reader.size() - 1);
    if (rec.U.rows() != cfg.n || rec.Y.rows() != cfg.n_s || rec.Sigma.rows() != cfg.r)
      throw ConfigError("restart record shape does not match the configuration");
    check_on_step_grid(rec.t, cfg.dt, "restart");
    if (cfg.t_final < rec.t - 1e-12)
      throw ConfigError("t_final precedes the restart time " + std::to_string(rec.t));
    state.U = std::move(rec.U);
    state.Sigma = std::move(rec.Sigma);
    state.Y = std::move(rec.Y);
    state.t = rec.t;
    v = advance_velocity(m, cfg, rec.t);
    log_info(quiet, "resuming from " + cfg.restart + " at t = " + format_g17(rec.t));
  }

  const SkewGauge gauge = cfg.gauge == "random" ? SkewGauge::random(cfg.r, cfg.gauge_seed)
                                                : SkewGauge::zero(cfg.r);

  CompositeState cs;
  cs.t = state.t;
  cs.add_block("v", v);
  cs.add_block("U", std::move(state.U));
  cs.add_block("Sigma", std::move(state.Sigma));
  cs.add_block("Y", std::move(state.Y));

  auto unpack = [&m](const CompositeState& s) {
    DboState d;
    d.grid = m.grid;
    d.U = s.block("U");
    d.Sigma = s.block("Sigma");
    d.Y = s.block("Y");
    d.t = s.t;
    return d;
  };

  RhsFn rhs = [&](const CompositeState& s) {
    const DboState d = unpack(s);
    const VelocityField vel{s.block("v").col(0), cfg.nu};
    ProjectedRhs pr = project_model_rhs(d, vel, m.diff, m.source.get());
    DboDeriv dd = dbo_rhs(d, pr.MY, pr.MtU, gauge, &pr.MtU_perp);
    CompositeState out;
    out.t = s.t;
    out.add_block("v", velocity_rhs(m, s.block("v").col(0), cfg.nu));
    out.add_block("U", std::move(dd.dU));
    out.add_block("Sigma", std::move(dd.dSigma));
    out.add_block("Y", std::move(dd.dY));
    return out;
  };

  PostStepHook hook = [&](CompositeState s) {
    DboState clean = reorthonormalize(unpack(s));
    s.block("U") = std::move(clean.U);
    s.block("Sigma") = std::move(clean.Sigma);
    s.block("Y") = std::move(clean.Y);
    return s;
  };

  std::vector<Observer> observers;
  std::optional<SnapshotWriter> snap;
  long snap_count = 0;
  if (cfg.snapshots) {
    snap.emplace(cfg.directory + "/" + kDboSnapshotName, SnapshotKind::low_rank);
    observers.push_back({cfg.output_stride, [&](const CompositeState& s, long) {
                           snap->append(unpack(s));
                           ++snap_count;
                         }});
  }

  std::unique_ptr<std::ofstream> diag_file;
  std::optional<DiagnosticsWriter> diag;
  if (cfg.diagnostics) {
    diag_file = open_csv(cfg.directory + "/" + kDiagnosticsName);
    diag.emplace(*diag_file, cfg.r);
    observers.push_back({cfg.output_stride, [&](const CompositeState& s, long) {
                           const DboState d = unpack(s);
                           const CanonicalForm canon = canonical_form(d);
                           const VelocityField vel{s.block("v").col(0), cfg.nu};
                           ProjectedRhs pr = project_model_rhs(d, vel, m.diff, m.source.get());
                           const DboDeriv dd = dbo_rhs(d, pr.MY, pr.MtU, gauge, &pr.MtU_perp);
                           // Tangent-space residuals net of the declared gauge;
                           // both vanish for the zero gauge.
                           const double scale = std::max(frobenius_norm(m.grid, pr.MY), 1e-300);
                           const double res_u = (gram(m.grid, d.U, dd.dU) - gauge.phi).norm();
                           const double res_y = (d.Y.transpose() * dd.dY - gauge.theta).norm();
                           const double sig_lo = canon.sigma_tilde(canon.sigma_tilde.size() - 1);
                           const double cond =
                               sig_lo > 0.0 ? canon.sigma_tilde(0) / sig_lo
                                            : std::numeric_limits<double>::infinity();
                           diag->row(s.t, canon.sigma_tilde,
                                     std::numeric_limits<double>::quiet_NaN(), orth_defect_u(d),
                                     orth_defect_y(d), std::max(res_u, res_y) / scale, cond);
                         }});
  }

  const long steps = std::lround((cfg.t_final - cs.t) / cfg.dt);
  if (!quiet && steps > 0) observers.push_back(progress_observer(quiet, cs.t, cfg.dt, steps));

  integrate(std::move(cs), rhs, cfg.dt, cfg.t_final, observers, hook);

  if (snap) snap->flush();
  if (diag_file) {
    diag_file->flush();
    if (!*diag_file) throw std::runtime_error("write failed for the diagnostics file");
  }
  log_info(quiet, "factored run finished at t = " + format_g17(cfg.t_final) + ", " +
                      std::to_string(snap_count) + " snapshots in " + cfg.directory);
}

void run_fom(const RunConfig& cfg, bool quiet) {
  const ModelSetup m = build_model(cfg);
  ensure_dir(cfg.directory);
  write_text_file(cfg.directory + "/" + kResolvedConfigName, cfg.resolved_text());

  Eigen::MatrixXd phi;
  Eigen::VectorXd v = m.v0;
  double t0 = 0.0;

  if (cfg.restart.empty()) {
    log_info(quiet, "drawing initial field for " + std::to_string(cfg.n_s) + " species");
    phi = species_ic(m.grid, cfg.n_s, cfg.ic_b, cfg.ic_seed);
  } else {
    SnapshotReader reader(cfg.restart);
    if (reader.kind() != SnapshotKind::full_order)
      throw ConfigError("restart file " + cfg.restart + " does not hold full-order records");
    if (reader.size() == 0) throw ConfigError("restart file " + cfg.restart + " is empty");
    FomRecord rec = reader.read_full_order(reader.size() - 1);
    if (rec.phi.rows() != cfg.n || rec.phi.cols() != cfg.n_s)
      throw ConfigError("restart record shape does not match the configuration");
    check_on_step_grid(rec.t, cfg.dt, "restart");
    if (cfg.t_final < rec.t - 1e-12)
      throw ConfigError("t_final precedes the restart time " + std::to_string(rec.t));
    phi = std::move(rec.phi);
    t0 = rec.t;
    v = advance_velocity(m, cfg, rec.t);
    log_info(quiet, "resuming from " + cfg.restart + " at t = " + format_g17(rec.t));
  }

  CompositeState cs;
  cs.t = t0;
  cs.add_block("v", v);
  cs.add_block("phi", std::move(phi));

  RhsFn rhs = [&](const CompositeState& s) {
    const FomState f{m.grid, s.block("phi"), s.t};
    const VelocityField vel{s.block("v").col(0), cfg.nu};
    CompositeState out;
    out.t = s.t;
    out.add_block("v", velocity_rhs(m, s.block("v").col(0), cfg.nu));
    out.add_block("phi", fom_rhs(f, vel, m.diff, m.source.get()));
    return out;
  };

  std::vector<Observer> observers;
  std::optional<SnapshotWriter> snap;
  long snap_count = 0;
  if (cfg.snapshots) {
    snap.emplace(cfg.directory + "/" + kFomSnapshotName, SnapshotKind::full_order);
    observers.push_back({cfg.output_stride, [&](const CompositeState& s, long) {
                           snap->append(s.t, s.block("phi"));
                           ++snap_count;
                         }});
  }

  std::unique_ptr<std::ofstream> ipca_file;
  const int n_sv = std::min(16, std::min(cfg.n, cfg.n_s));
  if (cfg.diagnostics) {
    ipca_file = open_csv(cfg.directory + "/" + kIpcaName);
    *ipca_file << "t";
    for (int i = 1; i <= n_sv; ++i) *ipca_file << ",sigma_hat_" << i;
    *ipca_file << "\n";
    observers.push_back({cfg.ipca_stride, [&](const CompositeState& s, long) {
                           const IpcaResult res = ipca(FomState{m.grid, s.block("phi"), s.t});
                           *ipca_file << format_g17(s.t);
                           for (int i = 0; i < n_sv; ++i)
                             *ipca_file << ',' << format_g17(res.singular_values(i));
                           *ipca_file << "\n";
                           if (!*ipca_file)
                             throw std::runtime_error("write failed for the spectrum file");
                         }});
  }

  const long steps = std::lround((cfg.t_final - t0) / cfg.dt);
  if (!quiet && steps > 0) observers.push_back(progress_observer(quiet, t0, cfg.dt, steps));

  integrate(std::move(cs), rhs, cfg.dt, cfg.t_final, observers);

  if (snap) snap->flush();
  if (ipca_file) ipca_file->flush();
  log_info(quiet, "full-order run finished at t = " + format_g17(cfg.t_final) + ", " +
                      std::to_string(snap_count) + " snapshots in " + cfg.directory);
}

void compare_runs(const std::string& dbo_dir, const std::string& fom_dir,
                  const std::string& out_dir, bool quiet) {
  const RunConfig dcfg = RunConfig::load(dbo_dir + "/" + kResolvedConfigName);
  const RunConfig fcfg = RunConfig::load(fom_dir + "/" + kResolvedConfigName);
  if (dcfg.n != fcfg.n || dcfg.length != fcfg.length)
    throw ConfigError("grid mismatch between runs: " + std::to_string(dcfg.n) + " on length " +
                      format_g17(dcfg.length) + " vs " + std::to_string(fcfg.n) + " on length " +
                      format_g17(fcfg.length));
  if (dcfg.n_s != fcfg.n_s)
    throw ConfigError("species count mismatch between runs: " + std::to_string(dcfg.n_s) +
                      " vs " + std::to_string(fcfg.n_s));

  auto open_snapshots = [](const std::string& dir, const char* name, const char* other,
                           const char* expected) {
    if (!std::filesystem::exists(dir + "/" + name) && std::filesystem::exists(dir + "/" + other))
      throw ConfigError(dir + " does not hold " + expected);
    return SnapshotReader(dir + "/" + name);
  };
  SnapshotReader dbo_r =
      open_snapshots(dbo_dir, kDboSnapshotName, kFomSnapshotName, "a factored run");
  SnapshotReader fom_r =
      open_snapshots(fom_dir, kFomSnapshotName, kDboSnapshotName, "a full-order run");
  if (dbo_r.kind() != SnapshotKind::low_rank)
    throw ConfigError(dbo_dir + " does not hold a factored run");
  if (fom_r.kind() != SnapshotKind::full_order)
    throw ConfigError(fom_dir + " does not hold a full-order run");

  const Grid1D grid(dcfg.n, dcfg.length);
  const int r = dcfg.r;

  ensure_dir(out_dir);
  auto err_csv = open_csv(out_dir + "/compare_error.csv");
  *err_csv << "t,relative_error,optimal_error\n";
  auto spec_csv = open_csv(out_dir + "/compare_spectra.csv");
  *spec_csv << "t";
  for (int i = 1; i <= r; ++i) *spec_csv << ",gap_" << i;
  for (int i = 1; i <= r; ++i) *spec_csv << ",angle_" << i;
  *spec_csv << "\n";

  long matched = 0;
  double final_err = std::numeric_limits<double>::quiet_NaN();
  double final_opt = std::numeric_limits<double>::quiet_NaN();
  std::size_t j = 0;
  for (std::size_t i = 0; i < dbo_r.size(); ++i) {
    const double t = dbo_r.info(i).t;
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    while (j < fom_r.size() && fom_r.info(j).t < t - tol) ++j;
    if (j >= fom_r.size()) break;
    if (std::abs(fom_r.info(j).t - t) > tol) continue;

    DboRecord dr = dbo_r.read_low_rank(i);
    FomRecord fr = fom_r.read_full_order(j);
    const DboState ds{grid, std::move(dr.U), std::move(dr.Sigma), std::move(dr.Y), t};
    const double err = relative_error(ds, fr.phi);
    const IpcaResult ref = ipca(FomState{grid, std::move(fr.phi), t});
    const double opt = ipca_truncation_error(ref, r);
    const SpectrumComparison sc = compare_spectra(ds, ref, r, dcfg.dt);

    *err_csv << format_g17(t) << ',' << format_g17(err) << ',' << format_g17(opt) << "\n";
    *spec_csv << format_g17(t);
    for (int k = 0; k < r; ++k) *spec_csv << ',' << format_g17(sc.gaps(k));
    for (int k = 0; k < r; ++k) *spec_csv << ',' << format_g17(sc.angles(k));
    *spec_csv << "\n";
    final_err = err;
    final_opt = opt;
    ++matched;
  }
  if (matched == 0) throw ConfigError("the two runs share no snapshot times");

  err_csv->flush();
  spec_csv->flush();
  if (!*err_csv || !*spec_csv) throw std::runtime_error("write failed in " + out_dir);
  log_info(quiet, "compared " + std::to_string(matched) + " snapshot times; final error " +
                      format_g17(final_err) + " vs optimum " + format_g17(final_opt));
}

void export_figures(const std::string& fom_dir, const std::vector<std::string>& dbo_dirs,
                    const std::string& out_dir, bool quiet) {
  const RunConfig fcfg = RunConfig::load(fom_dir + "/" + kResolvedConfigName);
  const Grid1D grid(fcfg.n, fcfg.length);
  SnapshotReader fom_r(fom_dir + "/" + kFomSnapshotName);
  if (fom_r.kind() != SnapshotKind::full_order)
    throw ConfigError(fom_dir + " does not hold a full-order run");
  if (fom_r.size() == 0) throw ConfigError("reference run has no snapshots");

  std::vector<RunConfig> cfgs;
  std::vector<std::unique_ptr<SnapshotReader>> runs;
  for (const auto& dir : dbo_dirs) {
    cfgs.push_back(RunConfig::load(dir + "/" + kResolvedConfigName));
    runs.push_back(std::make_unique<SnapshotReader>(dir + "/" + kDboSnapshotName));
    if (runs.back()->kind() != SnapshotKind::low_rank)
      throw ConfigError(dir + " does not hold a factored run");
    if (runs.back()->size() == 0) throw ConfigError(dir + " has no snapshots");
    if (cfgs.back().n != fcfg.n || cfgs.back().n_s != fcfg.n_s)
      throw ConfigError("run " + dir + " does not match the reference grid");
  }

  ensure_dir(out_dir);

  // A handful of representative species, 1-based in the file headers.
  std::vector<int> species;
  for (int s : {1, 2, 5, 100})
    if (s <= fcfg.n_s) species.push_back(s);
  std::vector<int> species0;
  for (int s : species) species0.push_back(s - 1);

  {  // Final-time profiles, reference first, then each run.
    auto out = open_csv(out_dir + "/profiles.dat");
    *out << "# species profiles at the final snapshot time\n";
    *out << "# t_ref = " << format_g17(fom_r.info(fom_r.size() - 1).t) << "\n";
    *out << "# columns: x";
    for (int s : species) *out << " ref_s" << s;
    for (std::size_t d = 0; d < runs.size(); ++d)
      for (int s : species) *out << " run" << d + 1 << "_s" << s;
    *out << "\n";
    const Eigen::VectorXd x = grid.nodes();
    std::vector<Eigen::MatrixXd> cols;
    cols.push_back(fom_r.reconstruct_species(fom_r.size() - 1, species0));
    for (auto& rr : runs) cols.push_back(rr->reconstruct_species(rr->size() - 1, species0));
    for (int i = 0; i < grid.n; ++i) {
      *out << format_g17(x(i));
      for (const auto& c : cols)
        for (int k = 0; k < c.cols(); ++k) *out << ' ' << format_g17(c(i, k));
      *out << "\n";
    }
  }

  {  // Error vs time per run plus the reference singular values, one pass
     // over the full-order records.
    auto err_out = open_csv(out_dir + "/error_vs_time.dat");
    *err_out << "# relative reconstruction error against the full-order reference\n";
    *err_out << "# columns: t";
    for (std::size_t d = 0; d < runs.size(); ++d) *err_out << " run" << d + 1;
    *err_out << "\n";

    const int n_sv = std::min(16, std::min(fcfg.n, fcfg.n_s));
    auto sv_out = open_csv(out_dir + "/singular_values_ref.dat");
    *sv_out << "# leading instantaneous singular values of the reference field\n";
    *sv_out << "# columns: t";
    for (int i = 1; i <= n_sv; ++i) *sv_out << " sigma_hat_" << i;
    *sv_out << "\n";

    for (std::size_t j = 0; j < fom_r.size(); ++j) {
      const double t = fom_r.info(j).t;
      const double tol = 1e-9 * std::max(1.0, std::abs(t));
      FomRecord fr = fom_r.read_full_order(j);

      *err_out << format_g17(t);
      for (std::size_t d = 0; d < runs.size(); ++d) {
        double err = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < runs[d]->size(); ++i) {
          if (std::abs(runs[d]->info(i).t - t) > tol) continue;
          DboRecord dr = runs[d]->read_low_rank(i);
          const DboState ds{grid, std::move(dr.U), std::move(dr.Sigma), std::move(dr.Y), t};
          err = relative_error(ds, fr.phi);
          break;
        }
        *err_out << ' ' << format_g17(err);
      }
      *err_out << "\n";

      const IpcaResult res = ipca(FomState{grid, std::move(fr.phi), t});
      *sv_out << format_g17(t);
      for (int i = 0; i < n_sv; ++i) *sv_out << ' ' << format_g17(res.singular_values(i));
      *sv_out << "\n";
    }
  }

  for (std::size_t d = 0; d < runs.size(); ++d) {
    auto out = open_csv(out_dir + "/singular_values_run" + std::to_string(d + 1) + ".dat");
    *out << "# singular values of the factored state\n";
    *out << "# columns: t";
    for (int i = 1; i <= cfgs[d].r; ++i) *out << " sigma_tilde_" << i;
    *out << "\n";
    for (std::size_t i = 0; i < runs[d]->size(); ++i) {
      const DboRecord dr = runs[d]->read_low_rank(i);
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(dr.Sigma);
      *out << format_g17(dr.t);
      const Eigen::VectorXd sv = svd.singularValues();
      for (int k = 0; k < sv.size(); ++k) *out << ' ' << format_g17(sv(k));
      *out << "\n";
    }
  }

  log_info(quiet, "wrote " + std::to_string(3 + runs.size()) + " figure data files to " + out_dir);
}

}  // namespace dbo
