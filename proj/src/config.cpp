#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace dbo {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& key, int line) {
  const std::string t = trim(v);
  if (t.empty()) throw ConfigError("empty value for " + key, line);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw ConfigError("expected a number for " + key + ", got '" + t + "'", line);
  if (!std::isfinite(x)) throw ConfigError(key + " must be finite", line);
  return x;
}

long long parse_int(const std::string& v, const std::string& key, int line) {
  const std::string t = trim(v);
  long long x = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc{} || p != t.data() + t.size())
    throw ConfigError("expected an integer for " + key + ", got '" + t + "'", line);
  return x;
}

std::uint64_t parse_u64(const std::string& v, const std::string& key, int line) {
  const std::string t = trim(v);
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc{} || p != t.data() + t.size())
    throw ConfigError("expected an unsigned integer for " + key + ", got '" + t + "'", line);
  return x;
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  const std::string t = trim(v);
  if (t == "on" || t == "true" || t == "1") return true;
  if (t == "off" || t == "false" || t == "0") return false;
  throw ConfigError("expected on/off for " + key + ", got '" + t + "'", line);
}

std::vector<double> parse_list(const std::string& v, const std::string& key, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty entry in " + key, line);
    out.push_back(parse_double(item, key, line));
  }
  if (out.empty()) throw ConfigError("empty list for " + key, line);
  return out;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void apply_key(RunConfig& c, const std::string& section, const std::string& key,
               const std::string& value, int line) {
  const std::string where = section + "." + key;
  if (section == "grid") {
    if (key == "n") c.n = static_cast<int>(parse_int(value, where, line));
    else if (key == "length") c.length = parse_double(value, where, line);
    else throw ConfigError("unknown key " + where, line);
  } else if (section == "time") {
    if (key == "dt") c.dt = parse_double(value, where, line);
    else if (key == "t_final") c.t_final = parse_double(value, where, line);
    else if (key == "output_stride") c.output_stride = static_cast<int>(parse_int(value, where, line));
    else if (key == "ipca_stride") c.ipca_stride = static_cast<int>(parse_int(value, where, line));
    else throw ConfigError("unknown key " + where, line);
  } else if (section == "model") {
    if (key == "velocity") c.velocity = trim(value);
    else if (key == "nu") c.nu = parse_double(value, where, line);
    else if (key == "alpha_law") c.alpha_law = trim(value);
    else if (key == "alpha_c") c.alpha_c = parse_double(value, where, line);
    else if (key == "alpha_list") c.alpha_list = parse_list(value, where, line);
    else if (key == "source") c.source = trim(value);
    else if (key == "source_k") c.source_k = parse_double(value, where, line);
    else throw ConfigError("unknown key " + where, line);
  } else if (section == "species") {
    if (key == "n_s") c.n_s = static_cast<int>(parse_int(value, where, line));
    else if (key == "ic_b") c.ic_b = parse_double(value, where, line);
    else if (key == "ic_seed") c.ic_seed = parse_u64(value, where, line);
    else throw ConfigError("unknown key " + where, line);
  } else if (section == "reduction") {
    if (key == "r") c.r = static_cast<int>(parse_int(value, where, line));
    else if (key == "gauge") c.gauge = trim(value);
    else if (key == "gauge_seed") c.gauge_seed = parse_u64(value, where, line);
    else throw ConfigError("unknown key " + where, line);
  } else if (section == "outputs") {
    if (key == "directory") c.directory = trim(value);
    else if (key == "snapshots") c.snapshots = parse_bool(value, where, line);
    else if (key == "diagnostics") c.diagnostics = parse_bool(value, where, line);
    else if (key == "restart") c.restart = trim(value);
    else throw ConfigError("unknown key " + where, line);
  } else {
    throw ConfigError("unknown section [" + section + "]", line);
  }
}

}  // namespace

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::set<std::string> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line);
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError("empty section name", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value, got '" + s + "'", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line);
    if (section.empty()) throw ConfigError("key " + key + " appears before any [section]", line);
    const std::string where = section + "." + key;
    if (!seen.insert(where).second) throw ConfigError("duplicate key " + where, line);
    apply_key(c, section, key, value, line);
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == dotted_key.size())
    throw ConfigError("expected section.key, got '" + dotted_key + "'");
  apply_key(*this, dotted_key.substr(0, dot), dotted_key.substr(dot + 1), value, 0);
}

void RunConfig::validate() const {
  if (n < 2 || n % 2 != 0) throw ConfigError("grid.n must be even and >= 2");
  if (!(length > 0.0)) throw ConfigError("grid.length must be positive");
  if (!(dt > 0.0)) throw ConfigError("time.dt must be positive");
  if (t_final < 0.0) throw ConfigError("time.t_final must be nonnegative");
  const double steps = t_final / dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    throw ConfigError("time.t_final must be an integer multiple of time.dt");
  if (output_stride < 1) throw ConfigError("time.output_stride must be >= 1");
  if (ipca_stride < 1) throw ConfigError("time.ipca_stride must be >= 1");
  if (velocity != "burgers" && velocity != "zero")
    throw ConfigError("model.velocity must be burgers or zero");
  if (nu < 0.0) throw ConfigError("model.nu must be nonnegative");
  if (alpha_law != "c/sqrt(i)" && alpha_law != "list")
    throw ConfigError("model.alpha_law must be c/sqrt(i) or list");
  if (alpha_law == "c/sqrt(i)" && alpha_c < 0.0)
    throw ConfigError("model.alpha_c must be nonnegative");
  if (alpha_law == "list") {
    if (alpha_list.size() != static_cast<std::size_t>(n_s))
      throw ConfigError("model.alpha_list must have species.n_s entries");
    for (double a : alpha_list)
      if (a < 0.0) throw ConfigError("model.alpha_list entries must be nonnegative");
  }
  if (source != "none" && source != "toy_abc")
    throw ConfigError("model.source must be none or toy_abc");
  if (source == "toy_abc" && n_s < 3) throw ConfigError("model.source toy_abc needs n_s >= 3");
  if (!std::isfinite(source_k)) throw ConfigError("model.source_k must be finite");
  if (n_s < 1) throw ConfigError("species.n_s must be >= 1");
  if (!(ic_b > 0.0)) throw ConfigError("species.ic_b must be positive");
  if (r < 1 || r > std::min(n, n_s))
    throw ConfigError("reduction.r must satisfy 1 <= r <= min(grid.n, species.n_s)");
  if (gauge != "zero" && gauge != "random")
    throw ConfigError("reduction.gauge must be zero or random");
  if (directory.empty()) throw ConfigError("outputs.directory must not be empty");
}

std::string RunConfig::resolved_text() const {
  std::ostringstream out;
  out << "[grid]\n";
  out << "n = " << n << "\n";
  out << "length = " << format_number(length) << "\n";
  out << "\n[time]\n";
  out << "dt = " << format_number(dt) << "\n";
  out << "t_final = " << format_number(t_final) << "\n";
  out << "output_stride = " << output_stride << "\n";
  out << "ipca_stride = " << ipca_stride << "\n";
  out << "\n[model]\n";
  out << "velocity = " << velocity << "\n";
  out << "nu = " << format_number(nu) << "\n";
  out << "alpha_law = " << alpha_law << "\n";
  out << "alpha_c = " << format_number(alpha_c) << "\n";
  if (alpha_law == "list") {
    out << "alpha_list = ";
    for (std::size_t i = 0; i < alpha_list.size(); ++i)
      out << (i ? "," : "") << format_number(alpha_list[i]);
    out << "\n";
  }
  out << "source = " << source << "\n";
  out << "source_k = " << format_number(source_k) << "\n";
  out << "\n[species]\n";
  out << "n_s = " << n_s << "\n";
  out << "ic_b = " << format_number(ic_b) << "\n";
  out << "ic_seed = " << ic_seed << "\n";
  out << "\n[reduction]\n";
  out << "r = " << r << "\n";
  out << "gauge = " << gauge << "\n";
  out << "gauge_seed = " << gauge_seed << "\n";
  out << "\n[outputs]\n";
  out << "directory = " << directory << "\n";
  out << "snapshots = " << (snapshots ? "on" : "off") << "\n";
  out << "diagnostics = " << (diagnostics ? "on" : "off") << "\n";
  if (!restart.empty()) out << "restart = " << restart << "\n";
  return out.str();
}

Eigen::VectorXd RunConfig::alphas() const {
  if (alpha_law == "list") {
    Eigen::VectorXd a(static_cast<Eigen::Index>(alpha_list.size()));
    for (std::size_t i = 0; i < alpha_list.size(); ++i) a(static_cast<Eigen::Index>(i)) = alpha_list[i];
    return a;
  }
  Eigen::VectorXd a(n_s);
  for (int i = 0; i < n_s; ++i) a(i) = alpha_c / std::sqrt(static_cast<double>(i + 1));
  return a;
}

}  // namespace dbo
