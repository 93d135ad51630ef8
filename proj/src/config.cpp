#include "cipflow/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cipflow/errors.hpp"

namespace cipflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class LineError {
 public:
  LineError(std::string origin, int line) : origin_(std::move(origin)), line_(line) {}
  [[noreturn]] void operator()(const std::string& what) const {
    throw ConfigError(origin_ + ":" + std::to_string(line_) + ": " + what);
  }

 private:
  std::string origin_;
  int line_;
};

double to_double(const std::string& v, const LineError& fail) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail("expected a number, got '" + v + "'");
  return x;
}

int to_int(const std::string& v, const LineError& fail) {
  int x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail("expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const LineError& fail) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  fail("expected true or false, got '" + v + "'");
}

template <typename E>
E to_enum(const std::string& v, const std::map<std::string, E>& names, const LineError& fail) {
  const auto it = names.find(v);
  if (it != names.end()) return it->second;
  std::string options;
  for (const auto& [name, _] : names) options += (options.empty() ? "" : ", ") + name;
  fail("unknown value '" + v + "' (expected one of " + options + ")");
}

using Setter = std::function<void(RunConfig&, const std::string&, const LineError&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"case",
       {{"name", [](RunConfig& c, const std::string& v, const LineError&) { c.case_name = v; }},
        {"mu", [](RunConfig& c, const std::string& v, const LineError& f) { c.mu = to_double(v, f); }}}},
      {"discretization",
       {{"degree", [](RunConfig& c, const std::string& v, const LineError& f) { c.degree = to_int(v, f); }},
        {"levels",
         [](RunConfig& c, const std::string& v, const LineError& f) {
           c.levels.clear();
           std::istringstream in(v);
           std::string tok;
           while (in >> tok) c.levels.push_back(to_int(tok, f));
           if (c.levels.empty()) f("levels needs at least one mesh size");
         }},
        {"gamma_u", [](RunConfig& c, const std::string& v, const LineError& f) { c.gamma_u = to_double(v, f); }},
        {"gamma_p", [](RunConfig& c, const std::string& v, const LineError& f) { c.gamma_p = to_double(v, f); }},
        {"gamma", [](RunConfig& c, const std::string& v, const LineError& f) { c.gamma = to_double(v, f); }},
        {"eps_perp", [](RunConfig& c, const std::string& v, const LineError& f) { c.eps_perp = to_double(v, f); }},
        {"beta_inf", [](RunConfig& c, const std::string& v, const LineError& f) { c.beta_inf = to_double(v, f); }}}},
      {"time",
       {{"scheme",
         [](RunConfig& c, const std::string& v, const LineError& f) {
           c.scheme = to_enum<Scheme>(v,
                                      {{"imex_cn", Scheme::imex_cn},
                                       {"split_inviscid", Scheme::split_inviscid},
                                       {"split_viscous", Scheme::split_viscous}},
                                      f);
         }},
        {"convection",
         [](RunConfig& c, const std::string& v, const LineError& f) {
           c.convection = to_enum<ConvectionMode>(
               v, {{"oseen", ConvectionMode::oseen}, {"navier_stokes", ConvectionMode::navier_stokes}}, f);
         }},
        {"dirichlet",
         [](RunConfig& c, const std::string& v, const LineError& f) {
           c.dirichlet =
               to_enum<DirichletMode>(v, {{"nitsche", DirichletMode::nitsche}, {"strong", DirichletMode::strong}, {"strong_inflow", DirichletMode::strong_inflow}}, f);
         }},
        {"cfl_rule",
         [](RunConfig& c, const std::string& v, const LineError& f) {
           c.cfl_rule = to_enum<CflRule>(v, {{"hyperbolic", CflRule::hyperbolic}, {"four_thirds", CflRule::four_thirds}}, f);
         }},
        {"courant", [](RunConfig& c, const std::string& v, const LineError& f) { c.courant = to_double(v, f); }},
        {"tau", [](RunConfig& c, const std::string& v, const LineError& f) { c.tau = to_double(v, f); }},
        {"final_time", [](RunConfig& c, const std::string& v, const LineError& f) { c.final_time = to_double(v, f); }},
        {"explicit_viscosity",
         [](RunConfig& c, const std::string& v, const LineError& f) { c.explicit_viscosity = to_bool(v, f); }},
        {"blowup_factor",
         [](RunConfig& c, const std::string& v, const LineError& f) { c.blowup_factor = to_double(v, f); }}}},
      {"output",
       {{"directory", [](RunConfig& c, const std::string& v, const LineError&) { c.output_directory = v; }},
        {"stride", [](RunConfig& c, const std::string& v, const LineError& f) { c.stride = to_int(v, f); }}}},
  };
  return s;
}

}  // namespace

std::shared_ptr<const BenchmarkCase> RunConfig::make_bench() const { return make_case(case_name, mu.value_or(-1.0)); }

CflRule RunConfig::effective_cfl_rule() const {
  return cfl_rule.value_or(degree == 1 ? CflRule::hyperbolic : CflRule::four_thirds);
}

double RunConfig::effective_courant() const {
  return courant.value_or(effective_cfl_rule() == CflRule::hyperbolic ? 0.05 : 0.025);
}

std::vector<int> RunConfig::effective_levels() const {
  return levels.empty() ? make_bench()->default_levels() : levels;
}

double RunConfig::effective_final_time() const { return final_time.value_or(make_bench()->default_final_time()); }

PhysParams RunConfig::phys_params() const {
  PhysParams p = default_params(degree);
  p.mu = make_bench()->mu();
  p.gamma_u = gamma_u;
  p.gamma_p = gamma_p;
  if (gamma) p.gamma = *gamma;
  p.eps_perp = eps_perp;
  p.beta_inf = beta_inf;
  return p;
}

SteppingConfig RunConfig::stepping(double h) const {
  SteppingConfig s;
  s.scheme = scheme;
  s.convection = convection;
  s.dirichlet = dirichlet;
  s.tau = tau ? *tau : cfl_time_step(effective_cfl_rule(), effective_courant(), h);
  s.final_time = effective_final_time();
  s.explicit_viscosity = explicit_viscosity;
  s.blowup_factor = blowup_factor;
  return s;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const LineError fail(origin, line_no);
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().contains(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) fail("key '" + key + "' outside any section");
    const auto& keys = schema().at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) fail("unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) fail("duplicate key '" + key + "' in [" + section + "]");
    if (value.empty()) fail("missing value for '" + key + "'");
    it->second(cfg, value, fail);
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

void validate(const RunConfig& cfg) {
  const auto bench = cfg.make_bench();
  if (cfg.degree != 1 && cfg.degree != 2) throw ConfigError("degree must be 1 or 2");
  for (int n : cfg.levels)
    if (n < 1) throw ConfigError("mesh levels must be positive");
  if (cfg.mu && !(*cfg.mu > 0.0)) throw ConfigError("mu must be positive");
  if (cfg.stride < 1) throw ConfigError("stride must be at least 1");
  if (cfg.courant && !(*cfg.courant > 0.0)) throw ConfigError("courant must be positive");
  if (cfg.tau && !(*cfg.tau > 0.0)) throw ConfigError("tau must be positive");
  if (cfg.final_time && !(*cfg.final_time > 0.0)) throw ConfigError("final_time must be positive");
  if (cfg.scheme == Scheme::split_inviscid && !cfg.explicit_viscosity)
    throw ConfigError("split_inviscid has no implicit viscous part: it needs explicit_viscosity = true");
  if (cfg.convection == ConvectionMode::oseen && !bench->has_exact())
    throw ConfigError("oseen convection needs an exact velocity; case " + bench->name() + " has none");
  try {
    PhysParams p = cfg.phys_params();
    p.h = 1.0;
    p.validate();
  } catch (const SetupError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace cipflow
