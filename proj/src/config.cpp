#include "scns/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "scns/rng.hpp"

namespace scns {

namespace {

struct Token {
  std::string text;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '{' || c == '}' || c == '=') {
      out.push_back({std::string(1, c)});
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
             text[j] != '{' && text[j] != '}' && text[j] != '=' && text[j] != '#')
        ++j;
      out.push_back({text.substr(i, j - i)});
      i = j;
    }
  }
  return out;
}

// Flatten into "block.key" -> value ("" block for top level).
std::map<std::string, std::string> parse_pairs(const std::string& text) {
  auto toks = tokenize(text);
  std::map<std::string, std::string> kv;
  std::string block;
  for (std::size_t i = 0; i < toks.size();) {
    const std::string& t = toks[i].text;
    if (t == "}") {
      if (block.empty()) throw ConfigError("config: unmatched '}'");
      block.clear();
      ++i;
    } else if (i + 1 < toks.size() && toks[i + 1].text == "{") {
      if (!block.empty()) throw ConfigError("config: nested blocks are not supported");
      block = t;
      i += 2;
    } else if (i + 2 < toks.size() && toks[i + 1].text == "=") {
      std::string key = block.empty() ? t : block + "." + t;
      if (kv.count(key)) throw ConfigError("config: duplicate key " + key);
      kv[key] = toks[i + 2].text;
      i += 3;
    } else {
      throw ConfigError("config: cannot parse near '" + t + "'");
    }
  }
  if (!block.empty()) throw ConfigError("config: missing '}'");
  return kv;
}

double as_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ConfigError("config: " + key + " is not a number: " + v);
  }
}

std::int64_t as_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    std::int64_t d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ConfigError("config: " + key + " is not an integer: " + v);
  }
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: " + key + " is not a boolean: " + v);
}

std::vector<double> as_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (v == "none") return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(as_double(key, item));
  return out;
}

std::string list_to_string(const std::vector<double>& v) {
  if (v.empty()) return "none";
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  auto kv = parse_pairs(text);
  RunConfig c;
  for (const auto& [key, v] : kv) {
    if (key == "seed_root") c.seed_root = static_cast<std::uint64_t>(as_int(key, v));
    else if (key == "grid.d") c.d = static_cast<int>(as_int(key, v));
    else if (key == "grid.N") c.N = static_cast<int>(as_int(key, v));
    else if (key == "params.a") c.params.a = as_double(key, v);
    else if (key == "params.gamma") c.params.gamma = as_double(key, v);
    else if (key == "params.eps") c.params.eps = as_double(key, v);
    else if (key == "params.kappa") c.params.kappa = as_double(key, v);
    else if (key == "params.delta") c.params.delta = as_double(key, v);
    else if (key == "params.eta") c.params.eta = as_double(key, v);
    else if (key == "params.r0") c.params.r0 = as_double(key, v);
    else if (key == "params.r1") c.params.r1 = as_double(key, v);
    else if (key == "params.r2") c.params.r2 = as_double(key, v);
    else if (key == "params.m") c.params.m = static_cast<int>(as_int(key, v));
    else if (key == "params.R") c.params.R = as_double(key, v);
    else if (key == "params.n_mv") c.params.n_mv = static_cast<int>(as_int(key, v));
    else if (key == "params.h") c.params.h = as_double(key, v);
    else if (key == "params.dt") c.params.dt = as_double(key, v);
    else if (key == "params.rho_floor") c.params.rho_floor = as_double(key, v);
    else if (key == "noise.K_modes") c.k_modes = static_cast<int>(as_int(key, v));
    else if (key == "noise.f1") c.f1 = as_double(key, v);
    else if (key == "noise.decay") c.decay = as_double(key, v);
    else if (key == "noise.family") c.family = noise_family_from_string(v);
    else if (key == "initial.preset") c.preset = v;
    else if (key == "initial.rho0") c.rho0 = as_double(key, v);
    else if (key == "initial.rho_amp") c.rho_amp = as_double(key, v);
    else if (key == "initial.rho_mode") c.rho_mode = static_cast<int>(as_int(key, v));
    else if (key == "initial.u_amp") c.u_amp = as_double(key, v);
    else if (key == "initial.u_mode") c.u_mode = static_cast<int>(as_int(key, v));
    else if (key == "initial.seed") c.init_seed = static_cast<std::uint64_t>(as_int(key, v));
    else if (key == "run.T") c.T = as_double(key, v);
    else if (key == "run.record_dt") c.record_dt = as_double(key, v);
    else if (key == "run.mode") {
      if (v == "frozen") c.frozen_window = true;
      else if (v == "coupled") c.frozen_window = false;
      else throw ConfigError("config: run.mode must be frozen or coupled");
    } else if (key == "run.uniform_chi") c.uniform_chi = as_bool(key, v);
    else if (key == "run.track_balances") c.track_balances = as_bool(key, v);
    else if (key == "run.track_mv") c.track_mv = as_bool(key, v);
    else if (key == "run.mv_K") c.mv_K = as_double(key, v);
    else if (key == "ensemble.n_paths") c.ensemble.n_paths = static_cast<int>(as_int(key, v));
    else if (key == "ensemble.workers") c.ensemble.workers = static_cast<int>(as_int(key, v));
    else if (key == "ensemble.r_orders") c.ensemble.r_orders = as_list(key, v);
    else if (key == "schedule.stage1_count") c.schedule.stage1_count = static_cast<int>(as_int(key, v));
    else if (key == "schedule.eps0") c.schedule.eps0 = as_double(key, v);
    else if (key == "schedule.stage2_count") c.schedule.stage2_count = static_cast<int>(as_int(key, v));
    else if (key == "schedule.kappa0") c.schedule.kappa0 = as_double(key, v);
    else if (key == "schedule.stage3_n") {
      c.schedule.stage3_n.clear();
      for (double x : as_list(key, v)) c.schedule.stage3_n.push_back(static_cast<int>(x));
    } else if (key == "schedule.alpha") c.schedule.alpha = as_double(key, v);
    else if (key == "schedule.beta") c.schedule.beta = as_double(key, v);
    else if (key == "schedule.illustrative") c.schedule.illustrative = as_bool(key, v);
    else if (key == "schedule.alpha_illustrative") c.schedule.alpha_illustrative = as_double(key, v);
    else if (key == "schedule.beta_illustrative") c.schedule.beta_illustrative = as_double(key, v);
    else if (key == "schedule.stage4_count") c.schedule.stage4_count = static_cast<int>(as_int(key, v));
    else if (key == "schedule.r10") c.schedule.r10 = as_double(key, v);
    else if (key == "schedule.r20") c.schedule.r20 = as_double(key, v);
    else if (key == "output.dir") c.out_dir = v;
    else throw ConfigError("config: unknown key " + key);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

TorusGrid RunConfig::make_grid() const { return TorusGrid(d, N); }

NoiseModel RunConfig::make_noise() const {
  return NoiseModel::make(k_modes, f1, decay, family, seed_root, d);
}

FluidState RunConfig::make_initial() const {
  TorusGrid g = make_grid();
  SpectralField rho_raw = SpectralField::constant(g, rho0);
  SpectralField u_raw = SpectralField::zero(g, d);
  if (preset == "constant") {
    // keep the uniform fields
  } else if (preset == "single_mode") {
    std::vector<double> rv = rho_raw.values();
    std::vector<double> uv = u_raw.values();
    for (std::int64_t j = 0; j < g.points(); ++j) {
      auto x = g.coords(j);
      rv[j] += rho_amp * std::sin(6.283185307179586 * rho_mode * x[0]);
      uv[j] += u_amp * std::cos(6.283185307179586 * u_mode * x[0]);
    }
    rho_raw = SpectralField::from_values(g, 1, std::move(rv));
    u_raw = SpectralField::from_values(g, d, std::move(uv));
  } else if (preset == "random_smooth") {
    std::vector<double> rv = rho_raw.values();
    std::vector<double> uv = u_raw.values();
    for (std::int64_t j = 0; j < g.points(); ++j) {
      auto x = g.coords(j);
      double r = 0.0;
      for (int k = 1; k <= 3; ++k) {
        double a = gauss_draw(init_seed, 0, 0, 2 * k);
        double b = gauss_draw(init_seed, 0, 0, 2 * k + 1);
        double ph = 6.283185307179586 * k * x[0];
        r += (a * std::cos(ph) + b * std::sin(ph)) / (k * k);
      }
      rv[j] += rho_amp * 0.4 * r;
      for (int cmp = 0; cmp < d; ++cmp) {
        double uacc = 0.0;
        for (int k = 1; k <= 3; ++k) {
          double a = gauss_draw(init_seed, 1 + cmp, 0, 2 * k);
          double b = gauss_draw(init_seed, 1 + cmp, 0, 2 * k + 1);
          double ph = 6.283185307179586 *
                      k * (x[0] + (d > 1 ? x[1] : 0.0) + (d > 2 ? x[2] : 0.0));
          uacc += (a * std::cos(ph) + b * std::sin(ph)) / (k * k);
        }
        uv[cmp * g.points() + j] += u_amp * 0.4 * uacc;
      }
    }
    rho_raw = SpectralField::from_values(g, 1, std::move(rv));
    u_raw = SpectralField::from_values(g, d, std::move(uv));
  } else {
    throw ConfigError("config: unknown initial.preset " + preset);
  }
  return prepare_initial(rho_raw, u_raw, params);
}

RunOptions RunConfig::make_run_options() const {
  RunOptions o;
  o.record_dt = record_dt;
  o.track_balances = track_balances;
  o.track_mv_balance = track_mv;
  o.mv_K = mv_K;
  o.scheme.frozen_window = frozen_window;
  o.scheme.uniform_chi = uniform_chi;
  return o;
}

void RunConfig::validate() const {
  TorusGrid g = make_grid();
  params.validate(g);
  if (k_modes < 0) throw ConfigError("config: noise.K_modes must be nonnegative");
  if (f1 < 0.0) throw ConfigError("config: noise.f1 must be nonnegative");
  if (!(T >= 0.0)) throw ConfigError("config: run.T must be nonnegative");
  if (ensemble.n_paths < 1) throw ConfigError("config: ensemble.n_paths must be >= 1");
  if (ensemble.workers < 1) throw ConfigError("config: ensemble.workers must be >= 1");
  for (double r : ensemble.r_orders)
    if (!(r > 2.0)) throw ConfigError("config: ensemble.r_orders must exceed 2");
  if (preset != "constant" && preset != "single_mode" && preset != "random_smooth")
    throw ConfigError("config: unknown initial.preset " + preset);
}

std::string emit_config(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "seed_root = " << c.seed_root << "\n";
  os << "grid { d = " << c.d << "  N = " << c.N << " }\n";
  os << "params { a = " << c.params.a << "  gamma = " << c.params.gamma
     << "  eps = " << c.params.eps << "  kappa = " << c.params.kappa
     << "  delta = " << c.params.delta << "  eta = " << c.params.eta
     << "  r0 = " << c.params.r0 << "  r1 = " << c.params.r1
     << "  r2 = " << c.params.r2 << "  m = " << c.params.m << "  R = " << c.params.R
     << "  n_mv = " << c.params.n_mv << "  h = " << c.params.h
     << "  dt = " << c.params.dt << "  rho_floor = " << c.params.rho_floor << " }\n";
  os << "noise { K_modes = " << c.k_modes << "  f1 = " << c.f1
     << "  decay = " << c.decay << "  family = " << to_string(c.family) << " }\n";
  os << "initial { preset = " << c.preset << "  rho0 = " << c.rho0
     << "  rho_amp = " << c.rho_amp << "  rho_mode = " << c.rho_mode
     << "  u_amp = " << c.u_amp << "  u_mode = " << c.u_mode
     << "  seed = " << c.init_seed << " }\n";
  os << "run { T = " << c.T << "  record_dt = " << c.record_dt
     << "  mode = " << (c.frozen_window ? "frozen" : "coupled")
     << "  uniform_chi = " << (c.uniform_chi ? "true" : "false")
     << "  track_balances = " << (c.track_balances ? "true" : "false")
     << "  track_mv = " << (c.track_mv ? "true" : "false") << "  mv_K = " << c.mv_K
     << " }\n";
  os << "ensemble { n_paths = " << c.ensemble.n_paths
     << "  workers = " << c.ensemble.workers
     << "  r_orders = " << list_to_string(c.ensemble.r_orders) << " }\n";
  std::vector<double> n3(c.schedule.stage3_n.begin(), c.schedule.stage3_n.end());
  os << "schedule { stage1_count = " << c.schedule.stage1_count
     << "  eps0 = " << c.schedule.eps0
     << "  stage2_count = " << c.schedule.stage2_count
     << "  kappa0 = " << c.schedule.kappa0 << "  stage3_n = " << list_to_string(n3)
     << "  alpha = " << c.schedule.alpha << "  beta = " << c.schedule.beta
     << "  illustrative = " << (c.schedule.illustrative ? "true" : "false")
     << "  alpha_illustrative = " << c.schedule.alpha_illustrative
     << "  beta_illustrative = " << c.schedule.beta_illustrative
     << "  stage4_count = " << c.schedule.stage4_count << "  r10 = " << c.schedule.r10
     << "  r20 = " << c.schedule.r20 << " }\n";
  os << "output { dir = " << c.out_dir << " }\n";
  return os.str();
}

}  // namespace scns
