#include "modsafe/config.hpp"

#include <cctype>
#include <functional>
#include <sstream>

#include "modsafe/csv_io.hpp"

namespace modsafe {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ConfigError("invalid value for '" + key + "': " + value);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) bad_value(key, value);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) bad_value(key, value);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size() || (!value.empty() && value[0] == '-'))
      bad_value(key, value);
    return static_cast<std::uint64_t>(v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes")
    return true;
  if (value == "false" || value == "0" || value == "off" || value == "no")
    return false;
  bad_value(key, value);
}

Vec parse_vec(const std::string& key, const std::string& value) {
  std::string cleaned = value;
  for (char& c : cleaned)
    if (c == ',') c = ' ';
  std::istringstream in(cleaned);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) vals.push_back(parse_double(key, tok));
  if (vals.empty()) bad_value(key, value);
  Vec out(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = vals[i];
  return out;
}

std::vector<Vec> parse_vec_list(const std::string& key,
                                const std::string& value) {
  std::vector<Vec> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t semi = value.find(';', start);
    const std::string group =
        trim(value.substr(start, semi == std::string::npos ? std::string::npos
                                                           : semi - start));
    if (!group.empty()) out.push_back(parse_vec(key, group));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  if (out.empty()) bad_value(key, value);
  return out;
}

std::vector<EstimatorLaw> parse_laws(const std::string& key,
                                     const std::string& value) {
  std::string cleaned = value;
  for (char& c : cleaned)
    if (c == ',') c = ' ';
  std::istringstream in(cleaned);
  std::vector<EstimatorLaw> out;
  std::string tok;
  while (in >> tok) {
    try {
      out.push_back(parse_estimator_law(tok));
    } catch (const std::exception&) {
      bad_value(key, value);
    }
  }
  if (out.empty()) bad_value(key, value);
  return out;
}

using Handler = std::function<void(SimConfig&, const std::string&,
                                   const std::string&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"system.name",
       [](SimConfig& c, const std::string&, const std::string& v) {
         c.system_name = v;
       }},
      {"system.theta",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.theta_true = parse_vec(k, v);
       }},
      {"sim.dt",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.dt = parse_double(k, v);
       }},
      {"sim.horizon",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.horizon = parse_double(k, v);
       }},
      {"sim.seed",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.seed = parse_u64(k, v);
       }},
      {"sim.runs",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.runs = parse_int(k, v);
       }},
      {"sim.threads",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.threads = parse_int(k, v);
       }},
      {"sim.x0",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.x0 = parse_vec(k, v);
       }},
      {"sim.that0",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.that0 = parse_vec(k, v);
       }},
      {"sim.x0_lo",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.x0_lo = parse_vec(k, v);
       }},
      {"sim.x0_hi",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.x0_hi = parse_vec(k, v);
       }},
      {"sim.that0_lo",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.that0_lo = parse_vec(k, v);
       }},
      {"sim.that0_hi",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.that0_hi = parse_vec(k, v);
       }},
      {"estimator.enabled",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.estimator_enabled = parse_bool(k, v);
       }},
      {"estimator.law",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         try {
           c.law = parse_estimator_law(v);
         } catch (const std::exception&) {
           bad_value(k, v);
         }
       }},
      {"estimator.N",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.stack_capacity = parse_int(k, v);
       }},
      {"estimator.gamma0",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.gamma0 = parse_double(k, v);
       }},
      {"estimator.beta",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.beta = parse_double(k, v);
       }},
      {"estimator.gamma_bar",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.gamma_bar = parse_double(k, v);
       }},
      {"estimator.window_dt",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.window_dt = parse_double(k, v);
       }},
      {"clf.c3",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.clf_c3 = parse_double(k, v);
       }},
      {"clf.eps_v",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.clf_eps_v = parse_double(k, v);
       }},
      {"cbf.enabled",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.cbf_enabled = parse_bool(k, v);
       }},
      {"cbf.eps_h",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.cbf_eps_h = parse_double(k, v);
       }},
      {"cbf.alpha1_lambda",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.alpha1_lambda = parse_double(k, v);
       }},
      {"cbf.alpha2_lambda",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.alpha2_lambda = parse_double(k, v);
       }},
      {"cbf.obstacle_center",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.obstacle_center = parse_vec(k, v);
       }},
      {"cbf.obstacle_radius",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.obstacle_radius = parse_double(k, v);
       }},
      {"cbf.margin",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.obstacle_margin = parse_double(k, v);
       }},
      {"montecarlo.laws",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.mc_laws = parse_laws(k, v);
       }},
      {"sweep.that0",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.sweep_that0 = parse_vec_list(k, v);
       }},
      {"sweep.laws",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.sweep_laws = parse_laws(k, v);
       }},
  };
  return table;
}

std::string join_vec(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v(i));
  }
  return out;
}

std::string join_laws(const std::vector<EstimatorLaw>& laws) {
  std::string out;
  for (std::size_t i = 0; i < laws.size(); ++i) {
    if (i) out += ", ";
    out += estimator_law_name(laws[i]);
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

void apply_assignment(std::map<std::string, std::string>& kv,
                      const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("expected 'key=value', got '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (key.empty()) throw ConfigError("empty key in '" + assignment + "'");
  kv[key] = value;
}

SimConfig sim_config_from(const std::map<std::string, std::string>& kv) {
  SimConfig cfg;
  const auto& table = handlers();
  for (const auto& [key, value] : kv) {
    if (key.rfind("manifest.", 0) == 0) continue;
    const auto it = table.find(key);
    if (it == table.end())
      throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
  }
  return cfg;
}

std::string serialize_sim_config(const SimConfig& cfg) {
  std::string out;
  auto put = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  put("system.name", cfg.system_name);
  put("system.theta", join_vec(cfg.theta_true));
  put("sim.dt", format_double(cfg.dt));
  put("sim.horizon", format_double(cfg.horizon));
  put("sim.seed", std::to_string(cfg.seed));
  put("sim.runs", std::to_string(cfg.runs));
  put("sim.threads", std::to_string(cfg.threads));
  put("sim.x0", join_vec(cfg.x0));
  put("sim.that0", join_vec(cfg.that0));
  put("sim.x0_lo", join_vec(cfg.x0_lo));
  put("sim.x0_hi", join_vec(cfg.x0_hi));
  put("sim.that0_lo", join_vec(cfg.that0_lo));
  put("sim.that0_hi", join_vec(cfg.that0_hi));
  put("estimator.enabled", cfg.estimator_enabled ? "true" : "false");
  put("estimator.law", estimator_law_name(cfg.law));
  put("estimator.N", std::to_string(cfg.stack_capacity));
  put("estimator.gamma0", format_double(cfg.gamma0));
  put("estimator.beta", format_double(cfg.beta));
  put("estimator.gamma_bar", format_double(cfg.gamma_bar));
  put("estimator.window_dt", format_double(cfg.window_dt));
  put("clf.c3", format_double(cfg.clf_c3));
  put("clf.eps_v", format_double(cfg.clf_eps_v));
  put("cbf.enabled", cfg.cbf_enabled ? "true" : "false");
  put("cbf.eps_h", format_double(cfg.cbf_eps_h));
  put("cbf.alpha1_lambda", format_double(cfg.alpha1_lambda));
  put("cbf.alpha2_lambda", format_double(cfg.alpha2_lambda));
  put("cbf.obstacle_center", join_vec(cfg.obstacle_center));
  put("cbf.obstacle_radius", format_double(cfg.obstacle_radius));
  put("cbf.margin", format_double(cfg.obstacle_margin));
  put("montecarlo.laws", join_laws(cfg.mc_laws));
  std::string groups;
  for (std::size_t i = 0; i < cfg.sweep_that0.size(); ++i) {
    if (i) groups += "; ";
    groups += join_vec(cfg.sweep_that0[i]);
  }
  put("sweep.that0", groups);
  put("sweep.laws", join_laws(cfg.sweep_laws));
  return out;
}

}  // namespace modsafe
