#include "msle/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "msle/errors.hpp"

namespace msle::io {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      throw ConfigInvalid(key + ": bad number '" + tok + "'");
    }
  }
  return out;
}

double parse_num(const std::string& v, const std::string& key) {
  try {
    return std::stod(v);
  } catch (...) {
    throw ConfigInvalid(key + ": bad number '" + v + "'");
  }
}

RunConfig from_map(const std::map<std::string, std::string>& kv) {
  RunConfig c;
  c.snapshot = kv;
  for (const auto& [key, val] : kv) {
    if (key == "kind") {
      if (val == "simulate") c.kind = RunKind::simulate;
      else if (val == "trace") c.kind = RunKind::trace;
      else if (val == "reparam") c.kind = RunKind::reparam;
      else if (val == "gff-check") c.kind = RunKind::gff_check;
      else if (val == "phase-report") c.kind = RunKind::phase_report;
      else if (val == "bench") c.kind = RunKind::bench;
      else throw ConfigInvalid("kind: unknown experiment '" + val + "'");
    } else if (key == "sde.kappa") c.sde.kappa = parse_num(val, key);
    else if (key == "sde.positions") c.sde.initial_positions = parse_list(val, key);
    else if (key == "sde.dt") c.sde.dt = parse_num(val, key);
    else if (key == "sde.horizon") c.sde.horizon = parse_num(val, key);
    else if (key == "sde.seed") c.sde.seed = static_cast<std::uint64_t>(std::stoull(val));
    else if (key == "sde.collision_guard") c.sde.collision_guard = parse_num(val, key);
    else if (key == "ensemble.paths") c.paths = static_cast<int>(parse_num(val, key));
    else if (key == "out.dir") c.out_dir = val;
    else if (key == "out.formats") {
      c.formats.clear();
      std::stringstream ss(val);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok != "csv" && tok != "json" && tok != "svg" && tok != "bin")
          throw ConfigInvalid("out.formats: unknown format '" + tok + "'");
        c.formats.push_back(tok);
      }
    } else if (key == "workers") c.workers = static_cast<int>(parse_num(val, key));
    else if (key == "tol") c.tol = parse_num(val, key);
    else if (key == "trace.points") c.trace_points = static_cast<int>(parse_num(val, key));
    else if (key == "trace.eps") c.trace_eps = parse_num(val, key);
    else if (key == "trace.richardson") c.trace_richardson = (val == "true" || val == "1");
    else if (key == "reparam.s_extent") c.reparam_s_extent = parse_num(val, key);
    else if (key == "reparam.dt") c.reparam_dt = parse_num(val, key);
    else if (key == "reparam.curve_points")
      c.reparam_curve_points = static_cast<int>(parse_num(val, key));
    else if (key == "gff.t") c.gff_t = parse_num(val, key);
    else if (key == "gff.z_re") c.gff_z_re = parse_num(val, key);
    else if (key == "gff.z_im") c.gff_z_im = parse_num(val, key);
    else if (key == "gff.w_re") c.gff_w_re = parse_num(val, key);
    else if (key == "gff.w_im") c.gff_w_im = parse_num(val, key);
    else if (key == "phase.disjoint_min") c.phase_disjoint_min = parse_num(val, key);
    else throw ConfigInvalid("unknown key '" + key + "'");
  }
  if (c.sde.initial_positions.empty()) c.sde.initial_positions = {0.0};
  c.sde.validate();
  if (c.paths < 1) throw ConfigInvalid("ensemble.paths: must be >= 1");
  if (c.tol <= 0.0) throw ConfigInvalid("tol: must be positive");
  return c;
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid("line " + std::to_string(ln) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return from_map(kv);
}

namespace {
void flatten(const nlohmann::json& j, const std::string& prefix,
             std::map<std::string, std::string>& kv) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten(*it, key, kv);
    } else if (it->is_string()) {
      kv[key] = it->get<std::string>();
    } else if (it->is_array()) {
      std::string s;
      for (const auto& e : *it) {
        if (!s.empty()) s += ",";
        s += e.is_string() ? e.get<std::string>() : e.dump();
      }
      kv[key] = s;
    } else {
      kv[key] = it->dump();
    }
  }
}
} // namespace

RunConfig parse_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigInvalid(std::string("JSON parse: ") + e.what());
  }
  if (!j.is_object()) throw ConfigInvalid("config JSON must be an object");
  std::map<std::string, std::string> kv;
  flatten(j, "", kv);
  return from_map(kv);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot read config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_config_json(text);
  return parse_config_text(text);
}

std::string kind_name(RunKind k) {
  switch (k) {
    case RunKind::simulate: return "simulate";
    case RunKind::trace: return "trace";
    case RunKind::reparam: return "reparam";
    case RunKind::gff_check: return "gff-check";
    case RunKind::phase_report: return "phase-report";
    case RunKind::bench: return "bench";
  }
  return "?";
}

} // namespace msle::io
