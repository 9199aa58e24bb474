#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msle/sde.hpp"

namespace msle::io {

enum class RunKind : std::uint8_t { simulate, trace, reparam, gff_check, phase_report, bench };

struct RunConfig {
  RunKind kind = RunKind::simulate;
  sde::SdeParams sde;
  int paths = 10;
  std::string out_dir;                      // empty: $MSLE_OUT or ./out
  std::vector<std::string> formats{"csv"};  // csv, json, svg, bin
  int workers = 0;                          // 0: hardware concurrency
  double tol = 0.02;

  // trace
  int trace_points = 200;
  double trace_eps = 0.0;        // 0: 4 sqrt(dt)
  bool trace_richardson = false;

  // reparam
  double reparam_s_extent = 0.2;
  double reparam_dt = 5e-3;
  int reparam_curve_points = 64;

  // gff-check
  double gff_t = 0.05;
  double gff_z_re = 0.0, gff_z_im = 2.0;
  double gff_w_re = -1.0, gff_w_im = 2.0;

  // phase-report
  double phase_disjoint_min = 0.95;

  // raw key/value snapshot for the manifest
  std::map<std::string, std::string> snapshot;
};

// line-oriented key=value with dotted sections ('#' comments), and the JSON
// equivalent (nested objects flatten to dotted keys). Unknown keys are
// rejected with the offending field path.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_json(const std::string& text);
RunConfig parse_config_file(const std::string& path);

std::string kind_name(RunKind k);

} // namespace msle::io
