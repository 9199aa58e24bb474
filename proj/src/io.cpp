#include "msle/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "msle/errors.hpp"

namespace msle::io {

std::uint64_t digest_bytes(std::span<const char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoFailure("cannot open for digest: " + file.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(digest_bytes(data)));
  return buf;
}

void atomic_write(const std::filesystem::path& file, const std::string& content) {
  std::filesystem::create_directories(file.parent_path().empty() ? "." : file.parent_path());
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot write: " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, file);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string driving_paths_csv(const sde::DrivingPaths& paths) {
  std::ostringstream os;
  os << "# kind=" << (paths.kind == sde::DriverKind::dyson     ? "dyson"
                      : paths.kind == sde::DriverKind::flowline ? "flowline"
                                                                 : "constant")
     << " kappa=" << format_double(paths.params.kappa) << " n=" << paths.n_particles
     << " dt=" << format_double(paths.params.dt) << " seed=" << paths.params.seed << "\n";
  os << "t";
  for (int i = 0; i < paths.n_particles; ++i) os << ",x" << (i + 1);
  os << "\n";
  for (std::size_t k = 0; k < paths.steps(); ++k) {
    os << format_double(paths.times[k]);
    for (int i = 0; i < paths.n_particles; ++i) os << "," << format_double(paths.at(k, i));
    os << "\n";
  }
  return os.str();
}

std::string trace_csv(const loewner::Trace& trace) {
  std::ostringstream os;
  os << "# trace index=" << trace.index << " points=" << trace.points.size() << "\n";
  os << "t,re,im,eps\n";
  for (std::size_t k = 0; k < trace.points.size(); ++k) {
    os << format_double(trace.times[k]) << "," << format_double(trace.points[k].real()) << ","
       << format_double(trace.points[k].imag()) << "," << format_double(trace.eps_used[k])
       << "\n";
  }
  return os.str();
}

std::string grid_mask_csv(const loewner::SwallowGridResult& grid) {
  std::ostringstream os;
  os << "# swallow grid, " << grid.grid.size() << " points\n";
  os << "re,im,swallowed,tau\n";
  for (std::size_t k = 0; k < grid.grid.size(); ++k) {
    os << format_double(grid.grid[k].real()) << "," << format_double(grid.grid[k].imag()) << ","
       << int(grid.swallowed[k]) << ","
       << (grid.swallowed[k] ? format_double(grid.tau[k]) : "") << "\n";
  }
  return os.str();
}

namespace {
constexpr char kMagic[8] = {'M', 'S', 'L', 'E', 'P', 'T', 'H', '1'};

template <typename T>
void put(std::string& s, const T& v) {
  s.append(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T take(std::span<const char>& b) {
  if (b.size() < sizeof(T)) throw MalformedInput("truncated binary record");
  T v;
  std::memcpy(&v, b.data(), sizeof v);
  b = b.subspan(sizeof v);
  return v;
}
} // namespace

std::string driving_paths_binary(const sde::DrivingPaths& paths) {
  std::string s;
  s.append(kMagic, sizeof kMagic);
  put<std::uint32_t>(s, static_cast<std::uint32_t>(paths.n_particles));
  put<std::uint32_t>(s, static_cast<std::uint32_t>(paths.steps()));
  put<std::uint8_t>(s, static_cast<std::uint8_t>(paths.kind));
  put<double>(s, paths.params.kappa);
  put<double>(s, paths.params.dt);
  put<std::uint64_t>(s, paths.params.seed);
  for (double t : paths.times) put(s, t);
  // column-major: all of particle i, then particle i+1
  for (int i = 0; i < paths.n_particles; ++i)
    for (std::size_t k = 0; k < paths.steps(); ++k) put(s, paths.at(k, i));
  return s;
}

sde::DrivingPaths driving_paths_from_binary(std::span<const char> bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw MalformedInput("bad magic in binary path record");
  bytes = bytes.subspan(sizeof kMagic);
  sde::DrivingPaths out;
  const auto n = take<std::uint32_t>(bytes);
  const auto steps = take<std::uint32_t>(bytes);
  out.n_particles = static_cast<int>(n);
  out.kind = static_cast<sde::DriverKind>(take<std::uint8_t>(bytes));
  out.params.kappa = take<double>(bytes);
  out.params.dt = take<double>(bytes);
  out.params.seed = take<std::uint64_t>(bytes);
  out.times.resize(steps);
  for (auto& t : out.times) t = take<double>(bytes);
  out.values.assign(static_cast<std::size_t>(n) * steps, 0.0);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t k = 0; k < steps; ++k)
      out.values[static_cast<std::size_t>(k) * n + i] = take<double>(bytes);
  if (steps > 0) {
    out.params.initial_positions.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) out.params.initial_positions[i] = out.at(0, i);
    out.params.horizon = out.times.back();
  }
  return out;
}

std::vector<loewner::Trace> traces_from_csv(const std::string& content) {
  std::vector<loewner::Trace> traces;
  std::istringstream in(content);
  std::string line;
  loewner::Trace cur;
  bool any = false;
  auto flush = [&] {
    if (!cur.points.empty()) traces.push_back(std::move(cur));
    cur = {};
    cur.index = static_cast<int>(traces.size());
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (any) flush();
      continue;
    }
    if (line.rfind("t,", 0) == 0) continue;  // header row
    double t, re, im, eps = 0.0;
    const int got = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &re, &im, &eps);
    if (got < 3) throw MalformedInput("bad trace CSV row: " + line);
    cur.times.push_back(t);
    cur.points.push_back({re, im});
    cur.eps_used.push_back(eps);
    any = true;
  }
  flush();
  return traces;
}

namespace {
struct Extent {
  double x_lo = -1.0, x_hi = 1.0, y_hi = 1.0;
};

Extent fit(std::span<const loewner::Trace> traces) {
  Extent e;
  bool first = true;
  for (const auto& tr : traces)
    for (const auto& p : tr.points) {
      if (first) {
        e.x_lo = e.x_hi = p.real();
        e.y_hi = p.imag();
        first = false;
      }
      e.x_lo = std::min(e.x_lo, p.real());
      e.x_hi = std::max(e.x_hi, p.real());
      e.y_hi = std::max(e.y_hi, p.imag());
    }
  const double pad = 0.05 * std::max({e.x_hi - e.x_lo, e.y_hi, 1e-6});
  e.x_lo -= pad;
  e.x_hi += pad;
  e.y_hi += pad;
  return e;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
} // namespace

std::string traces_svg(std::span<const loewner::Trace> traces, const SvgStyle& style) {
  const Extent e = fit(traces);
  const double sx = style.width / (e.x_hi - e.x_lo);
  const double sy = style.height / e.y_hi;
  const double s = std::min(sx, sy);
  auto px = [&](double x) { return (x - e.x_lo) * s; };
  auto py = [&](double y) { return style.height - y * s; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
     << style.height + 20 << "\" viewBox=\"0 0 " << style.width << " " << style.height + 20
     << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height
     << "\" fill=\"white\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << px(e.x_lo) << "\" y1=\"" << py(0) << "\" x2=\"" << px(e.x_hi)
     << "\" y2=\"" << py(0) << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  int ci = 0;
  for (const auto& tr : traces) {
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[ci % 8]
       << "\" stroke-width=\"1.2\" points=\"";
    for (const auto& p : tr.points) os << px(p.real()) << "," << py(p.imag()) << " ";
    os << "\"/>\n";
    ++ci;
  }
  if (!style.caption.empty())
    os << "<text x=\"4\" y=\"" << style.height + 14 << "\" font-size=\"12\">" << style.caption
       << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string heatmap_svg(const std::vector<double>& values, int nx, int ny,
                        const SvgStyle& style) {
  double lo = 0.0, hi = 1.0;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
    if (hi <= lo) hi = lo + 1.0;
  }
  const double cw = style.width / std::max(1, nx);
  const double ch = style.height / std::max(1, ny);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
     << style.height + 20 << "\">\n";
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const double v = values[static_cast<std::size_t>(y) * nx + x];
      const int g = static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo)));
      os << "<rect x=\"" << x * cw << "\" y=\"" << (ny - 1 - y) * ch << "\" width=\"" << cw
         << "\" height=\"" << ch << "\" fill=\"rgb(" << g << "," << g << "," << g << ")\"/>\n";
    }
  if (!style.caption.empty())
    os << "<text x=\"4\" y=\"" << style.height + 14 << "\" font-size=\"12\">" << style.caption
       << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

} // namespace msle::io
