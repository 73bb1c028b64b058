#include "perimlab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "perimlab/dimension.hpp"
#include "perimlab/energy.hpp"
#include "perimlab/ginibre.hpp"
#include "perimlab/kernel.hpp"
#include "perimlab/reference.hpp"
#include "perimlab/rng.hpp"
#include "perimlab/stats.hpp"

namespace fs = std::filesystem;

namespace perimlab {

std::string code_version() {
#ifdef PERIMLAB_SOURCE_HASH
  return PERIMLAB_SOURCE_HASH;
#else
  return "unversioned";
#endif
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || t.empty()) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return v;
}

using Params = std::map<std::string, std::string>;

std::string get_str(const Params& p, const std::string& key, const std::string& dflt) {
  const auto it = p.find(key);
  return it == p.end() ? dflt : it->second;
}

double get_num(const Params& p, const std::string& key, double dflt) {
  const auto it = p.find(key);
  return it == p.end() ? dflt : parse_number(it->second);
}

int get_int(const Params& p, const std::string& key, int dflt) {
  return static_cast<int>(std::llround(get_num(p, key, dflt)));
}

std::int64_t get_i64(const Params& p, const std::string& key, std::int64_t dflt) {
  return std::llround(get_num(p, key, static_cast<double>(dflt)));
}

std::vector<int> parse_int_grid(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_grid(text)) out.push_back(static_cast<int>(std::llround(v)));
  return out;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw std::invalid_argument("parse_grid: empty grid");
  const auto c1 = t.find(':');
  if (c1 != std::string::npos) {
    const auto c2 = t.find(':', c1 + 1);
    if (c2 == std::string::npos || t.find(':', c2 + 1) != std::string::npos) {
      throw std::invalid_argument("parse_grid: expected a:b:logN or a:b:linN in '" + t + "'");
    }
    const double a = parse_number(t.substr(0, c1));
    const double b = parse_number(t.substr(c1 + 1, c2 - c1 - 1));
    const std::string kind = trim(t.substr(c2 + 1));
    if (kind.size() < 4 || (kind.rfind("log", 0) != 0 && kind.rfind("lin", 0) != 0)) {
      throw std::invalid_argument("parse_grid: bad grid kind in '" + t + "'");
    }
    const int n = static_cast<int>(std::llround(parse_number(kind.substr(3))));
    if (n < 2) throw std::invalid_argument("parse_grid: need at least 2 points");
    std::vector<double> out(static_cast<std::size_t>(n));
    if (kind[1] == 'o') {  // log
      if (!(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("parse_grid: log grid endpoints must be positive");
      }
      const double ratio = b / a;
      for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] =
            a * std::pow(ratio, static_cast<double>(i) / (n - 1));
      }
    } else {
      for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / (n - 1);
      }
    }
    return out;
  }
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= t.size()) {
    const auto comma = t.find(',', start);
    const std::string item = t.substr(start, comma == std::string::npos ? comma : comma - start);
    out.push_back(parse_number(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("parse_grid: empty grid");
  return out;
}

Polygon make_shape(const std::map<std::string, std::string>& params) {
  const auto it = params.find("shape");
  if (it == params.end()) throw std::invalid_argument("make_shape: missing 'shape' parameter");
  std::string shape = trim(it->second);
  std::string arg;
  if (const auto pos = shape.find(':'); pos != std::string::npos) {
    arg = shape.substr(pos + 1);
    shape = shape.substr(0, pos);
  }

  Polygon poly = [&]() -> Polygon {
    if (shape == "square") return make_square(get_num(params, "side", 1.0));
    if (shape == "disk") {
      const double r = arg.empty() ? get_num(params, "radius", 1.0) : parse_number(arg);
      return make_regular_ngon(r, get_int(params, "edges", 256));
    }
    if (shape == "halfdisk") {
      bool upper = true;
      if (arg == "lower") {
        upper = false;
      } else if (!arg.empty() && arg != "upper") {
        throw std::invalid_argument("make_shape: halfdisk side must be 'upper' or 'lower'");
      }
      return make_half_disk(get_num(params, "radius", 1.0), get_int(params, "edges", 256),
                            upper);
    }
    if (shape == "ngon") {
      return make_regular_ngon(get_num(params, "radius", 1.0), get_int(params, "edges", 6));
    }
    if (shape == "snowflake") {
      SnowflakeSpec spec;
      spec.eta = get_num(params, "eta", 3.0);
      spec.depth = get_int(params, "depth", 4);
      spec.side = get_num(params, "side", 1.0);
      return build_snowflake(spec);
    }
    throw std::invalid_argument("make_shape: unknown shape '" + shape + "'");
  }();

  const double cx = get_num(params, "center_x", 0.0);
  const double cy = get_num(params, "center_y", 0.0);
  if (cx != 0.0 || cy != 0.0) poly = poly.scaled_translated(1.0, {cx, cy});
  return poly;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_spec: cannot open '" + path + "'");
  ExperimentSpec spec;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) {
      line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("load_spec: " + path + ":" + std::to_string(lineno) +
                                  ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("load_spec: " + path + ":" + std::to_string(lineno) +
                                  ": empty key");
    }
    if (key == "name") {
      spec.name = value;
    } else if (key == "seed") {
      char* end = nullptr;
      spec.seed = std::strtoull(value.c_str(), &end, 10);
      if (end != value.c_str() + value.size() || value.empty()) {
        throw std::invalid_argument("load_spec: bad seed '" + value + "'");
      }
    } else if (key == "outdir") {
      spec.outdir = value;
    } else {
      spec.params[key] = value;
    }
  }
  if (spec.name.empty()) throw std::invalid_argument("load_spec: missing 'name'");
  return spec;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace

std::string to_json(const ResultRecord& record) {
  std::ostringstream o;
  o << "{\n";
  o << "  \"experiment\": \"" << json_escape(record.experiment) << "\",\n";
  o << "  \"spec_hash\": \"" << json_escape(record.spec_hash) << "\",\n";
  o << "  \"code_version\": \"" << json_escape(record.code_version) << "\",\n";
  o << "  \"metrics\": [\n";
  for (std::size_t i = 0; i < record.metrics.size(); ++i) {
    const MetricRecord& m = record.metrics[i];
    o << "    {\"name\": \"" << json_escape(m.name) << "\", \"value\": " << format_double(m.value)
      << ", \"se\": " << format_double(m.se)
      << ", \"threshold\": " << format_double(m.threshold)
      << ", \"has_threshold\": " << (m.has_threshold ? "true" : "false")
      << ", \"pass\": " << (m.pass ? "true" : "false") << "}"
      << (i + 1 < record.metrics.size() ? "," : "") << "\n";
  }
  o << "  ],\n";
  o << "  \"artifacts\": [";
  for (std::size_t i = 0; i < record.artifacts.size(); ++i) {
    o << "\"" << json_escape(record.artifacts[i]) << "\""
      << (i + 1 < record.artifacts.size() ? ", " : "");
  }
  o << "],\n";
  o << "  \"wall_seconds\": " << format_double(record.wall_seconds) << ",\n";
  o << "  \"pass\": " << (record.pass ? "true" : "false") << "\n";
  o << "}\n";
  return o.str();
}

std::string param_hash(const std::map<std::string, std::string>& params) {
  std::string blob;
  for (const auto& [k, v] : params) {
    blob += k;
    blob += '=';
    blob += v;
    blob += '\n';
  }
  blob += "code=" + code_version();
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(blob)));
  return buf;
}

ResultCache::ResultCache(std::string dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

bool ResultCache::lookup(const std::string& key, std::string* json_out) const {
  std::ifstream in(fs::path(dir_) / (key + ".json"), std::ios::binary);
  if (!in) return false;
  std::ostringstream body;
  body << in.rdbuf();
  if (!in.good() && !in.eof()) return false;
  *json_out = body.str();
  return true;
}

void ResultCache::store(const std::string& key, const std::string& json) const {
  const fs::path final_path = fs::path(dir_) / (key + ".json");
  const fs::path tmp_path = fs::path(dir_) / (key + ".tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << json;
  }
  fs::rename(tmp_path, final_path);
}

// ---------------------------------------------------------------------------
// SVG rendering

namespace {

const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                           "#ff7f0e", "#8c564b"};

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, bool log_axis) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", log_axis ? std::pow(10.0, v) : v);
  return buf;
}

}  // namespace

std::string render_svg(const std::vector<SvgSeries>& series, const SvgOptions& options) {
  if (series.empty()) throw std::invalid_argument("empty dataset");
  for (const SvgSeries& s : series) {
    if (s.points.empty()) throw std::invalid_argument("empty dataset");
  }

  // transformed coordinates (log10 where requested)
  std::vector<std::vector<Vec2>> txy(series.size());
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (std::size_t i = 0; i < series.size(); ++i) {
    txy[i].reserve(series[i].points.size());
    for (const Vec2& p : series[i].points) {
      if ((options.log_x && !(p.x > 0.0)) || (options.log_y && !(p.y > 0.0))) {
        throw std::invalid_argument("nonpositive value on log axis");
      }
      const Vec2 q{options.log_x ? std::log10(p.x) : p.x,
                   options.log_y ? std::log10(p.y) : p.y};
      txy[i].push_back(q);
      if (first) {
        xmin = xmax = q.x;
        ymin = ymax = q.y;
        first = false;
      } else {
        xmin = std::min(xmin, q.x);
        xmax = std::max(xmax, q.x);
        ymin = std::min(ymin, q.y);
        ymax = std::max(ymax, q.y);
      }
    }
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }

  const double w = options.width, h = options.height;
  const double left = 70, right = 20, top = 34, bottom = 48;
  const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (w - left - right); };
  const auto py = [&](double y) { return h - bottom - (y - ymin) / (ymax - ymin) * (h - top - bottom); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
    << options.height << "\" viewBox=\"0 0 " << options.width << " " << options.height
    << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<rect x=\"" << fixed2(left) << "\" y=\"" << fixed2(top) << "\" width=\""
    << fixed2(w - left - right) << "\" height=\"" << fixed2(h - top - bottom)
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  o << "<g font-family=\"monospace\" font-size=\"11\" fill=\"#222\">\n";
  if (!options.title.empty()) {
    o << "<text x=\"" << fixed2(w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
      << json_escape(options.title) << "</text>\n";
  }
  for (int i = 0; i < 5; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    o << "<line x1=\"" << fixed2(px(fx)) << "\" y1=\"" << fixed2(h - bottom) << "\" x2=\""
      << fixed2(px(fx)) << "\" y2=\"" << fixed2(h - bottom + 5) << "\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << fixed2(px(fx)) << "\" y=\"" << fixed2(h - bottom + 18)
      << "\" text-anchor=\"middle\">" << tick_label(fx, options.log_x) << "</text>\n";
    o << "<line x1=\"" << fixed2(left - 5) << "\" y1=\"" << fixed2(py(fy)) << "\" x2=\""
      << fixed2(left) << "\" y2=\"" << fixed2(py(fy)) << "\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << fixed2(left - 8) << "\" y=\"" << fixed2(py(fy) + 4)
      << "\" text-anchor=\"end\">" << tick_label(fy, options.log_y) << "</text>\n";
  }
  if (!options.x_label.empty()) {
    o << "<text x=\"" << fixed2((left + w - right) / 2) << "\" y=\"" << fixed2(h - 10)
      << "\" text-anchor=\"middle\">" << json_escape(options.x_label) << "</text>\n";
  }
  if (!options.y_label.empty()) {
    o << "<text x=\"14\" y=\"" << fixed2((top + h - bottom) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << fixed2((top + h - bottom) / 2) << ")\">" << json_escape(options.y_label)
      << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % 6];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const Vec2& q : txy[i]) {
      o << fixed2(px(q.x)) << "," << fixed2(py(q.y)) << " ";
    }
    o << "\"/>\n";
    const double ly = top + 14 + 14 * static_cast<double>(i);
    o << "<rect x=\"" << fixed2(left + 8) << "\" y=\"" << fixed2(ly - 8)
      << "\" width=\"9\" height=\"9\" fill=\"" << color << "\"/>\n";
    o << "<text x=\"" << fixed2(left + 22) << "\" y=\"" << fixed2(ly) << "\">"
      << json_escape(series[i].label) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

std::string polygon_path_data(const Polygon& poly) {
  const auto& v = poly.vertices();
  std::string out = "M " + format_double(v[0].x) + " " + format_double(v[0].y);
  for (std::size_t i = 1; i < v.size(); ++i) {
    out += " L " + format_double(v[i].x) + " " + format_double(v[i].y);
  }
  out += " Z";
  return out;
}

// ---------------------------------------------------------------------------
// Experiment registry

namespace {

MetricRecord info_metric(std::string name, double value, double se = 0.0) {
  MetricRecord m;
  m.name = std::move(name);
  m.value = value;
  m.se = se;
  return m;
}

// pass when value <= threshold
MetricRecord max_metric(std::string name, double value, double threshold, double se = 0.0) {
  MetricRecord m;
  m.name = std::move(name);
  m.value = value;
  m.se = se;
  m.threshold = threshold;
  m.has_threshold = true;
  m.pass = value <= threshold;
  return m;
}

// pass when value >= threshold
MetricRecord min_metric(std::string name, double value, double threshold, double se = 0.0) {
  MetricRecord m;
  m.name = std::move(name);
  m.value = value;
  m.se = se;
  m.threshold = threshold;
  m.has_threshold = true;
  m.pass = value >= threshold;
  return m;
}

MetricRecord flag_metric(std::string name, bool ok) {
  MetricRecord m;
  m.name = std::move(name);
  m.value = ok ? 1.0 : 0.0;
  m.threshold = 1.0;
  m.has_threshold = true;
  m.pass = ok;
  return m;
}

void write_artifact(const ExperimentSpec& spec, ResultRecord& rec, const std::string& name,
                    const std::string& content) {
  std::ofstream out(fs::path(spec.outdir) / name, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write artifact " + name);
  out << content;
  rec.artifacts.push_back(name);
}

SvgSeries make_series(std::string label, const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  SvgSeries s;
  s.label = std::move(label);
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
    s.points.push_back({xs[i], ys[i]});
  }
  return s;
}

RadialKernel kernel_from(const Params& params) {
  std::string name = get_str(params, "kernel", "gaussian");
  std::string arg;
  if (const auto pos = name.find(':'); pos != std::string::npos) {
    arg = name.substr(pos + 1);
    name = name.substr(0, pos);
  }
  if (name == "gaussian") return RadialKernel::gaussian();
  if (name == "exponential") return RadialKernel::exponential();
  if (name == "ball") return RadialKernel::ball(arg.empty() ? 1.0 : parse_number(arg));
  if (name == "gef") return RadialKernel::gef();
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

// --- dimension-equation -----------------------------------------------------

void exp_dimension_equation(const ExperimentSpec& spec, ResultRecord& rec) {
  const std::vector<double> etas = parse_grid(get_str(spec.params, "etas", "3,4,5,7,10"));
  std::string csv = "eta,alpha,residual\n";
  for (double eta : etas) {
    const double alpha = solve_alpha(eta);
    const SnowflakeSpec s{eta, 0, 1.0};
    const double residual =
        std::fabs(2.0 * std::pow(s.r1(), alpha) + 2.0 * std::pow(s.r2(), alpha) - 1.0);
    rec.metrics.push_back(
        max_metric("residual_eta" + format_double(eta), residual, 1e-13));
    csv += format_double(eta) + "," + format_double(alpha) + "," + format_double(residual) + "\n";
  }
  const double alpha3_err = std::fabs(solve_alpha(3.0) - std::log(4.0) / std::log(3.0));
  rec.metrics.push_back(max_metric("alpha_eta3_vs_log3_4", alpha3_err, 1e-12));
  write_artifact(spec, rec, "alpha.csv", csv);
}

// --- lattice-classification -------------------------------------------------

void exp_lattice_classification(const ExperimentSpec& spec, ResultRecord& rec) {
  const std::int64_t bound = get_i64(spec.params, "max_denominator", 1000000);
  const LatticeVerdict v3 = check_nonlattice(3.0, bound);
  const LatticeVerdict v2 = check_nonlattice(2.0, bound);
  const LatticeVerdict v5 = check_nonlattice(5.0, bound);
  rec.metrics.push_back(flag_metric(
      "eta3_lattice_ratio_1",
      v3.kind == LatticeVerdict::Kind::lattice && v3.p == 1 && v3.q == 1));
  rec.metrics.push_back(flag_metric(
      "eta2_lattice_ratio_2",
      v2.kind == LatticeVerdict::Kind::lattice && v2.p == 2 && v2.q == 1));
  rec.metrics.push_back(min_metric(
      "eta5_nonlattice_bound",
      v5.kind == LatticeVerdict::Kind::nonlattice_up_to ? static_cast<double>(v5.bound) : 0.0,
      1000000.0));
  std::string csv = "eta,rho,p,q,err,kind\n";
  const std::pair<double, const LatticeVerdict*> rows[] = {{3.0, &v3}, {2.0, &v2}, {5.0, &v5}};
  for (const auto& [eta, v] : rows) {
    csv += format_double(eta) + "," + format_double(v->rho) + "," + std::to_string(v->p) +
           "," + std::to_string(v->q) + "," + format_double(v->err) + "," +
           (v->kind == LatticeVerdict::Kind::lattice ? "lattice" : "nonlattice_up_to") + "\n";
  }
  write_artifact(spec, rec, "lattice.csv", csv);
}

// --- snowflake-geometry -----------------------------------------------------

void exp_snowflake_geometry(const ExperimentSpec& spec, ResultRecord& rec) {
  SnowflakeSpec s;
  s.eta = get_num(spec.params, "eta", 3.0);
  s.depth = get_int(spec.params, "depth", 6);
  s.side = get_num(spec.params, "side", 1.0);
  const Polygon poly = build_snowflake(s);

  double expected_edges = 3.0;
  for (int i = 0; i < s.depth; ++i) expected_edges *= 4.0;
  const double edge_defect =
      std::fabs(static_cast<double>(poly.vertices().size()) - expected_edges);
  const double per_err = std::fabs(poly.perimeter() - snowflake_perimeter_closed_form(s)) /
                         snowflake_perimeter_closed_form(s);
  const double area_err = std::fabs(poly.area() - snowflake_area_closed_form(s));
  rec.metrics.push_back(max_metric("edge_count_defect", edge_defect, 0.5));
  rec.metrics.push_back(max_metric("perimeter_rel_err", per_err, 1e-12));
  rec.metrics.push_back(max_metric("area_abs_err", area_err, 1e-10));

  std::string csv = "quantity,value,closed_form\n";
  csv += "edges," + format_double(static_cast<double>(poly.vertices().size())) + "," +
         format_double(expected_edges) + "\n";
  csv += "perimeter," + format_double(poly.perimeter()) + "," +
         format_double(snowflake_perimeter_closed_form(s)) + "\n";
  csv += "area," + format_double(poly.area()) + "," +
         format_double(snowflake_area_closed_form(s)) + "\n";
  write_artifact(spec, rec, "geometry.csv", csv);

  const Box box = poly.bbox();
  const double pad = 0.05 * std::max(box.width(), box.height());
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" viewBox=\"" +
                    format_double(box.lo.x - pad) + " " + format_double(-(box.hi.y + pad)) + " " +
                    format_double(box.width() + 2 * pad) + " " +
                    format_double(box.height() + 2 * pad) + "\">\n";
  svg += "<g transform=\"scale(1,-1)\">\n<path d=\"" + polygon_path_data(poly) +
         "\" fill=\"#dbe9f6\" stroke=\"#1f77b4\" stroke-width=\"" +
         format_double(0.003 * std::max(box.width(), box.height())) + "\"/>\n</g>\n</svg>\n";
  write_artifact(spec, rec, "outline.svg", svg);
}

// --- minkowski-fit ----------------------------------------------------------

void exp_minkowski_fit(const ExperimentSpec& spec, ResultRecord& rec) {
  Params params = spec.params;
  if (!params.count("shape")) params["shape"] = "square";
  const std::string shape = params["shape"];
  const bool is_snowflake = shape.rfind("snowflake", 0) == 0;

  double expected = 1.0;
  double floor = 0.0;
  std::string default_grid = "0.2:0.02:log12";
  if (is_snowflake) {
    SnowflakeSpec s;
    s.eta = get_num(params, "eta", 3.0);
    s.depth = get_int(params, "depth", 8);
    s.side = get_num(params, "side", 1.0);
    params["depth"] = std::to_string(s.depth);
    expected = solve_alpha(s.eta);
    floor = s.feature_floor();
    default_grid = s.eta == 3.0 ? "0.15:0.004:log12" : "0.2:0.006:log12";
  }
  expected = get_num(params, "alpha_expected", expected);
  const std::vector<double> t_grid = parse_grid(get_str(params, "t_grid", default_grid));
  const std::int64_t samples = get_i64(params, "samples", 2000000);

  const Polygon poly = make_shape(params);
  const DimensionFit fit = fit_minkowski(poly, t_grid, samples, spec.seed, floor);

  rec.metrics.push_back(info_metric("alpha_hat", fit.alpha_hat, fit.slope_stderr));
  rec.metrics.push_back(max_metric("alpha_abs_err", std::fabs(fit.alpha_hat - expected),
                                   get_num(params, "tol", 0.05), fit.slope_stderr));
  rec.metrics.push_back(info_metric("content_lower", fit.content_lower));
  rec.metrics.push_back(info_metric("content_upper", fit.content_upper));

  std::string csv = "t,volume,se\n";
  for (std::size_t i = 0; i < fit.t_grid.size(); ++i) {
    csv += format_double(fit.t_grid[i]) + "," + format_double(fit.volume[i]) + "," +
           format_double(fit.volume_se[i]) + "\n";
  }
  write_artifact(spec, rec, "tube.csv", csv);

  std::vector<double> fit_line;
  for (double t : fit.t_grid) {
    fit_line.push_back(std::exp(fit.fit.intercept + fit.fit.slope * std::log(t)));
  }
  SvgOptions opt;
  opt.log_x = opt.log_y = true;
  opt.title = "tube volume vs t";
  opt.x_label = "t";
  opt.y_label = "|B(boundary,t)|";
  write_artifact(spec, rec, "tube.svg",
                 render_svg({make_series("measured", fit.t_grid, fit.volume),
                             make_series("fit", fit.t_grid, fit_line)},
                            opt));
}

// --- disk-prefactor ---------------------------------------------------------

void exp_disk_prefactor(const ExperimentSpec& spec, ResultRecord& rec) {
  Params params = spec.params;
  if (!params.count("shape")) params["shape"] = "disk";
  const bool square = params["shape"].rfind("square", 0) == 0;
  const Polygon poly = make_shape(params);
  const RadialKernel kernel = kernel_from(params);

  const std::vector<double> t_grid = parse_grid(get_str(params, "t_grid", "0.2:0.05:log3"));
  const std::int64_t samples = get_i64(params, "samples", 4000000);
  const double target = get_num(
      params, "target",
      square ? 8.0 * std::sqrt(std::numbers::pi) : 4.0 * std::pow(std::numbers::pi, 1.5));

  double beta_ref = 3.0;
  const EnergySweep sweep =
      sweep_and_fit(poly, kernel, t_grid, samples, spec.seed, 0.0, &beta_ref);
  if (sweep.t.size() < 3) throw std::invalid_argument("disk-prefactor: need 3 t points");
  const double ratio = sweep.t[0] / sweep.t[1];
  if (std::fabs(sweep.t[1] / sweep.t[2] - ratio) > 1e-9 * ratio) {
    throw std::invalid_argument("disk-prefactor: t grid must be geometric");
  }

  const auto j3 = [&](std::size_t i) { return sweep.value[i] / std::pow(sweep.t[i], 3.0); };
  const Richardson rich = richardson_extrapolate(j3(0), j3(1), j3(2), ratio);
  rec.metrics.push_back(info_metric("beta_hat", sweep.beta_hat, sweep.beta_stderr));
  rec.metrics.push_back(info_metric("j_over_t3_extrapolated", rich.limit));
  rec.metrics.push_back(info_metric("j_over_t3_target", target));
  rec.metrics.push_back(
      max_metric("prefactor_rel_err", std::fabs(rich.limit - target) / target, 0.03));

  // same integral through the direction-averaged covariogram at the middle t
  const double t_mid = sweep.t[1];
  const double r_max = kernel.effective_range() + 2.0;
  const std::vector<double> radial =
      parse_grid("0:" + format_double(r_max) + ":lin65");
  const double covar = energy_covariogram(poly, kernel, t_mid, radial,
                                          get_i64(params, "angular_samples", 4000000),
                                          spec.seed);
  const double z = std::fabs(sweep.value[1] - covar) /
                   (std::sqrt(2.0) * std::max(sweep.se[1], 1e-300));
  rec.metrics.push_back(info_metric("direct_t_mid", sweep.value[1], sweep.se[1]));
  rec.metrics.push_back(info_metric("covariogram_t_mid", covar));
  rec.metrics.push_back(max_metric("dual_route_z", z, 3.0));

  std::string csv = "t,energy,se,energy_over_t3\n";
  for (std::size_t i = 0; i < sweep.t.size(); ++i) {
    csv += format_double(sweep.t[i]) + "," + format_double(sweep.value[i]) + "," +
           format_double(sweep.se[i]) + "," + format_double(j3(i)) + "\n";
  }
  write_artifact(spec, rec, "sweep.csv", csv);

  SvgOptions opt;
  opt.log_x = opt.log_y = true;
  opt.title = "interaction energy vs t";
  opt.x_label = "t";
  opt.y_label = "E_t";
  write_artifact(spec, rec, "sweep.svg",
                 render_svg({make_series("energy", sweep.t, sweep.value)}, opt));
}

// --- energy-exponent --------------------------------------------------------

void exp_energy_exponent(const ExperimentSpec& spec, ResultRecord& rec) {
  Params params = spec.params;
  SnowflakeSpec s;
  s.eta = get_num(params, "eta", 3.0);
  s.depth = get_int(params, "depth", 8);
  s.side = get_num(params, "side", 1.0);
  const Polygon poly = build_snowflake(s);
  const RadialKernel kernel = kernel_from(params);

  const double alpha = solve_alpha(s.eta);
  double beta_ref = 4.0 - alpha;
  const std::string default_grid = s.eta == 3.0 ? "0.2:0.008:log12" : "0.25:0.006:log12";
  const std::vector<double> t_grid = parse_grid(get_str(params, "t_grid", default_grid));
  const std::int64_t samples = get_i64(params, "samples", 4000000);

  const EnergySweep sweep = sweep_and_fit(poly, kernel, t_grid, samples, spec.seed,
                                          s.feature_floor(), &beta_ref);

  double pre_min = sweep.prefactor[0], pre_max = sweep.prefactor[0];
  for (double p : sweep.prefactor) {
    pre_min = std::min(pre_min, p);
    pre_max = std::max(pre_max, p);
  }
  rec.metrics.push_back(info_metric("beta_hat", sweep.beta_hat, sweep.beta_stderr));
  rec.metrics.push_back(info_metric("beta_ref", beta_ref));
  rec.metrics.push_back(max_metric("beta_abs_err", std::fabs(sweep.beta_hat - beta_ref),
                                   get_num(params, "tol", 0.05), sweep.beta_stderr));
  rec.metrics.push_back(
      max_metric("prefactor_ratio", pre_max / std::max(pre_min, 1e-300), 3.0));

  std::string csv = "t,energy,se,prefactor\n";
  for (std::size_t i = 0; i < sweep.t.size(); ++i) {
    csv += format_double(sweep.t[i]) + "," + format_double(sweep.value[i]) + "," +
           format_double(sweep.se[i]) + "," + format_double(sweep.prefactor[i]) + "\n";
  }
  write_artifact(spec, rec, "sweep.csv", csv);

  SvgOptions opt;
  opt.log_x = opt.log_y = true;
  opt.title = "snowflake energy vs t";
  opt.x_label = "t";
  opt.y_label = "E_t";
  write_artifact(spec, rec, "sweep.svg",
                 render_svg({make_series("energy", sweep.t, sweep.value),
                             make_series("prefactor", sweep.t, sweep.prefactor)},
                            opt));
}

// --- renewal-recursion ------------------------------------------------------

void exp_renewal_recursion(const ExperimentSpec& spec, ResultRecord& rec) {
  SnowflakeSpec s;
  s.eta = get_num(spec.params, "eta", 3.0);
  const bool classical = s.eta == 3.0;
  s.depth = get_int(spec.params, "depth", classical ? 6 : 9);
  s.side = get_num(spec.params, "side", 1.0);
  const double t0 = get_num(spec.params, "t0", classical ? 0.2 : 0.25);
  const int levels = get_int(spec.params, "levels", classical ? 4 : 3);
  const std::int64_t samples = get_i64(spec.params, "samples", classical ? 4000000 : 8000000);

  const RenewalReport rep =
      renewal_check(s, kernel_from(spec.params), t0, levels, samples, spec.seed);

  rec.metrics.push_back(info_metric("alpha", rep.alpha));
  double max_ratio = 0.0;
  for (double r : rep.residual_over_t4) max_ratio = std::max(max_ratio, std::fabs(r));
  rec.metrics.push_back(info_metric("max_residual_over_t4", max_ratio));
  rec.metrics.push_back(flag_metric("residual_bounded", rep.residual_bounded));
  if (rep.period_amplitude.size() >= 3) {
    for (std::size_t i = 0; i < rep.period_amplitude.size(); ++i) {
      rec.metrics.push_back(
          info_metric("amplitude_p" + std::to_string(i), rep.period_amplitude[i]));
    }
    if (!classical) {
      rec.metrics.push_back(flag_metric("amplitude_decreasing",
                                        rep.period_amplitude[0] > rep.period_amplitude[1] &&
                                            rep.period_amplitude[1] > rep.period_amplitude[2]));
    }
  }

  std::string csv = "t,f,f_se,f_over_r1,f_over_r2,residual,residual_se,residual_over_t4\n";
  for (std::size_t i = 0; i < rep.t.size(); ++i) {
    csv += format_double(rep.t[i]) + "," + format_double(rep.f[i]) + "," +
           format_double(rep.f_se[i]) + "," + format_double(rep.f_over_r1[i]) + "," +
           format_double(rep.f_over_r2[i]) + "," + format_double(rep.residual[i]) + "," +
           format_double(rep.residual_se[i]) + "," + format_double(rep.residual_over_t4[i]) +
           "\n";
  }
  write_artifact(spec, rec, "renewal.csv", csv);

  std::string gcsv = "s,g,g_se\n";
  for (std::size_t i = 0; i < rep.s_grid.size(); ++i) {
    gcsv += format_double(rep.s_grid[i]) + "," + format_double(rep.g[i]) + "," +
            format_double(rep.g_se[i]) + "\n";
  }
  write_artifact(spec, rec, "gtrace.csv", gcsv);

  SvgOptions opt;
  opt.title = "G(s) = e^{(4-alpha)s} F(e^{-s})";
  opt.x_label = "s";
  opt.y_label = "G";
  write_artifact(spec, rec, "gtrace.svg",
                 render_svg({make_series("G", rep.s_grid, rep.g)}, opt));
}

// --- ginibre-ladder ---------------------------------------------------------

void exp_ginibre_ladder(const ExperimentSpec& spec, ResultRecord& rec) {
  const std::int64_t budget = get_i64(spec.params, "node_budget", 6000000);

  // single-point process: two structurally different quadrature routes
  const Polygon small = make_regular_ngon(get_num(spec.params, "radius_small", 0.4), 256);
  const KernelQuadrature q1 = KernelQuadrature::build(small, 1, 1e-6, budget);
  const double v_exact1 = kernel_variance_exact(1, small, q1);
  const double v_pair1 = reference::kernel_variance_pairwise(1, q1);
  rec.metrics.push_back(
      max_metric("bernoulli_defect", std::fabs(v_exact1 - v_pair1), 1e-8));

  const Polygon disk = make_regular_ngon(get_num(spec.params, "radius", 0.5), 256);

  GinibreConfig cfg;
  cfg.N = 2;
  cfg.trials = get_i64(spec.params, "trials", 1000000);
  cfg.seed = spec.seed;
  const KernelQuadrature q2 = KernelQuadrature::build(disk, 2, 1e-6, budget);
  const double v_exact2 = kernel_variance_exact(2, disk, q2);
  const CountStats mc = sample_counts(cfg, disk);
  const double z = std::fabs(mc.variance - v_exact2) / std::max(mc.variance_se, 1e-300);
  rec.metrics.push_back(info_metric("variance_exact_n2", v_exact2));
  rec.metrics.push_back(info_metric("variance_mc_n2", mc.variance, mc.variance_se));
  rec.metrics.push_back(max_metric("mc_z", z, 3.0));

  const int n_big = get_int(spec.params, "n_big", 200);
  const KernelQuadrature qb = KernelQuadrature::build(disk, n_big, 1e-6, budget);
  const double v_exact_big = kernel_variance_exact(n_big, disk, qb);
  const Estimate ga = gaussian_approx_variance(
      n_big, disk, get_i64(spec.params, "samples", 4000000),
      derive_stream_seed(spec.seed, "ladder-ga"));
  rec.metrics.push_back(info_metric("variance_exact_big", v_exact_big));
  rec.metrics.push_back(info_metric("variance_gaussian_big", ga.value, ga.se));
  rec.metrics.push_back(max_metric(
      "gaussian_approx_rel_err", std::fabs(ga.value - v_exact_big) / v_exact_big, 0.02));

  std::string csv = "check,lhs,rhs\n";
  csv += "pairwise_n1," + format_double(v_exact1) + "," + format_double(v_pair1) + "\n";
  csv += "mc_n2," + format_double(mc.variance) + "," + format_double(v_exact2) + "\n";
  csv += "gaussian_n" + std::to_string(n_big) + "," + format_double(ga.value) + "," +
         format_double(v_exact_big) + "\n";
  write_artifact(spec, rec, "ladder.csv", csv);
}

// --- remainder-rate ---------------------------------------------------------

void exp_remainder_rate(const ExperimentSpec& spec, ResultRecord& rec) {
  const double lambda = get_num(spec.params, "lambda", 0.7);
  const std::vector<int> ns =
      parse_int_grid(get_str(spec.params, "n_values", "25,50,75,100,150,200"));
  const int probes = get_int(spec.params, "probes", 40);
  const RemainderReport rep = remainder_check(lambda, ns, probes, spec.seed);

  rec.metrics.push_back(max_metric("rate", rep.rate, rep.rate_bound));
  rec.metrics.push_back(info_metric("rate_bound", rep.rate_bound));

  std::string csv = "N,max_scaled_remainder\n";
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.n_values.size(); ++i) {
    csv += std::to_string(rep.n_values[i]) + "," + format_double(rep.max_scaled[i]) + "\n";
    xs.push_back(static_cast<double>(rep.n_values[i]));
    ys.push_back(rep.max_scaled[i]);
  }
  write_artifact(spec, rec, "remainder.csv", csv);

  SvgOptions opt;
  opt.log_y = true;
  opt.title = "kernel truncation remainder";
  opt.x_label = "N";
  opt.y_label = "max scaled remainder";
  write_artifact(spec, rec, "remainder.svg", render_svg({make_series("remainder", xs, ys)}, opt));
}

// --- variance-scaling -------------------------------------------------------

void exp_variance_scaling(const ExperimentSpec& spec, ResultRecord& rec) {
  Params params = spec.params;
  if (!params.count("shape")) params["shape"] = "disk";
  const bool is_snowflake = params["shape"].rfind("snowflake", 0) == 0;

  double alpha_ref = 1.0;
  std::string method_name;
  std::vector<int> n_grid;
  std::int64_t budget = 0;
  Polygon poly = [&]() -> Polygon {
    if (is_snowflake) {
      SnowflakeSpec s;
      s.eta = get_num(params, "eta", 3.0);
      s.depth = get_int(params, "depth", 7);
      s.side = get_num(params, "side", 0.8 * std::sqrt(3.0));
      alpha_ref = solve_alpha(s.eta);
      method_name = get_str(params, "method", "gaussian-approx");
      n_grid = parse_int_grid(get_str(params, "n_grid", "100,316,1000,3162,10000,31623,100000"));
      budget = get_i64(params, "budget", 4000000);
      // recenter on the centroid so the closure stays inside the unit disk
      return build_snowflake(s).scaled_translated(
          1.0, {-s.side / 2.0, -s.side * std::sqrt(3.0) / 6.0});
    }
    params.emplace("radius", "0.5");
    alpha_ref = 1.0;
    method_name = get_str(params, "method", "exact-kernel");
    n_grid = parse_int_grid(get_str(params, "n_grid", "25,50,100,200,400,800"));
    budget = get_i64(params, "budget", 6000000);
    return make_shape(params);
  }();

  VarianceMethod method;
  if (method_name == "exact-kernel") {
    method = VarianceMethod::exact_kernel;
  } else if (method_name == "eigen-mc") {
    method = VarianceMethod::eigen_mc;
  } else if (method_name == "gaussian-approx") {
    method = VarianceMethod::gaussian_approx;
  } else {
    throw std::invalid_argument("variance-scaling: unknown method '" + method_name + "'");
  }

  const ScalingFit fit =
      variance_scaling_fit(poly, n_grid, method, budget, spec.seed, &alpha_ref);

  rec.metrics.push_back(info_metric("exponent", fit.exponent, fit.exponent_se));
  rec.metrics.push_back(max_metric("exponent_abs_err",
                                   std::fabs(fit.exponent - 0.5 * alpha_ref),
                                   get_num(params, "tol", 0.03), fit.exponent_se));
  rec.metrics.push_back(info_metric("prefactor_extrapolated", fit.prefactor_extrapolated));
  if (!is_snowflake) {
    // perimeter constant for the unit-boundary-dimension case: prefactor should
    // approach (perimeter) x (2 pi^{-3/2})
    const double target =
        get_num(params, "prefactor_target",
                2.0 * std::pow(std::numbers::pi, -1.5) * poly.perimeter());
    rec.metrics.push_back(info_metric("prefactor_target", target));
    rec.metrics.push_back(max_metric(
        "prefactor_rel_err", std::fabs(fit.prefactor_extrapolated - target) / target, 0.05));
  }

  std::string csv = "N,variance,se,prefactor\n";
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < fit.points.size(); ++i) {
    csv += std::to_string(fit.points[i].N) + "," + format_double(fit.points[i].variance) + "," +
           format_double(fit.points[i].se) + "," + format_double(fit.prefactor_series[i]) + "\n";
    xs.push_back(static_cast<double>(fit.points[i].N));
    ys.push_back(fit.points[i].variance);
  }
  write_artifact(spec, rec, "scaling.csv", csv);

  SvgOptions opt;
  opt.log_x = opt.log_y = true;
  opt.title = "count variance vs N";
  opt.x_label = "N";
  opt.y_label = "Var";
  write_artifact(spec, rec, "scaling.svg", render_svg({make_series("variance", xs, ys)}, opt));
}

// --- clt ----------------------------------------------------------------------

void exp_clt(const ExperimentSpec& spec, ResultRecord& rec) {
  const Polygon disk = make_regular_ngon(get_num(spec.params, "radius", 0.5), 256);
  GinibreConfig cfg;
  cfg.N = get_int(spec.params, "N", 200);
  cfg.trials = get_i64(spec.params, "trials", 2000);
  cfg.seed = spec.seed;

  const CltReport rep = clt_test(cfg, disk, false);
  const CltReport neg = clt_test(cfg, disk, true);
  rec.metrics.push_back(info_metric("count_mean", rep.mean));
  rec.metrics.push_back(info_metric("count_variance", rep.variance));
  rec.metrics.push_back(info_metric("ks_statistic", rep.ks_statistic));
  rec.metrics.push_back(min_metric("ks_p", rep.p_value, 0.01));
  rec.metrics.push_back(max_metric("negative_control_p", neg.p_value, 0.01));

  // distribution plot from a lighter standalone run
  GinibreConfig plot_cfg = cfg;
  plot_cfg.trials = std::min<std::int64_t>(cfg.trials, get_i64(spec.params, "plot_trials", 600));
  plot_cfg.seed = derive_stream_seed(spec.seed, "cltplot");
  const CountStats cs = sample_counts(plot_cfg, disk);
  std::vector<double> sorted(cs.counts.begin(), cs.counts.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(std::max(cs.variance, 1e-300));
  std::vector<double> xs, ecdf, ncdf;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double zval = (sorted[i] - cs.mean) / sd;
    xs.push_back(zval);
    ecdf.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(sorted.size()));
    ncdf.push_back(normal_cdf(zval));
  }
  std::string csv = "standardized_count,empirical_cdf,normal_cdf\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    csv += format_double(xs[i]) + "," + format_double(ecdf[i]) + "," + format_double(ncdf[i]) +
           "\n";
  }
  write_artifact(spec, rec, "counts.csv", csv);

  SvgOptions opt;
  opt.title = "standardized counts vs normal";
  opt.x_label = "standardized count";
  opt.y_label = "CDF";
  write_artifact(spec, rec, "cltcdf.svg",
                 render_svg({make_series("empirical", xs, ecdf),
                             make_series("normal", xs, ncdf)},
                            opt));
}

// --- touching-covariance ------------------------------------------------------

void exp_touching_covariance(const ExperimentSpec& spec, ResultRecord& rec) {
  const double radius = get_num(spec.params, "radius", 0.5);
  const int edges = get_int(spec.params, "edges", 256);
  const int n = get_int(spec.params, "N", 800);
  const std::int64_t budget = get_i64(spec.params, "node_budget", 6000000);

  const Polygon upper = make_half_disk(radius, edges, true);
  const Polygon lower = make_half_disk(radius, edges, false);
  const CovarianceReport touching = covariance_two_sets(n, upper, lower, budget);
  const double target = 2.0 * std::pow(std::numbers::pi, -1.5) * (2.0 * radius);

  rec.metrics.push_back(info_metric("covariance", touching.covariance));
  rec.metrics.push_back(flag_metric("cov_nonpositive", touching.covariance <= 0.0));
  rec.metrics.push_back(info_metric("scaled_cov", touching.scaled));
  rec.metrics.push_back(info_metric("scaled_target", target));
  rec.metrics.push_back(max_metric("touching_rel_err",
                                   std::fabs(touching.scaled - target) / target, 0.10));
  rec.metrics.push_back(max_metric("hermiticity_defect", touching.hermiticity_defect, 1e-10));

  const Polygon far_a = make_square(0.2, {0.25, -0.6});
  const Polygon far_b = make_square(0.2, {-0.45, 0.4});
  const CovarianceReport distant = covariance_two_sets(n, far_a, far_b, budget);
  rec.metrics.push_back(max_metric("distant_scaled", distant.scaled, 1e-3));

  std::string csv = "pair,covariance,scaled\n";
  csv += "touching," + format_double(touching.covariance) + "," +
         format_double(touching.scaled) + "\n";
  csv += "distant," + format_double(distant.covariance) + "," + format_double(distant.scaled) +
         "\n";
  write_artifact(spec, rec, "covariance.csv", csv);
}

// --- sobolev-bump -------------------------------------------------------------

void exp_sobolev_bump(const ExperimentSpec& spec, ResultRecord& rec) {
  const Vec2 center{get_num(spec.params, "bump_x", 0.2), get_num(spec.params, "bump_y", 0.0)};
  const double radius = get_num(spec.params, "bump_radius", 0.5);
  const double scale = get_num(spec.params, "scale", 1.0);
  const std::vector<int> n_grid = parse_int_grid(get_str(spec.params, "n_grid", "50,100,200,400"));

  const SobolevReport rep = sobolev_variance_check(center, radius, n_grid, scale);
  rec.metrics.push_back(info_metric("limit", rep.limit));
  rec.metrics.push_back(info_metric("final_value", rep.final_value));
  rec.metrics.push_back(max_metric("final_rel_err", rep.final_rel_err, 0.03));
  rec.metrics.push_back(flag_metric("cauchy", rep.cauchy));

  std::string csv = "N,variance\n";
  std::vector<double> xs, ys;
  for (const SobolevPoint& p : rep.points) {
    csv += std::to_string(p.N) + "," + format_double(p.variance) + "\n";
    xs.push_back(static_cast<double>(p.N));
    ys.push_back(p.variance);
  }
  write_artifact(spec, rec, "sobolev.csv", csv);

  std::vector<double> limit_line(xs.size(), rep.limit);
  SvgOptions opt;
  opt.log_x = true;
  opt.title = "smooth statistic variance vs N";
  opt.x_label = "N";
  opt.y_label = "Var";
  write_artifact(spec, rec, "sobolev.svg",
                 render_svg({make_series("variance", xs, ys),
                             make_series("limit", xs, limit_line)},
                            opt));
}

using ExperimentFn = void (*)(const ExperimentSpec&, ResultRecord&);

const std::map<std::string, ExperimentFn>& registry() {
  static const std::map<std::string, ExperimentFn> reg = {
      {"clt", exp_clt},
      {"dimension-equation", exp_dimension_equation},
      {"disk-prefactor", exp_disk_prefactor},
      {"energy-exponent", exp_energy_exponent},
      {"ginibre-ladder", exp_ginibre_ladder},
      {"lattice-classification", exp_lattice_classification},
      {"minkowski-fit", exp_minkowski_fit},
      {"remainder-rate", exp_remainder_rate},
      {"renewal-recursion", exp_renewal_recursion},
      {"snowflake-geometry", exp_snowflake_geometry},
      {"sobolev-bump", exp_sobolev_bump},
      {"touching-covariance", exp_touching_covariance},
      {"variance-scaling", exp_variance_scaling},
  };
  return reg;
}

}  // namespace

std::vector<std::string> list_experiments() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

ResultRecord run_experiment(const ExperimentSpec& spec) {
  const auto& reg = registry();
  const auto it = reg.find(spec.name);
  if (it == reg.end()) {
    std::string msg = "unknown experiment '" + spec.name + "'; registered:";
    for (const std::string& name : list_experiments()) msg += " " + name;
    throw std::invalid_argument(msg);
  }

  ResultRecord rec;
  rec.experiment = spec.name;
  rec.code_version = code_version();
  std::map<std::string, std::string> canon = spec.params;
  canon["name"] = spec.name;
  canon["seed"] = std::to_string(spec.seed);
  rec.spec_hash = param_hash(canon);

  fs::create_directories(spec.outdir);
  const auto t_start = std::chrono::steady_clock::now();
  try {
    it->second(spec, rec);
  } catch (const std::exception& e) {
    throw std::runtime_error("experiment " + spec.name + ": " + e.what());
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  rec.pass = true;
  for (const MetricRecord& m : rec.metrics) rec.pass = rec.pass && m.pass;

  std::ofstream out(fs::path(spec.outdir) / "summary.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write summary.json under " + spec.outdir);
  out << to_json(rec);
  return rec;
}

}  // namespace perimlab
