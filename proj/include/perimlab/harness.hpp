#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "perimlab/geometry.hpp"

namespace perimlab {

/// Hash of the library sources, baked in at configure time. Stamped into every
/// result record so cached and archived outputs can be traced to the code that
/// produced them.
std::string code_version();

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// Grid literal: "a:b:logN" (N log-spaced points from a to b inclusive),
/// "a:b:linN", or a comma-separated list. Throws std::invalid_argument on
/// malformed input or nonpositive endpoints of a log grid.
std::vector<double> parse_grid(const std::string& text);

/// Shape from flat parameters: params["shape"] is one of "square", "disk",
/// "disk:R", "halfdisk", "halfdisk:lower", "ngon", "snowflake" (the latter
/// reading eta/depth/side). Optional center_x/center_y translate the result.
Polygon make_shape(const std::map<std::string, std::string>& params);

struct ExperimentSpec {
  std::string name;
  std::map<std::string, std::string> params;  // flat key=value, sorted
  std::uint64_t seed = 0;
  std::string outdir = "out";
};

/// Flat INI: one key=value per line, '#' or ';' comments, no sections. Keys
/// "name", "seed", "outdir" fill the struct fields; the rest land in params.
ExperimentSpec load_spec(const std::string& path);

struct MetricRecord {
  std::string name;
  double value = 0.0;
  double se = 0.0;         // 0 for deterministic quantities
  double threshold = 0.0;  // meaning depends on the check; recorded verbatim
  bool has_threshold = false;
  bool pass = true;
};

struct ResultRecord {
  std::string experiment;
  std::string spec_hash;     // content hash of the canonical spec serialization
  std::string code_version;  // code_version() at run time
  std::vector<MetricRecord> metrics;
  std::vector<std::string> artifacts;  // files written under outdir
  double wall_seconds = 0.0;
  bool pass = true;
};

/// Canonical serialization: fixed key order, shortest round-trip decimals.
/// Deterministic except for the wall_seconds field.
std::string to_json(const ResultRecord& record);

/// Registered experiment names, sorted.
std::vector<std::string> list_experiments();

/// Runs a registered experiment, writes outdir/summary.json plus any data and
/// plot files, and returns the record. Unknown names throw
/// std::invalid_argument listing the registry.
ResultRecord run_experiment(const ExperimentSpec& spec);

struct SvgSeries {
  std::string label;
  std::vector<Vec2> points;
};

struct SvgOptions {
  int width = 640;
  int height = 480;
  bool log_x = false;
  bool log_y = false;
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Standalone SVG line chart: one polyline per series, log axes on request.
/// A nonpositive coordinate on a log axis throws std::invalid_argument
/// ("nonpositive value on log axis").
std::string render_svg(const std::vector<SvgSeries>& series, const SvgOptions& options);

/// SVG path data for the polygon outline: M, one L per remaining vertex, Z.
std::string polygon_path_data(const Polygon& poly);

/// Content hash (hex) of a flat parameter record plus the code version.
/// Identical inputs on identical code give identical keys.
std::string param_hash(const std::map<std::string, std::string>& params);

/// Directory-backed JSON store for expensive deterministic results, keyed by
/// param_hash. lookup returns false on a miss or an unreadable entry.
class ResultCache {
 public:
  explicit ResultCache(std::string dir);
  bool lookup(const std::string& key, std::string* json_out) const;
  void store(const std::string& key, const std::string& json) const;

 private:
  std::string dir_;
};

}  // namespace perimlab
