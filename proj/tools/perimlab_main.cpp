// CLI front end: every module operation behind one binary, JSON records on
// stdout, CSV/SVG artifacts on request, deterministic given --seed.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "perimlab/dimension.hpp"
#include "perimlab/energy.hpp"
#include "perimlab/ginibre.hpp"
#include "perimlab/harness.hpp"
#include "perimlab/kernel.hpp"
#include "perimlab/rng.hpp"
#include "perimlab/stats.hpp"

using namespace perimlab;

namespace {

struct ShapeArgs {
  std::string shape = "disk:0.5";
  double eta = 3.0;
  int depth = 4;
  double side = 1.0;
  double radius = 1.0;
  int edges = 256;
  double center_x = 0.0;
  double center_y = 0.0;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--shape", shape, "square | disk[:R] | halfdisk[:lower] | ngon | snowflake");
    cmd->add_option("--eta", eta, "snowflake scale");
    cmd->add_option("--depth", depth, "snowflake recursion depth");
    cmd->add_option("--side", side, "square/snowflake side length");
    cmd->add_option("--radius", radius, "disk/ngon radius");
    cmd->add_option("--edges", edges, "polygonization edge count");
    cmd->add_option("--center-x", center_x, "x translation");
    cmd->add_option("--center-y", center_y, "y translation");
  }

  std::map<std::string, std::string> params() const {
    std::map<std::string, std::string> p;
    p["shape"] = shape;
    p["eta"] = format_double(eta);
    p["depth"] = std::to_string(depth);
    p["side"] = format_double(side);
    p["radius"] = format_double(radius);
    p["edges"] = std::to_string(edges);
    p["center_x"] = format_double(center_x);
    p["center_y"] = format_double(center_y);
    return p;
  }

  Polygon build() const { return make_shape(params()); }
};

using Fields = std::vector<std::pair<std::string, std::string>>;

std::string field_json(const Fields& fields) {
  std::ostringstream o;
  o << "{";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    o << "\"" << fields[i].first << "\": " << fields[i].second
      << (i + 1 < fields.size() ? ", " : "");
  }
  o << "}";
  return o.str();
}

std::string jstr(const std::string& s) { return "\"" + s + "\""; }
std::string jnum(double v) { return format_double(v); }

void emit(const Fields& fields) { std::cout << field_json(fields) << "\n"; }

// content-addressed cache shared by the deterministic ginibre paths
struct CacheArgs {
  std::string dir = ".perimlab-cache";
  bool disable = false;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--cache-dir", dir, "result cache directory");
    cmd->add_flag("--no-cache", disable, "recompute even when cached");
  }

  bool fetch(const std::map<std::string, std::string>& key_params, std::string* out) const {
    if (disable) return false;
    return ResultCache(dir).lookup(param_hash(key_params), out);
  }

  void put(const std::map<std::string, std::string>& key_params, const std::string& json) const {
    if (disable) return;
    ResultCache(dir).store(param_hash(key_params), json);
  }
};

RadialKernel kernel_by_name(const std::string& name) {
  std::map<std::string, std::string> p;
  p["kernel"] = name;
  p["shape"] = "square";  // unused, make_shape not involved
  std::string base = name;
  std::string arg;
  if (const auto pos = name.find(':'); pos != std::string::npos) {
    base = name.substr(0, pos);
    arg = name.substr(pos + 1);
  }
  if (base == "gaussian") return RadialKernel::gaussian();
  if (base == "exponential") return RadialKernel::exponential();
  if (base == "ball") return RadialKernel::ball(arg.empty() ? 1.0 : std::stod(arg));
  if (base == "gef") return RadialKernel::gef();
  throw CLI::ValidationError("--kernel", "unknown kernel '" + name + "'");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"nonlocal-energy and determinantal-count laboratory"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "master seed, all randomness derives from it");

  // ---- dimension ----------------------------------------------------------
  auto* dim = app.add_subcommand("dimension", "boundary dimension tools");
  dim->require_subcommand(1);

  double d_eta = 5.0;
  auto* d_solve = dim->add_subcommand("solve", "root of 2 r1^a + 2 r2^a = 1");
  d_solve->add_option("--eta", d_eta, "snowflake scale")->required();
  d_solve->callback([&] {
    const double alpha = solve_alpha(d_eta);
    const SnowflakeSpec s{d_eta, 0, 1.0};
    emit({{"eta", jnum(d_eta)},
          {"alpha", jnum(alpha)},
          {"residual",
           jnum(std::abs(2 * std::pow(s.r1(), alpha) + 2 * std::pow(s.r2(), alpha) - 1))}});
  });

  double l_eta = 5.0;
  std::int64_t l_maxden = 1000000;
  auto* d_lat = dim->add_subcommand("lattice", "lattice/nonlattice scale test");
  d_lat->add_option("--eta", l_eta)->required();
  d_lat->add_option("--max-den", l_maxden, "largest denominator searched");
  d_lat->callback([&] {
    const LatticeVerdict v = check_nonlattice(l_eta, l_maxden);
    emit({{"eta", jnum(l_eta)},
          {"kind", jstr(v.kind == LatticeVerdict::Kind::lattice ? "lattice" : "nonlattice_up_to")},
          {"rho", jnum(v.rho)},
          {"p", std::to_string(v.p)},
          {"q", std::to_string(v.q)},
          {"err", jnum(v.err)},
          {"bound", std::to_string(v.bound)}});
  });

  ShapeArgs f_shape;
  double f_tmin = 1e-3, f_tmax = 1e-1;
  int f_points = 12;
  double f_samples = 2e6;
  std::string f_out;
  auto* d_fit = dim->add_subcommand("fit", "Minkowski dimension from tube volumes");
  f_shape.add_flags(d_fit);
  d_fit->add_option("--tmin", f_tmin);
  d_fit->add_option("--tmax", f_tmax);
  d_fit->add_option("--points", f_points);
  d_fit->add_option("--samples", f_samples, "MC samples per t");
  d_fit->add_option("--out", f_out, "CSV of (t, volume, stderr)");
  d_fit->callback([&] {
    const Polygon poly = f_shape.build();
    const bool fractal = f_shape.shape.rfind("snowflake", 0) == 0;
    SnowflakeSpec s{f_shape.eta, f_shape.depth, f_shape.side};
    const std::vector<double> grid =
        parse_grid(format_double(f_tmax) + ":" + format_double(f_tmin) + ":log" +
                   std::to_string(f_points));
    const DimensionFit fit = fit_minkowski(poly, grid, static_cast<std::int64_t>(f_samples),
                                           seed, fractal ? s.feature_floor() : 0.0);
    if (!f_out.empty()) {
      std::ofstream csv(f_out);
      csv << "t,volume,stderr\n";
      for (std::size_t i = 0; i < fit.t_grid.size(); ++i) {
        csv << format_double(fit.t_grid[i]) << "," << format_double(fit.volume[i]) << ","
            << format_double(fit.volume_se[i]) << "\n";
      }
    }
    emit({{"alpha_hat", jnum(fit.alpha_hat)},
          {"slope_stderr", jnum(fit.slope_stderr)},
          {"content_lower", jnum(fit.content_lower)},
          {"content_upper", jnum(fit.content_upper)},
          {"r2", jnum(fit.fit.r2)}});
  });

  // ---- energy -------------------------------------------------------------
  auto* en = app.add_subcommand("energy", "nonlocal interaction energy");
  en->require_subcommand(1);

  ShapeArgs e_shape;
  std::string e_kernel = "gaussian", e_tgrid = "0.2:0.0125:log12", e_out;
  double e_samples = 5e6;
  auto* e_sweep = en->add_subcommand("sweep", "energy over a t grid with a log-log fit");
  e_shape.add_flags(e_sweep);
  e_sweep->add_option("--kernel", e_kernel, "gaussian | exponential | ball:R | gef");
  e_sweep->add_option("--tgrid", e_tgrid, "a:b:logN / a:b:linN / comma list");
  e_sweep->add_option("--samples", e_samples, "MC samples per t");
  e_sweep->add_option("--out", e_out, "CSV of (t, estimate, stderr, prefactor)");
  e_sweep->callback([&] {
    const Polygon poly = e_shape.build();
    const bool fractal = e_shape.shape.rfind("snowflake", 0) == 0;
    SnowflakeSpec s{e_shape.eta, e_shape.depth, e_shape.side};
    double beta_ref = 0.0;
    const double* ref = nullptr;
    if (fractal) {
      beta_ref = 4.0 - solve_alpha(e_shape.eta);
      ref = &beta_ref;
    }
    const EnergySweep sweep =
        sweep_and_fit(poly, kernel_by_name(e_kernel), parse_grid(e_tgrid),
                      static_cast<std::int64_t>(e_samples), seed,
                      fractal ? s.feature_floor() : 0.0, ref);
    if (!e_out.empty()) {
      std::ofstream csv(e_out);
      csv << "t,estimate,stderr,prefactor\n";
      for (std::size_t i = 0; i < sweep.t.size(); ++i) {
        csv << format_double(sweep.t[i]) << "," << format_double(sweep.value[i]) << ","
            << format_double(sweep.se[i]) << ","
            << format_double(sweep.has_beta_ref ? sweep.prefactor[i] : 0.0) << "\n";
      }
    }
    emit({{"beta_hat", jnum(sweep.beta_hat)},
          {"beta_stderr", jnum(sweep.beta_stderr)},
          {"r2", jnum(sweep.fit.r2)}});
  });

  double r_eta = 5.0, r_t0 = 0.1, r_samples = 4e6;
  int r_depth = 9, r_levels = 5;
  std::string r_out;
  auto* e_renewal = en->add_subcommand("renewal", "two-scale self-similarity check");
  e_renewal->add_option("--eta", r_eta)->required();
  e_renewal->add_option("--depth", r_depth);
  e_renewal->add_option("--t0", r_t0);
  e_renewal->add_option("--levels", r_levels);
  e_renewal->add_option("--samples", r_samples, "importance samples per evaluation");
  e_renewal->add_option("--out", r_out, "CSV of the G(s) trace");
  e_renewal->callback([&] {
    SnowflakeSpec s{r_eta, r_depth, 1.0};
    const RenewalReport rep = renewal_check(s, RadialKernel::gaussian(), r_t0, r_levels,
                                            static_cast<std::int64_t>(r_samples), seed);
    if (!r_out.empty()) {
      std::ofstream csv(r_out);
      csv << "s,g,g_se\n";
      for (std::size_t i = 0; i < rep.s_grid.size(); ++i) {
        csv << format_double(rep.s_grid[i]) << "," << format_double(rep.g[i]) << ","
            << format_double(rep.g_se[i]) << "\n";
      }
    }
    Fields fields{{"eta", jnum(rep.eta)},
                  {"alpha", jnum(rep.alpha)},
                  {"residual_bounded", rep.residual_bounded ? "true" : "false"}};
    for (std::size_t i = 0; i < rep.period_amplitude.size(); ++i) {
      fields.emplace_back("amplitude_p" + std::to_string(i), jnum(rep.period_amplitude[i]));
    }
    emit(fields);
  });

  // ---- ginibre --------------------------------------------------------------
  auto* gin = app.add_subcommand("ginibre", "determinantal eigenvalue counts");
  gin->require_subcommand(1);
  CacheArgs cache;

  ShapeArgs g_shape;
  int g_n = 200;
  double g_trials = 2000;
  auto* g_mc = gin->add_subcommand("mc", "eigenvalue Monte Carlo count statistics");
  g_shape.add_flags(g_mc);
  cache.add_flags(g_mc);
  g_mc->add_option("--N", g_n)->required();
  g_mc->add_option("--trials", g_trials);
  g_mc->callback([&] {
    auto key = g_shape.params();
    key["op"] = "mc";
    key["N"] = std::to_string(g_n);
    key["trials"] = format_double(g_trials);
    key["seed"] = std::to_string(seed);
    if (std::string hit; cache.fetch(key, &hit)) {
      std::cout << hit;
      return;
    }
    GinibreConfig cfg{g_n, static_cast<std::int64_t>(g_trials), seed};
    const CountStats stats = sample_counts(cfg, g_shape.build());
    const std::string json = field_json({{"N", std::to_string(g_n)},
                                         {"trials", format_double(g_trials)},
                                         {"mean", jnum(stats.mean)},
                                         {"mean_se", jnum(stats.mean_se)},
                                         {"variance", jnum(stats.variance)},
                                         {"variance_se", jnum(stats.variance_se)}}) +
                             "\n";
    cache.put(key, json);
    std::cout << json;
  });

  ShapeArgs x_shape;
  int x_n = 400;
  double x_tol = 1e-6, x_budget = 6e6;
  auto* g_exact = gin->add_subcommand("exact", "count variance by kernel quadrature");
  x_shape.add_flags(g_exact);
  cache.add_flags(g_exact);
  g_exact->add_option("--N", x_n)->required();
  g_exact->add_option("--tol", x_tol, "target relative quadrature tolerance");
  g_exact->add_option("--budget", x_budget, "node budget");
  g_exact->callback([&] {
    auto key = x_shape.params();
    key["op"] = "exact";
    key["N"] = std::to_string(x_n);
    key["tol"] = format_double(x_tol);
    key["budget"] = format_double(x_budget);
    if (std::string hit; cache.fetch(key, &hit)) {
      std::cout << hit;
      return;
    }
    const Polygon poly = x_shape.build();
    const KernelQuadrature quad =
        KernelQuadrature::build(poly, x_n, x_tol, static_cast<std::int64_t>(x_budget));
    const double var = kernel_variance_exact(x_n, poly, quad);
    const std::string json =
        field_json({{"N", std::to_string(x_n)},
                    {"variance", jnum(var)},
                    {"nodes", std::to_string(quad.nodes.size())},
                    {"modes", std::to_string(quad.modes)}}) +
        "\n";
    cache.put(key, json);
    std::cout << json;
  });

  ShapeArgs s_shape;
  std::string s_method = "exact-kernel", s_ngrid = "25:800:log6", s_out;
  double s_budget = 0;
  auto* g_scaling = gin->add_subcommand("scaling", "variance growth exponent over N");
  s_shape.add_flags(g_scaling);
  cache.add_flags(g_scaling);
  g_scaling->add_option("--method", s_method, "exact-kernel | eigen-mc | gaussian-approx");
  g_scaling->add_option("--Ngrid", s_ngrid, "a:b:logN / a:b:linN / comma list");
  g_scaling->add_option("--budget", s_budget,
                        "per-point budget (nodes, trials, or samples; 0 = method default)");
  g_scaling->add_option("--out", s_out, "CSV of (N, variance, se, prefactor)");
  g_scaling->callback([&] {
    auto key = s_shape.params();
    key["op"] = "scaling";
    key["method"] = s_method;
    key["Ngrid"] = s_ngrid;
    key["budget"] = format_double(s_budget);
    key["seed"] = std::to_string(seed);
    std::string json;
    if (!cache.fetch(key, &json)) {
      VarianceMethod method;
      std::int64_t budget;
      if (s_method == "exact-kernel") {
        method = VarianceMethod::exact_kernel;
        budget = 6000000;
      } else if (s_method == "eigen-mc") {
        method = VarianceMethod::eigen_mc;
        budget = 2000;
      } else if (s_method == "gaussian-approx") {
        method = VarianceMethod::gaussian_approx;
        budget = 4000000;
      } else {
        throw CLI::ValidationError("--method", "unknown method '" + s_method + "'");
      }
      if (s_budget > 0) budget = static_cast<std::int64_t>(s_budget);

      Polygon poly = [&]() -> Polygon {
        if (s_shape.shape.rfind("snowflake", 0) != 0) return s_shape.build();
        SnowflakeSpec s{s_shape.eta, s_shape.depth, s_shape.side};
        return build_snowflake(s).scaled_translated(
            1.0, {-s.side / 2.0, -s.side * std::numbers::sqrt3 / 6.0});
      }();
      std::vector<int> n_grid;
      for (double v : parse_grid(s_ngrid)) n_grid.push_back(static_cast<int>(std::llround(v)));
      const double alpha_ref =
          s_shape.shape.rfind("snowflake", 0) == 0 ? solve_alpha(s_shape.eta) : 1.0;
      const ScalingFit fit =
          variance_scaling_fit(poly, n_grid, method, budget, seed, &alpha_ref);
      if (!s_out.empty()) {
        std::ofstream csv(s_out);
        csv << "N,variance,se,prefactor\n";
        for (std::size_t i = 0; i < fit.points.size(); ++i) {
          csv << fit.points[i].N << "," << format_double(fit.points[i].variance) << ","
              << format_double(fit.points[i].se) << ","
              << format_double(fit.prefactor_series[i]) << "\n";
        }
      }
      json = field_json({{"exponent", jnum(fit.exponent)},
                         {"exponent_se", jnum(fit.exponent_se)},
                         {"alpha_ref", jnum(alpha_ref)},
                         {"prefactor_extrapolated", jnum(fit.prefactor_extrapolated)}}) +
             "\n";
      cache.put(key, json);
    }
    std::cout << json;
  });

  ShapeArgs c_shape;
  int c_n = 200;
  double c_trials = 2000;
  bool c_negative = false;
  auto* g_clt = gin->add_subcommand("clt", "KS normality test of standardized counts");
  c_shape.add_flags(g_clt);
  cache.add_flags(g_clt);
  g_clt->add_option("--N", c_n);
  g_clt->add_option("--trials", c_trials);
  g_clt->add_flag("--negative-control", c_negative, "test squared counts instead");
  g_clt->callback([&] {
    auto key = c_shape.params();
    key["op"] = "clt";
    key["N"] = std::to_string(c_n);
    key["trials"] = format_double(c_trials);
    key["negative"] = c_negative ? "1" : "0";
    key["seed"] = std::to_string(seed);
    if (std::string hit; cache.fetch(key, &hit)) {
      std::cout << hit;
      return;
    }
    GinibreConfig cfg{c_n, static_cast<std::int64_t>(c_trials), seed};
    const CltReport rep = clt_test(cfg, c_shape.build(), c_negative);
    const std::string json = field_json({{"N", std::to_string(c_n)},
                                         {"mean", jnum(rep.mean)},
                                         {"variance", jnum(rep.variance)},
                                         {"ks_statistic", jnum(rep.ks_statistic)},
                                         {"p_value", jnum(rep.p_value)}}) +
                             "\n";
    cache.put(key, json);
    std::cout << json;
  });

  double m_lambda = 0.7;
  int m_nmax = 200, m_probes = 40;
  auto* g_rem = gin->add_subcommand("remainder", "kernel truncation remainder decay");
  cache.add_flags(g_rem);
  g_rem->add_option("--lambda", m_lambda, "probe disk radius, in (0,1)");
  g_rem->add_option("--Nmax", m_nmax);
  g_rem->add_option("--probes", m_probes);
  g_rem->callback([&] {
    std::map<std::string, std::string> key{{"op", "remainder"},
                                           {"lambda", format_double(m_lambda)},
                                           {"Nmax", std::to_string(m_nmax)},
                                           {"probes", std::to_string(m_probes)},
                                           {"seed", std::to_string(seed)}};
    if (std::string hit; cache.fetch(key, &hit)) {
      std::cout << hit;
      return;
    }
    std::vector<int> ns;
    for (int n = 25; n <= m_nmax; n += 25) ns.push_back(n);
    const RemainderReport rep = remainder_check(m_lambda, ns, m_probes, seed);
    const std::string json = field_json({{"rate", jnum(rep.rate)},
                                         {"rate_bound", jnum(rep.rate_bound)},
                                         {"pass", rep.pass ? "true" : "false"}}) +
                             "\n";
    cache.put(key, json);
    std::cout << json;
  });

  // ---- geometry -------------------------------------------------------------
  auto* geo = app.add_subcommand("geometry", "polygon construction and export");
  geo->require_subcommand(1);

  ShapeArgs geo_shape;
  std::string geo_format = "csv", geo_out;
  auto* geo_export = geo->add_subcommand("export", "vertex list as CSV or SVG path");
  geo_shape.add_flags(geo_export);
  geo_export->add_option("--format", geo_format, "csv | svg");
  geo_export->add_option("--out", geo_out, "output file (stdout when omitted)");
  geo_export->callback([&] {
    const Polygon poly = geo_shape.build();
    std::string body;
    if (geo_format == "csv") {
      body = "x,y\n";
      for (const Vec2& v : poly.vertices()) {
        body += format_double(v.x) + "," + format_double(v.y) + "\n";
      }
    } else if (geo_format == "svg") {
      const Box box = poly.bbox();
      const double pad = 0.05 * std::max(box.width(), box.height());
      body = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" viewBox=\"" +
             format_double(box.lo.x - pad) + " " + format_double(-(box.hi.y + pad)) + " " +
             format_double(box.width() + 2 * pad) + " " + format_double(box.height() + 2 * pad) +
             "\">\n<g transform=\"scale(1,-1)\">\n<path d=\"" + polygon_path_data(poly) +
             "\" fill=\"none\" stroke=\"black\" stroke-width=\"" +
             format_double(0.003 * std::max(box.width(), box.height())) + "\"/>\n</g>\n</svg>\n";
    } else {
      throw CLI::ValidationError("--format", "expected csv or svg");
    }
    if (geo_out.empty()) {
      std::cout << body;
    } else {
      std::ofstream out(geo_out, std::ios::binary);
      out << body;
    }
  });

  // ---- experiments ------------------------------------------------------------
  std::string run_spec_path, run_out;
  std::vector<std::string> run_sets;
  auto* run_cmd = app.add_subcommand("run", "run a registered experiment from a spec file");
  run_cmd->add_option("--spec", run_spec_path, "INI spec file")->required();
  run_cmd->add_option("--out", run_out, "override the spec's output directory");
  run_cmd->add_option("--set", run_sets, "key=value override (repeatable)");
  run_cmd->callback([&] {
    ExperimentSpec spec = load_spec(run_spec_path);
    if (!run_out.empty()) spec.outdir = run_out;
    if (app.count("--seed") > 0) spec.seed = seed;
    for (const std::string& kv : run_sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
      }
      spec.params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    const ResultRecord rec = run_experiment(spec);
    std::cout << to_json(rec);
    if (!rec.pass) std::exit(1);
  });

  auto* list_cmd = app.add_subcommand("list-experiments", "registered experiment names");
  list_cmd->callback([&] {
    for (const std::string& name : list_experiments()) std::cout << name << "\n";
  });

  auto* version_cmd = app.add_subcommand("version", "code version stamp");
  version_cmd->callback([&] { std::cout << code_version() << "\n"; });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
