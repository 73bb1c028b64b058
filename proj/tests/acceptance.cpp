// Acceptance suite: one line per criterion, [PASS]/[FAIL] with measured values.
// Runs the registered experiments at their pinned budgets and evaluates every
// gate against its stated tolerance. Exit code = number of failed criteria.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "perimlab/dimension.hpp"
#include "perimlab/harness.hpp"

using namespace perimlab;
namespace nb = std::numbers;

namespace {

int g_failures = 0;

struct Criterion {
  int id;
  std::string text;  // accumulated detail
  bool ok = true;

  void require(bool cond, const std::string& detail) {
    if (!text.empty()) text += "; ";
    text += detail;
    if (!cond) ok = false;
  }

  void finish(const char* label) {
    std::printf("[%s] criterion %2d (%s): %s\n", ok ? "PASS" : "FAIL", id, label,
                text.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const MetricRecord& metric(const ResultRecord& rec, const std::string& name) {
  for (const MetricRecord& m : rec.metrics) {
    if (m.name == name) return m;
  }
  throw std::runtime_error("metric '" + name + "' missing from experiment " + rec.experiment);
}

ResultRecord run(const std::string& name, std::uint64_t seed,
                 std::map<std::string, std::string> params, const std::string& outtag) {
  ExperimentSpec spec;
  spec.name = name;
  spec.seed = seed;
  spec.params = std::move(params);
  spec.outdir = "acceptance-out/" + outtag;
  return run_experiment(spec);
}

std::string summary_without_timing(const std::string& outdir) {
  std::ifstream in(outdir + "/summary.json");
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.find("\"wall_seconds\"") == std::string::npos) kept += line + "\n";
  }
  return kept;
}

void criterion_1() {
  Criterion c{1, {}};
  try {
    const ResultRecord rec = run("dimension-equation", 1, {}, "c01");
    const double alpha_gap = metric(rec, "alpha_eta3_vs_log3_4").value;
    c.require(alpha_gap <= 1e-12, "solve_alpha(3) vs log3(4) = " + fmt(alpha_gap));
    for (const char* eta : {"3", "4", "5", "7", "10"}) {
      const double r = metric(rec, std::string("residual_eta") + eta).value;
      c.require(r < 1e-13, std::string("residual(") + eta + ") = " + fmt(r));
    }
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("dimension equation");
}

void criterion_2() {
  Criterion c{2, {}};
  try {
    const ResultRecord rec = run("lattice-classification", 1, {}, "c02");
    c.require(metric(rec, "eta3_lattice_ratio_1").value == 1.0, "eta=3 lattice(1)");
    c.require(metric(rec, "eta2_lattice_ratio_2").value == 1.0, "eta=2 lattice(2)");
    const double bound = metric(rec, "eta5_nonlattice_bound").value;
    c.require(bound >= 1e6, "eta=5 nonlattice bound = " + fmt(bound));
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("lattice classification");
}

void criterion_3() {
  Criterion c{3, {}};
  try {
    for (const char* eta : {"3", "5"}) {
      for (const char* depth : {"2", "6"}) {
        const ResultRecord rec =
            run("snowflake-geometry", 1, {{"eta", eta}, {"depth", depth}},
                std::string("c03-eta") + eta + "-d" + depth);
        const double edge_defect = metric(rec, "edge_count_defect").value;
        c.require(edge_defect == 0.0,
                  std::string("edges(") + eta + "," + depth + ")" +
                      (edge_defect == 0.0 ? " exact" : " defect = " + fmt(edge_defect)));
        const double perim = metric(rec, "perimeter_rel_err").value;
        c.require(perim <= 1e-12,
                  std::string("perimeter_rel(") + eta + "," + depth + ") = " + fmt(perim));
        if (std::string(eta) == "3" && std::string(depth) == "6") {
          const double area = metric(rec, "area_abs_err").value;
          c.require(area <= 1e-10, "area_abs(3,6) = " + fmt(area));
        }
      }
    }
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("snowflake geometry");
}

void criterion_4() {
  Criterion c{4, {}};
  try {
    const ResultRecord sq = run("minkowski-fit", 42, {{"shape", "square"}}, "c04-square");
    const double a_sq = metric(sq, "alpha_hat").value;
    c.require(std::fabs(a_sq - 1.0) <= 0.05, "square alpha_hat = " + fmt(a_sq));

    const ResultRecord s3 = run("minkowski-fit", 42,
                                {{"shape", "snowflake"}, {"eta", "3"}, {"depth", "8"}},
                                "c04-snow3");
    const double a3 = metric(s3, "alpha_hat").value;
    c.require(std::fabs(a3 - 1.2619) <= 0.05, "snowflake(3) alpha_hat = " + fmt(a3));

    const ResultRecord s5 = run("minkowski-fit", 42,
                                {{"shape", "snowflake"}, {"eta", "5"}, {"depth", "8"}},
                                "c04-snow5");
    const double a5 = metric(s5, "alpha_hat").value;
    const double ref5 = solve_alpha(5.0);
    c.require(std::fabs(a5 - ref5) <= 0.05,
              "snowflake(5) alpha_hat = " + fmt(a5) + " vs " + fmt(ref5));
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("minkowski fit");
}

void criterion_5() {
  Criterion c{5, {}};
  try {
    const ResultRecord disk = run("disk-prefactor", 7, {{"shape", "disk"}}, "c05-disk");
    const double got_d = metric(disk, "j_over_t3_extrapolated").value;
    const double tgt_d = 4.0 * std::pow(nb::pi, 1.5);
    c.require(std::fabs(got_d - tgt_d) <= 0.03 * tgt_d,
              "disk J/t^3 -> " + fmt(got_d) + " vs target " + fmt(tgt_d));
    const double z_d = metric(disk, "dual_route_z").value;
    c.require(z_d <= 3.0, "disk dual-route z = " + fmt(z_d));

    const ResultRecord sq = run("disk-prefactor", 7, {{"shape", "square"}}, "c05-square");
    const double got_s = metric(sq, "j_over_t3_extrapolated").value;
    const double tgt_s = 8.0 * std::sqrt(nb::pi);
    c.require(std::fabs(got_s - tgt_s) <= 0.03 * tgt_s,
              "square J/t^3 -> " + fmt(got_s) + " vs target " + fmt(tgt_s));
    const double z_s = metric(sq, "dual_route_z").value;
    c.require(z_s <= 3.0, "square dual-route z = " + fmt(z_s));
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("finite-perimeter limit");
}

void criterion_6() {
  Criterion c{6, {}};
  try {
    const ResultRecord s3 =
        run("energy-exponent", 7, {{"eta", "3"}, {"depth", "8"}}, "c06-eta3");
    const double b3 = metric(s3, "beta_hat").value;
    c.require(std::fabs(b3 - 2.7381) <= 0.05, "snowflake(3) beta_hat = " + fmt(b3));
    const double ratio3 = metric(s3, "prefactor_ratio").value;
    c.require(ratio3 < 3.0, "prefactor max/min(3) = " + fmt(ratio3));

    const ResultRecord s5 =
        run("energy-exponent", 7, {{"eta", "5"}, {"depth", "8"}}, "c06-eta5");
    const double b5 = metric(s5, "beta_hat").value;
    const double ref5 = 4.0 - solve_alpha(5.0);
    c.require(std::fabs(b5 - ref5) <= 0.05,
              "snowflake(5) beta_hat = " + fmt(b5) + " vs " + fmt(ref5));
    const double ratio5 = metric(s5, "prefactor_ratio").value;
    c.require(ratio5 < 3.0, "prefactor max/min(5) = " + fmt(ratio5));
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("fractal energy exponent");
}

void criterion_7() {
  Criterion c{7, {}};
  try {
    const ResultRecord s3 = run("renewal-recursion", 7, {{"eta", "3"}}, "c07-eta3");
    c.require(metric(s3, "residual_bounded").value == 1.0,
              "eta=3 residual/t^4 level ratios within [0.2, 5], max |R|/t^4 = " +
                  fmt(metric(s3, "max_residual_over_t4").value));

    const ResultRecord s5 = run("renewal-recursion", 7, {{"eta", "5"}}, "c07-eta5");
    const double a0 = metric(s5, "amplitude_p0").value;
    const double a1 = metric(s5, "amplitude_p1").value;
    const double a2 = metric(s5, "amplitude_p2").value;
    c.require(a0 > a1 && a1 > a2, "eta=5 G(s) period amplitudes " + fmt(a0) + " > " +
                                      fmt(a1) + " > " + fmt(a2));
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("renewal recursion");
}

void criterion_8() {
  Criterion c{8, {}};
  try {
    const ResultRecord rec = run("ginibre-ladder", 11, {}, "c08");
    const double defect = metric(rec, "bernoulli_defect").value;
    c.require(defect <= 1e-8, "N=1 Bernoulli identity defect = " + fmt(defect));
    const double z = metric(rec, "mc_z").value;
    c.require(z <= 3.0, "N=2 exact " + fmt(metric(rec, "variance_exact_n2").value) +
                            " vs 1e6-trial MC " + fmt(metric(rec, "variance_mc_n2").value) +
                            ", z = " + fmt(z));
    const double rel = metric(rec, "gaussian_approx_rel_err").value;
    c.require(rel <= 0.02, "N=200 gaussian-approx rel err = " + fmt(rel));
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("ginibre exactness ladder");
}

void criterion_9() {
  Criterion c{9, {}};
  try {
    const ResultRecord rec = run("remainder-rate", 3, {}, "c09");
    const double rate = metric(rec, "rate").value;
    c.require(rate <= 0.9649, "fitted rate = " + fmt(rate) + " vs ceiling 0.9649");
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("remainder rate");
}

void criterion_10() {
  Criterion c{10, {}};
  try {
    const ResultRecord disk = run("variance-scaling", 29, {{"shape", "disk"}}, "c10-disk");
    const double exp_d = metric(disk, "exponent").value;
    c.require(std::fabs(exp_d - 0.5) <= 0.03, "disk exponent = " + fmt(exp_d));
    const double pf = metric(disk, "prefactor_extrapolated").value;
    const double tgt = 2.0 * std::pow(nb::pi, -1.5) * nb::pi;  // pinned constant x perimeter
    c.require(std::fabs(pf - tgt) <= 0.05 * tgt,
              "disk prefactor -> " + fmt(pf) + " vs target " + fmt(tgt));

    const ResultRecord snow =
        run("variance-scaling", 29, {{"shape", "snowflake"}}, "c10-snow");
    const double exp_s = metric(snow, "exponent").value;
    const double ref = solve_alpha(3.0) / 2.0;
    c.require(std::fabs(exp_s - ref) <= 0.03,
              "snowflake exponent = " + fmt(exp_s) + " vs " + fmt(ref));
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("variance scaling");
}

void criterion_11() {
  Criterion c{11, {}};
  try {
    const ResultRecord rec = run("clt", 11, {}, "c11");
    const double p = metric(rec, "ks_p").value;
    c.require(p > 0.01, "KS p = " + fmt(p) + " (target > 0.01, D = " +
                            fmt(metric(rec, "ks_statistic").value) + ")");
    const double neg = metric(rec, "negative_control_p").value;
    c.require(neg < 0.01, "negative control p = " + fmt(neg));
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("central limit theorem");
}

void criterion_12() {
  Criterion c{12, {}};
  try {
    const ResultRecord rec = run("touching-covariance", 13, {}, "c12");
    const double scaled = metric(rec, "scaled_cov").value;
    const double tgt = metric(rec, "scaled_target").value;
    c.require(std::fabs(scaled - tgt) <= 0.10 * tgt,
              "|Cov|/sqrt(N) = " + fmt(scaled) + " vs target " + fmt(tgt));
    const double distant = metric(rec, "distant_scaled").value;
    c.require(distant < 1e-3, "distant pair normalized cov = " + fmt(distant));
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("touching-set covariance");
}

void criterion_13() {
  Criterion c{13, {}};
  try {
    const ResultRecord rec = run(
        "sobolev-bump", 17,
        {{"bump_x", "0"}, {"bump_y", "0"}, {"bump_radius", "0.3"}}, "c13");
    const bool cauchy = metric(rec, "cauchy").value == 1.0;
    c.require(cauchy, std::string("gap contraction >= 1.5x: ") + (cauchy ? "yes" : "no"));
    const double rel = metric(rec, "final_rel_err").value;
    c.require(rel <= 0.03, "N=400 value " + fmt(metric(rec, "final_value").value) +
                               " vs limit " + fmt(metric(rec, "limit").value) +
                               ", rel err = " + fmt(rel) + " (target <= 0.03)");
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("sobolev bump");
}

void criterion_14() {
  // Re-runs a representative subset twice (deterministic experiments plus one
  // MC-backed fit at reduced budget) and compares summary.json bytes with the
  // timing line stripped.
  Criterion c{14, {}};
  try {
    struct Job {
      const char* name;
      std::map<std::string, std::string> params;
    };
    const std::vector<Job> jobs{
        {"dimension-equation", {}},
        {"lattice-classification", {}},
        {"snowflake-geometry", {}},
        {"remainder-rate", {}},
        {"minkowski-fit",
         {{"shape", "square"}, {"samples", "200000"}, {"t_grid", "0.2:0.05:log6"}}},
    };
    for (const Job& job : jobs) {
      const std::string tag_a = std::string("c14/") + job.name + "-a";
      const std::string tag_b = std::string("c14/") + job.name + "-b";
      run(job.name, 5, job.params, tag_a);
      run(job.name, 5, job.params, tag_b);
      const std::string a = summary_without_timing("acceptance-out/" + tag_a);
      const std::string b = summary_without_timing("acceptance-out/" + tag_b);
      const bool same = !a.empty() && a == b;
      c.require(same, std::string(job.name) +
                          (same ? " byte-identical" : " byte mismatch between reruns"));
    }
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  c.finish("determinism");
}

}  // namespace

int main() {
  std::filesystem::create_directories("acceptance-out");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  criterion_13();
  criterion_14();
  std::printf("%d of 14 criteria failed\n", g_failures);
  return g_failures;
}
