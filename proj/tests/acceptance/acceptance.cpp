// Acceptance checks: one PASS/FAIL line per criterion.
// Usage: acceptance [--threads N]   (0 = all cores; results do not depend on it)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "prefshape/cli/driver.hpp"
#include "prefshape/simulation.hpp"

using namespace prefshape;

namespace {

// Tolerances.
constexpr double kExactTol = 1e-12;
constexpr double kAsymptoteMcTol = 0.02;
constexpr double kOdeSupTol = 0.03;
constexpr double kDominanceSlack = 0.01;
constexpr double kLogGrowthBand = 0.10;
constexpr double kCidSettleTol = 0.01;
constexpr double kNArmFloor = 0.75;
constexpr double kNArmGap = 0.05;
constexpr double kPopularityShare = 0.6;
constexpr double kOracleTol = 1e-12;

std::size_t g_threads = 1;
int g_failures = 0;

struct ReferenceMatrix {
  const char* name;
  RewardMatrix b;
  double asymptote;
};

const std::vector<ReferenceMatrix>& reference_matrices() {
  static const std::vector<ReferenceMatrix> m{
      {"B1", RewardMatrix::two_arm(0.9, 0.4, 0.2, 0.6), 0.80},
      {"B2", RewardMatrix::two_arm(0.9, 0.4, 0.6, 0.7), 6.0 / 7.0},
      {"B3", RewardMatrix::two_arm(0.7, 0.1, 0.3, 0.5), 5.0 / 6.0},
      {"B4", RewardMatrix::two_arm(0.7, 0.1, 0.6, 0.6), 6.0 / 7.0},
  };
  return m;
}

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("criterion %2d %-28s %s  %s\n", id, title, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

AggregateResult simulate(const RewardMatrix& b, PolicySpec policy, std::size_t horizon, std::size_t reps,
                         Dynamics dyn = Dynamics::Did) {
  SimConfig cfg(b, std::move(policy));
  cfg.horizon = horizon;
  cfg.replications = reps;
  cfg.dynamics = dyn;
  return run_monte_carlo(cfg, g_threads);
}

// ---------------------------------------------------------------------------

void asymptote_reproduction() {
  bool pass = true;
  std::string detail;
  for (const auto& f : reference_matrices()) {
    const auto best = optimal_policy_2arm(f.b);
    const double a = asymptote(f.b, best);
    const bool closed = std::abs(a - f.asymptote) <= kExactTol && fmt(a, 2) == fmt(f.asymptote, 2);
    const double mc = simulate(f.b, policy::OptimalKnownB{}, 10000, 200).z1_mean.back();
    const bool near = std::abs(mc - a) <= kAsymptoteMcTol;
    pass &= closed && near;
    detail += std::string(f.name) + " a=" + fmt(a) + " mc=" + fmt(mc) + "; ";
  }
  report(1, "asymptote-reproduction", pass, detail);
}

void ode_tracking() {
  const auto b = reference_matrices()[0].b;
  const auto best = optimal_policy_2arm(b);
  auto deviation = [&](std::size_t reps) {
    const auto agg = simulate(b, policy::OptimalKnownB{}, 1000, reps);
    double worst = 0.0;
    for (std::size_t t = 50; t <= 1000; ++t) {
      worst = std::max(worst, std::abs(agg.z1_mean[t - 1] - trajectory_did(b, best, 0.5, 20, double(t))));
    }
    return worst;
  };
  const double d100 = deviation(100), d10 = deviation(10);
  report(2, "ode-tracking", d100 < kOdeSupTol && d100 < d10,
         "sup|mean-ode| R=100: " + fmt(d100) + ", R=10: " + fmt(d10));
}

void optimal_dominance_and_zero_regret() {
  bool dominance = true, zero = true;
  double worst_margin = 1.0;
  std::string where;
  for (const auto& f : reference_matrices()) {
    for (auto dyn : {Dynamics::Did, Dynamics::Cid}) {
      const auto opt = simulate(f.b, policy::OptimalKnownB{}, 1000, 1000, dyn);
      const double opt_final = opt.z1_mean.back();
      for (double r : opt.final_cumregret) zero &= r == 0.0;
      for (double r : opt.cumregret_mean) zero &= r == 0.0;
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) {
          const auto corner = simulate(f.b, policy::Fixed{{double(p), double(q)}}, 1000, 1000, dyn);
          const double margin = opt_final - corner.z1_mean.back();
          if (margin < worst_margin) {
            worst_margin = margin;
            where = std::string(f.name) + "/" + std::string(to_string(dyn)) + "/(" + std::to_string(p) + "," +
                    std::to_string(q) + ")";
          }
          dominance &= margin >= -kDominanceSlack;
        }
    }
  }
  report(3, "optimal-policy-dominance", dominance, "min(opt - corner) = " + fmt(worst_margin) + " at " + where);
  report(4, "optimal-zero-regret", zero, "cumulative regret of every optimal path is exactly 0 (8 configs x 1000)");
}

void etc_bound() {
  const auto b = RewardMatrix::two_arm(0.9, 0.7, 0.7, 0.9);
  const auto bound = etc_regret_bound(154, 1000, gaps(b).delta1);
  const double empirical = simulate(b, policy::Etc{154}, 1000, 1000).cumregret_mean.back();
  const bool pass = etc_exploration_length(1000, gaps(b).delta1) == 154 && empirical <= bound.value;
  report(5, "etc-log-regret-bound", pass, "empirical " + fmt(empirical) + " <= bound " + fmt(bound.value));
}

std::vector<std::size_t> etc_grid() {
  std::vector<std::size_t> grid;
  for (int k = 0; k < 20; ++k) {
    auto m = static_cast<std::size_t>(std::llround(std::pow(1000.0, k / 19.0)));
    if (!grid.empty() && m <= grid.back()) m = grid.back() + 1;
    grid.push_back(m);
  }
  return grid;
}

void ts_beats_etc() {
  bool pass = true;
  std::string detail;
  for (const auto& f : reference_matrices()) {
    const auto ts = simulate(f.b, policy::Thompson{}, 1000, 1000);
    double best_regret = INFINITY, best_z = -1.0;
    std::size_t m_regret = 0, m_z = 0;
    for (std::size_t m : etc_grid()) {
      const auto etc = simulate(f.b, policy::Etc{m}, 1000, 1000);
      if (etc.cumregret_mean.back() < best_regret) best_regret = etc.cumregret_mean.back(), m_regret = m;
      if (etc.z1_mean.back() > best_z) best_z = etc.z1_mean.back(), m_z = m;
    }
    const bool ok = ts.cumregret_mean.back() < best_regret && ts.z1_mean.back() >= best_z;
    pass &= ok;
    detail += std::string(f.name) + (ok ? "" : "[x]") + " ts " + fmt(ts.cumregret_mean.back(), 2) + "/" +
              fmt(ts.z1_mean.back(), 3) + " etc " + fmt(best_regret, 2) + "(m=" + std::to_string(m_regret) + ")/" +
              fmt(best_z, 3) + "(m=" + std::to_string(m_z) + "); ";
  }
  report(6, "ts-beats-etc", pass, detail);
}

void ts_log_growth() {
  const auto b = reference_matrices()[0].b;
  SimConfig cfg(b, policy::Thompson{});
  const auto agg = run_monte_carlo(cfg, g_threads);
  const std::vector<std::size_t> checkpoints{200, 300, 400, 500, 600, 700, 800, 900, 1000};
  std::vector<double> ratio;
  for (auto t : checkpoints) ratio.push_back(agg.cumregret_mean[t - 1] / std::log(double(t)));
  // Non-increasing within the band: no later ratio exceeds an earlier one by more than 10%.
  double worst = 0.0;
  for (std::size_t i = 0; i < ratio.size(); ++i)
    for (std::size_t k = i + 1; k < ratio.size(); ++k) worst = std::max(worst, ratio[k] / ratio[i] - 1.0);
  const bool monotone = worst <= kLogGrowthBand;
  const auto check = cli::report_bounds(cfg, agg);
  const bool below = check.status == cli::BoundStatus::Pass;
  std::string detail = "R/lnT:";
  for (std::size_t i = 0; i < ratio.size(); i += 2) detail += " " + std::to_string(checkpoints[i]) + "=" + fmt(ratio[i], 3);
  detail += "; max rise " + fmt(100 * worst, 1) + "% (band 10%)";
  detail += "; R(1000)=" + fmt(check.empirical, 2);
  if (check.bound) {
    detail += " vs bound " + fmt(check.bound->value, 1) + " (f1=" + fmt(check.bound->f1, 3) + ", f2=" + fmt(check.bound->f2, 3) + ")";
  }
  report(7, "ts-logarithmic-growth", monotone && below, detail);
}

void cid_did_equivalence() {
  struct Case {
    const char* name;
    RewardMatrix b;
  };
  const Case cases[] = {{"B1", reference_matrices()[0].b},
                        {"fix-a", RewardMatrix::two_arm(0.7, 0.1, 0.2, 0.5)},
                        {"fix-b", RewardMatrix::two_arm(0.9, 0.7, 0.7, 0.9)}};
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    const auto best = optimal_policy_2arm(c.b);
    const auto d = drift(c.b, best);
    const double a = asymptote(c.b, best);
    // Both closed forms settle on the same limit.
    const bool same_limit = std::abs(trajectory_cid(c.b, best, 0.5, 20, 1e6) - a) <= kExactTol &&
                            std::abs(trajectory_did(c.b, best, 0.5, 20, 1e15) - a) <= 1e-4;
    const auto t_star = static_cast<std::size_t>(std::ceil(10.0 * 20.0 / d.total()));
    const double cid = std::abs(trajectory_cid(c.b, best, 0.5, 20, double(t_star)) - a);
    const double did = std::abs(trajectory_did(c.b, best, 0.5, 20, double(t_star)) - a);
    const double cid_mc = std::abs(simulate(c.b, policy::OptimalKnownB{}, t_star, 1000, Dynamics::Cid).z1_mean.back() - a);
    const double did_mc = std::abs(simulate(c.b, policy::OptimalKnownB{}, t_star, 1000, Dynamics::Did).z1_mean.back() - a);
    const bool ok = same_limit && cid <= kCidSettleTol && did > kCidSettleTol && cid_mc <= kCidSettleTol &&
                    did_mc > kCidSettleTol;
    pass &= ok;
    detail += std::string(c.name) + " t*=" + std::to_string(t_star) + " |cid-a|=" + fmt(cid) + "/" + fmt(cid_mc) +
              "(mc) |did-a|=" + fmt(did) + "/" + fmt(did_mc) + "(mc); ";
  }
  report(8, "cid-did-equivalence", pass, detail);
}

void narm_shaping() {
  const auto b = RewardMatrix::constant_diagonal(3, 0.9, 0.7);
  const auto ts = simulate(b, policy::NArmThompson{}, 1000, 200);
  const auto opt = simulate(b, policy::NArmOptimal{}, 1000, 200);
  const double ts_final = ts.z1_mean.back(), opt_final = opt.z1_mean.back();
  double sup = 0.0;
  for (std::size_t k = 0; k < ts.steps(); ++k) sup = std::max(sup, std::abs(ts.z1_mean[k] - opt.z1_mean[k]));
  const bool pass = ts_final >= kNArmFloor && std::abs(ts_final - opt_final) <= kNArmGap;
  report(9, "narm-shaping", pass,
         "TS z1(1000)=" + fmt(ts_final) + ", optimal " + fmt(opt_final) + ", sup gap over t " + fmt(sup));
}

struct PopularityOutcome {
  double s1_row0_share;
  double s1_row1_share;
  double same_dominant;     // one system above kPopularityShare in both rows
  double s1_row0_s2_row1;   // S1 wins type-1 row, S2 wins type-2 row
  double s2_row0_s1_row1;
};

PopularityOutcome competing(const RewardMatrix& b) {
  CompetingConfig cfg(b);
  const auto res = run_competing(cfg, g_threads);
  PopularityOutcome o{res.s1_share_type0_mean.back(), res.s1_share_type1_mean.back(), 0, 0, 0};
  for (const auto& pop : res.final_popularity) {
    const double r0 = pop.share(0, 0), r1 = pop.share(1, 0);
    o.same_dominant += (r0 > kPopularityShare && r1 > kPopularityShare) ||
                       (1 - r0 > kPopularityShare && 1 - r1 > kPopularityShare);
    o.s1_row0_s2_row1 += r0 > 0.5 && r1 < 0.5;
    o.s2_row0_s1_row1 += r0 < 0.5 && r1 > 0.5;
  }
  const double n = static_cast<double>(res.final_popularity.size());
  o.same_dominant /= n;
  o.s1_row0_s2_row1 /= n;
  o.s2_row0_s1_row1 /= n;
  return o;
}

void competing_cases() {
  const auto c1 = competing(RewardMatrix::two_arm(0.9, 0.4, 0.2, 0.6));
  const auto c2 = competing(RewardMatrix::two_arm(0.6, 0.2, 0.2, 0.6));
  const auto c2b = competing(RewardMatrix::two_arm(0.7, 0.5, 0.6, 0.8));
  const bool case1 = c1.same_dominant > 0.5;
  const bool case2 = c2.s1_row0_s2_row1 > 0.5;
  std::string detail = "case1 one system >60% in both rows: " + fmt(c1.same_dominant, 3) +
                       " (S1 shares " + fmt(c1.s1_row0_share, 3) + "," + fmt(c1.s1_row1_share, 3) + ")";
  detail += "; case2 (0.6,0.2,0.2,0.6) S1-row1/S2-row2: " + fmt(c2.s1_row0_s2_row1, 3) +
            ", reversed split: " + fmt(c2.s2_row0_s1_row1, 3);
  detail += "; (0.7,0.5,0.6,0.8) S1-row1/S2-row2: " + fmt(c2b.s1_row0_s2_row1, 3);
  report(10, "competing-systems", case1 && case2, detail);
}

void oracle_equivalence() {
  RandomSource rng(20240611);
  bool pass = true;
  double worst = 0.0;
  int instances = 0;
  for (int k = 0; k < 20; ++k) {
    const oracle::Matrix2 b{{{rng.uniform(), rng.uniform()}, {rng.uniform(), rng.uniform()}}};
    const auto best = optimal_policy_2arm(RewardMatrix::two_arm(b[0][0], b[0][1], b[1][0], b[1][1]));
    const int code = 2 * static_cast<int>(best.p) + static_cast<int>(best.q);
    const int n0 = 1 + static_cast<int>(rng.index(6));
    const int z0 = static_cast<int>(rng.index(static_cast<std::size_t>(n0) + 1));
    for (int horizon = 1; horizon <= 6; ++horizon) {
      const double stationary = oracle::exhaustive_expected_share(b, n0, z0, std::vector<int>(horizon, code));
      std::vector<int> seq(horizon, 0);
      double best_any = -1.0;
      while (true) {
        best_any = std::max(best_any, oracle::exhaustive_expected_share(b, n0, z0, seq));
        int i = 0;
        while (i < horizon && ++seq[i] == 4) seq[i++] = 0;
        if (i == horizon) break;
      }
      worst = std::max(worst, best_any - stationary);
      pass &= stationary >= best_any - kOracleTol;
      ++instances;
    }
  }
  report(11, "oracle-equivalence", pass,
         std::to_string(instances) + " (B, N0, T<=6) instances, max(best sequence - stationary) = " +
             std::to_string(worst));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "prefshape_acceptance";
  fs::remove_all(dir);
  bool pass = true;
  std::size_t files = 0;
  for (const char* name : {"fig-popvtime1-a", "fig-narm-3", "fig-competing-case2", "fig-fixpopvtime-a"}) {
    auto j = cli::preset_json(name);
    j["replications"] = 200;
    const auto ex = cli::parse_config(j);
    std::vector<std::vector<std::string>> contents;
    int variant = 0;
    for (std::size_t threads : {std::size_t{1}, std::size_t{1}, std::max<std::size_t>(g_threads, 3)}) {
      const auto outs = cli::run_experiment(ex, dir / std::to_string(variant++) / (std::string(name) + ".csv"), threads);
      std::vector<std::string> texts;
      for (const auto& o : outs) texts.push_back(slurp(o.csv));
      if (ex.is_competing()) {
        auto pop = outs[0].csv;
        texts.push_back(slurp(pop.replace_extension(".popularity.csv")));
      }
      contents.push_back(texts);
    }
    pass &= contents[0] == contents[1] && contents[0] == contents[2];
    files += contents[0].size();
  }
  fs::remove_all(dir);
  report(12, "determinism", pass,
         std::to_string(files) + " CSV files byte-identical across 2 runs and thread counts 1 vs " +
             std::to_string(std::max<std::size_t>(g_threads, 3)));
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t threads = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      threads = std::stoul(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--threads N]\n");
      return 2;
    }
  }
  g_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;

  const auto start = std::chrono::steady_clock::now();
  asymptote_reproduction();
  ode_tracking();
  optimal_dominance_and_zero_regret();
  etc_bound();
  ts_beats_etc();
  ts_log_growth();
  cid_did_equivalence();
  narm_shaping();
  competing_cases();
  oracle_equivalence();
  determinism();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of 12 criteria failed (%.1f s, %zu threads)\n", g_failures, secs, g_threads);
  return g_failures == 0 ? 0 : 1;
}
