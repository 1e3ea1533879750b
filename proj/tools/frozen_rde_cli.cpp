// Command-line front end: c2 root finding, bivariate grid iteration, Monte Carlo checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frozen_rde/frozen_rde.hpp"
#include "table.hpp"

namespace fs = std::filesystem;
using namespace frozen_rde;
using cli::fmt;
using cli::Table;

namespace {

constexpr const char *kVersion = "1.0.0";
constexpr int kUsage = 1;
constexpr int kNumeric = 2;

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out_dir = ".";
  std::string format = "csv";
};

void add_common(CLI::App *app, Common &c) {
  app->add_option("--seed", c.seed, "64-bit seed");
  app->add_option("--threads", c.threads, "worker threads (0: FROZEN_RDE_THREADS or all cores)");
  app->add_option("--out-dir", c.out_dir, "output directory");
  app->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv", "pgm", "json"}));
}

class Run {
public:
  Run(const Common &common, std::string command, std::vector<std::string> argv, std::string config)
      : common_(common), command_(std::move(command)), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(common_.out_dir);
    manifest_["tool"] = "frozen-rde";
    manifest_["version"] = kVersion;
    manifest_["command"] = command_;
    manifest_["seed"] = common_.seed;
    manifest_["threads"] = resolve_threads(common_.threads);
    manifest_["format"] = common_.format;
    manifest_["argv"] = std::move(argv);
    manifest_["parameters"] = std::move(config);
    write_manifest();
  }

  void finish() {
    manifest_["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_manifest();
  }

  std::string path(const std::string &name) const { return (fs::path(common_.out_dir) / name).string(); }

  /** Writes a table in the requested text format; returns the file path. */
  std::string emit(const std::string &stem, const Table &t) const {
    if (common_.format == "json") {
      const auto p = path(stem + ".json");
      t.write_json(p);
      return p;
    }
    const auto p = path(stem + ".csv");
    t.write_csv(p);
    return p;
  }

private:
  void write_manifest() const {
    std::ofstream out(path("manifest.json"));
    out << manifest_.dump(2) << "\n";
  }

  Common common_;
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  nlohmann::ordered_json manifest_;
};

class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------- find-c2

int cmd_find_c2(Run &run, double tol) {
  const double c = find_c2(tol);
  const double f1 = solve_fc_implicit(c, 1.0);
  const double f1_rk = solve_fc_rk(c).samples.back();
  const double bifix = f1 * f1 - 0.5 * f1 - 2.0 * c;
  const double nodiag = 2.0 * c / (f1 - 0.5) - f1;
  const double quadratic = f1 - fc_at_one(c);

  Table summary;
  summary.note("tol", tol);
  summary.columns = {"c2", "f_c2_1_implicit", "f_c2_1_rk", "h_c2", "bifix_residual", "nodiag_residual",
                     "quadratic_residual"};
  summary.add({c, f1, f1_rk, h_of_c(c), bifix, nodiag, quadratic});
  run.emit("c2", summary);

  Table scan;
  scan.columns = {"c", "h_of_c", "f1_sq_minus_half_f1"};
  for (int k = 0; k <= 200; ++k) {
    const double cc = 1e-6 * std::pow(0.25 / 1e-6, k / 200.0);
    const double f = fc_at_one(cc);
    scan.add({cc, h_of_c(cc), f * f - 0.5 * f});
  }
  run.emit("h_scan", scan);

  const auto profile = solve_fc_rk(c, 1001);
  Table prof;
  prof.columns = {"r", "f_c2"};
  for (std::size_t i = 0; i < profile.samples.size(); ++i) prof.add({profile.grid_point(i), profile.samples[i]});
  run.emit("f_c2", prof);

  std::cout << "c2              = " << fmt(c) << "\n"
            << "f_c2(1)         = " << fmt(f1) << " (implicit), " << fmt(f1_rk) << " (RK4)\n"
            << "h(c2)           = " << fmt(h_of_c(c)) << "\n"
            << "f^2 - f/2 - 2c  = " << fmt(bifix) << "\n"
            << "2c/(f-1/2) - f  = " << fmt(nodiag) << "\n";
  return 0;
}

// ---------------------------------------------------------------- iterate-bivariate

void write_grid_csv(const std::string &path, const BivariateUnionCdf &F) {
  std::ofstream out(path);
  out << "# n=" << F.n() << "\n";
  out << "r,s,F\n";
  for (std::size_t i = 0; i < F.n(); ++i)
    for (std::size_t j = 0; j < F.n(); ++j) out << fmt(F.coord(i)) << "," << fmt(F.coord(j)) << "," << fmt(F(i, j)) << "\n";
}

void write_density_pgm(const std::string &path, const BivariateComponents &c) {
  const double top = *std::max_element(c.density.begin(), c.density.end());
  std::ofstream out(path);
  out << "P2\n" << c.n << " " << c.n << "\n65535\n";
  for (std::size_t i = 0; i < c.n; ++i) {
    for (std::size_t j = 0; j < c.n; ++j) {
      const double v = top > 0.0 ? std::clamp(c.density_at(i, j) / top, 0.0, 1.0) : 0.0;
      out << (j ? " " : "") << std::lround(v * 65535.0);
    }
    out << "\n";
  }
}

int cmd_iterate_bivariate(Run &run, const Common &common, std::size_t n, int iters, double tol,
                          const std::string &init, std::vector<int> checkpoints) {
  if (n < 16) throw UsageError("--grid-n must be at least 16");
  const BivariateUnionCdf F0 = init == "trivial" ? BivariateUnionCdf::trivial(n) : BivariateUnionCdf::product(n);
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  const bool grids = common.format != "pgm";
  const bool images = common.format != "json";

  int written = 0;
  auto checkpoint = [&](int k, const BivariateUnionCdf &F) {
    if (!std::binary_search(checkpoints.begin(), checkpoints.end(), k)) return;
    if (grids) write_grid_csv(run.path("F_iter_" + std::to_string(k) + ".csv"), F);
    if (images) write_density_pgm(run.path("density_iter_" + std::to_string(k) + ".pgm"), components_from_F(F));
    ++written;
  };

  Table trace;
  trace.columns = {"iteration", "step", "F11"};
  checkpoint(0, F0);
  const auto result = iterate_bivariate(F0, iters, tol, common.threads,
                                        [&](int k, const BivariateUnionCdf &F, double step) {
                                          trace.add({static_cast<double>(k), step, F(n - 1, n - 1)});
                                          checkpoint(k, F);
                                        });
  const double to_nontrivial = sup_distance(result.grid, rho2_grid(n));
  const double to_trivial = sup_distance(result.grid, BivariateUnionCdf::trivial(n));
  trace.note("n", static_cast<double>(n));
  trace.note("init", init);
  trace.note("iterations", static_cast<double>(result.iterations));
  trace.note("converged", result.converged ? "true" : "false");
  trace.note("sup_dist_nontrivial", to_nontrivial);
  trace.note("sup_dist_trivial", to_trivial);
  trace.note("checkpoints_written", static_cast<double>(written));
  run.emit("iterate_summary", trace);

  std::cout << "iterations       = " << result.iterations << (result.converged ? " (converged)" : "") << "\n"
            << "last sup-step    = " << fmt(result.last_step) << "\n"
            << "F(1,1)           = " << fmt(result.grid(n - 1, n - 1)) << "\n"
            << "sup-dist to (r v s) f_c2(r ^ s / r v s) = " << fmt(to_nontrivial) << "\n"
            << "sup-dist to (r v s)/2                    = " << fmt(to_trivial) << "\n"
            << "checkpoints      = " << written << "\n";
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimParams {
  std::string kind;
  int depth = 10;
  std::uint64_t samples = 10000;
  std::vector<double> t;
  int gens = 200;
  int depth_x = 6;
  std::uint64_t trees = 1000;
  double horizon = 10.0;
  double phi0 = 0.3;
  std::vector<double> interval;
  std::uint64_t budget = 50'000'000;
  std::vector<double> probes{0.2, 0.4, 0.6, 0.8, 1.0};
  bool gens_given = false;
};

UnivariateSolution measure_from(const SimParams &p) {
  if (p.interval.size() % 2 != 0) throw UsageError("--interval takes center,radius pairs");
  std::vector<Interval> iv;
  for (std::size_t k = 0; k < p.interval.size(); k += 2) iv.push_back({p.interval[k], p.interval[k + 1]});
  return make_general_solution(iv);
}

std::vector<double> t_values(const SimParams &p, std::vector<double> fallback) {
  const auto &t = p.t.empty() ? fallback : p.t;
  for (double v : t)
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("--t values must lie in [0,1]");
  return t;
}

int sim_rtp(Run &run, const SimParams &p, const Common &c, Side side) {
  if (p.depth < 0 || p.depth > 22) throw UsageError("--depth must lie in [0,22]");
  const UnivariateSolution base = measure_from(p);
  const UnivariateSolution mu = side == Side::x ? pushforward_h(base) : base;
  const auto ts = t_values(p, side == Side::x ? std::vector<double>{0.55, 0.6, 0.7, 0.8, 0.9, 1.0}
                                              : std::vector<double>{0.1, 0.2, 0.4, 0.6, 0.8, 1.0});
  const auto blocks = map_blocks(p.samples, 256, c.threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> roots;
    for (std::size_t k = b; k < e; ++k)
      roots.push_back(sample_rtp(p.depth, mu, side, c.seed, k).value[0].value_or(std::numeric_limits<double>::infinity()));
    return roots;
  });
  std::vector<double> roots;
  for (const auto &blk : blocks) roots.insert(roots.end(), blk.begin(), blk.end());
  const auto ks = ks_one_sample(roots, [&](double x) { return mu.cdf(x); }, 1.0 - mu.inf_mass());

  Table t;
  t.note("kind", p.kind);
  t.note("depth", static_cast<double>(p.depth));
  t.note("samples", static_cast<double>(p.samples));
  t.note("ks_distance", ks.statistic);
  t.note("ks_p_value", ks.p_value);
  t.columns = {"t", "estimate", "std_err", "target"};
  for (double x : ts) {
    std::uint64_t hits = 0;
    for (double r : roots) hits += r <= x ? 1 : 0;
    const auto est = binomial_estimate(hits, p.samples);
    t.add({x, est.mean, est.std_err, mu.cdf(x)});
  }
  run.emit(p.kind, t);
  std::cout << "root-law KS distance " << fmt(ks.statistic) << ", p = " << fmt(ks.p_value) << "\n";
  return 0;
}

int sim_mbbt(Run &run, const SimParams &p, const Common &c) {
  const int gens = p.gens_given ? p.gens : 12;
  if (gens < 0 || gens > 30) throw UsageError("--gens must lie in [0,30] for mbbt");
  struct Part {
    std::vector<double> pop;
    std::vector<double> pop_sq;
    double lifetime = 0, nodes = 0, branching = 0;
  };
  const auto blocks = map_blocks(p.samples, 64, c.threads, [&](std::size_t b, std::size_t e) {
    Part part;
    part.pop.assign(static_cast<std::size_t>(gens) + 1, 0.0);
    part.pop_sq = part.pop;
    for (std::size_t k = b; k < e; ++k) {
      const auto m = sample_mbbt(gens, c.seed, k);
      std::vector<double> count(static_cast<std::size_t>(gens) + 1, 0.0);
      for (std::size_t i = 0; i < m.size(); ++i) {
        count[static_cast<std::size_t>(m.generation[i])] += 1;
        part.lifetime += m.lifetime[i];
        part.nodes += 1;
        part.branching += m.kappa[i] == Kappa::branching ? 1 : 0;
      }
      for (std::size_t g = 0; g < count.size(); ++g) {
        part.pop[g] += count[g];
        part.pop_sq[g] += count[g] * count[g];
      }
    }
    return part;
  });
  Part all;
  all.pop.assign(static_cast<std::size_t>(gens) + 1, 0.0);
  all.pop_sq = all.pop;
  for (const auto &b : blocks) {
    for (std::size_t g = 0; g < all.pop.size(); ++g) {
      all.pop[g] += b.pop[g];
      all.pop_sq[g] += b.pop_sq[g];
    }
    all.lifetime += b.lifetime;
    all.nodes += b.nodes;
    all.branching += b.branching;
  }
  const double n = static_cast<double>(p.samples);
  Table t;
  t.note("kind", p.kind);
  t.note("samples", n);
  t.note("mean_lifetime", all.lifetime / all.nodes);
  t.note("branching_fraction", all.branching / all.nodes);
  t.columns = {"generation", "mean_population", "std_err", "target"};
  for (std::size_t g = 0; g < all.pop.size(); ++g) {
    const double mean = all.pop[g] / n;
    const double var = std::max(0.0, all.pop_sq[g] / n - mean * mean);
    t.add({static_cast<double>(g), mean, std::sqrt(var / n), std::pow(1.5, static_cast<double>(g))});
  }
  run.emit(p.kind, t);
  std::cout << "mean lifetime " << fmt(all.lifetime / all.nodes) << ", branching fraction "
            << fmt(all.branching / all.nodes) << "\n";
  return 0;
}

int sim_endogeny(Run &run, const SimParams &p, const Common &c) {
  if (p.depth < 0) throw UsageError("--depth must be nonnegative");
  const auto res = endogeny_gap_mc(p.depth, p.samples, c.seed, p.probes, p.probes, c.threads, p.budget);
  Table t;
  t.note("kind", p.kind);
  t.note("depth", static_cast<double>(p.depth));
  t.note("p_equal", res.p_equal().mean);
  t.note("p_equal_std_err", res.p_equal().std_err);
  t.note("p_both_infinite", binomial_estimate(res.both_infinite, res.samples).mean);
  t.columns = {"r", "s", "count", "total"};
  for (std::size_t a = 0; a < res.r.size(); ++a)
    for (std::size_t b = 0; b < res.s.size(); ++b)
      t.add({res.r[a], res.s[b], static_cast<double>(res.rect_counts[a * res.s.size() + b]),
             static_cast<double>(res.samples)});
  run.emit(p.kind, t);
  std::cout << "P[Y = Y'] = " << fmt(res.p_equal().mean) << " +- " << fmt(res.p_equal().std_err) << "\n";
  return 0;
}

int sim_survival(Run &run, const SimParams &p, const Common &c) {
  if (p.gens < 0) throw UsageError("--gens must be nonnegative");
  Table t;
  t.note("kind", p.kind);
  t.note("generations", static_cast<double>(p.gens));
  t.columns = {"t", "estimate", "std_err", "target"};
  for (double x : t_values(p, {0.25, 0.5, 0.75})) {
    const auto est = survival_probability_estimate(x, p.gens, p.samples, c.seed, c.threads);
    t.add({x, est.mean, est.std_err, x});
    std::cout << "t = " << fmt(x) << ": " << fmt(est.mean) << " +- " << fmt(est.std_err) << "\n";
  }
  run.emit(p.kind, t);
  return 0;
}

int sim_perc(Run &run, const SimParams &p, const Common &c) {
  if (p.depth < 0 || p.depth > 30) throw UsageError("--depth must lie in [0,30]");
  const auto mu = measure_from(p);
  const auto rows = percolation_cdf_estimate(mu, p.depth, p.samples, t_values(p, {0.2, 0.4, 0.6, 0.8}), c.seed, c.threads);
  Table t;
  t.note("kind", p.kind);
  t.note("depth", static_cast<double>(p.depth));
  for (const auto &r : rows) t.note("exact_depth_n(t=" + fmt(r.t) + ")", r.exact_depth_n);
  t.columns = {"t", "estimate", "std_err", "target"};
  for (const auto &r : rows) {
    t.add({r.t, r.estimate.mean, r.estimate.std_err, r.target});
    std::cout << "t = " << fmt(r.t) << ": " << fmt(r.estimate.mean) << " +- " << fmt(r.estimate.std_err)
              << " (depth-n exact " << fmt(r.exact_depth_n) << ", limit " << fmt(r.target) << ")\n";
  }
  run.emit(p.kind, t);
  return 0;
}

int sim_offspring(Run &run, const SimParams &p, const Common &c) {
  const auto ts = t_values(p, {0.5});
  if (ts.size() != 1) throw UsageError("offspring takes a single --t");
  const auto mu = measure_from(p);
  const auto res = open_component_offspring_test(ts[0], mu, p.samples, c.seed, std::min(p.depth, 12), c.threads);
  Table t;
  t.note("kind", p.kind);
  t.note("t", ts[0]);
  t.note("chi_square", res.chi_square.statistic);
  t.note("dof", static_cast<double>(res.chi_square.dof));
  t.note("p_value", res.chi_square.p_value);
  t.columns = {"offspring", "count", "expected_prob"};
  for (std::size_t k = 0; k < 3; ++k) t.add({static_cast<double>(k), static_cast<double>(res.counts[k]), res.expected[k]});
  run.emit(p.kind, t);
  std::cout << "chi-square " << fmt(res.chi_square.statistic) << " (dof " << res.chi_square.dof
            << "), p = " << fmt(res.chi_square.p_value) << "\n";
  return 0;
}

int sim_scale(Run &run, const SimParams &p, const Common &c) {
  const auto ts = t_values(p, {0.5});
  if (ts.size() != 1 || !(ts[0] > 0.0)) throw UsageError("scale-check takes a single --t in (0,1]");
  const int gens = p.gens_given ? p.gens : 100;
  const auto res = scale_invariance_test(ts[0], p.samples, c.seed, gens, 0.5, c.threads);
  Table t;
  t.note("kind", p.kind);
  t.note("t", ts[0]);
  t.note("survival", res.survival.mean);
  t.note("survival_std_err", res.survival.std_err);
  t.note("kept", static_cast<double>(res.kept));
  t.columns = {"statistic", "ks_distance", "p_value"};
  t.add_cells({"branch_height", fmt(res.branch_height.statistic), fmt(res.branch_height.p_value)});
  t.add_cells({"marks_below", fmt(res.marks_below.statistic), fmt(res.marks_below.p_value)});
  t.add_cells({"mark_values", fmt(res.mark_values.statistic), fmt(res.mark_values.p_value)});
  run.emit(p.kind, t);
  std::cout << "P[open subtree survives] = " << fmt(res.survival.mean) << " +- " << fmt(res.survival.std_err) << "\n";
  return 0;
}

int sim_couple(Run &run, const SimParams &p, const Common &c) {
  if (p.depth_x < 1 || p.depth_x > 10) throw UsageError("--depth-x must lie in [1,10]");
  const auto res = couple_check(p.depth_x, p.trees, c.seed, c.threads);
  const auto ks_tau = ks_one_sample(res.tau_bar, [](double x) { return x; });
  const auto ks_root = ks_one_sample(res.root_values, [](double x) { return XSideUnionCdf::marginal(x); }, 0.5);
  Table t;
  t.note("kind", p.kind);
  t.note("depth_x", static_cast<double>(p.depth_x));
  t.note("trees", static_cast<double>(p.trees));
  t.columns = {"statistic", "value"};
  t.add_cells({"recursion_exact", res.recursion_exact ? "1" : "0"});
  t.add_cells({"retries", std::to_string(res.retries)});
  t.add_cells({"tau_bar_nodes", std::to_string(res.tau_bar.size())});
  t.add_cells({"tau_bar_ks_distance", fmt(ks_tau.statistic)});
  t.add_cells({"tau_bar_ks_p_value", fmt(ks_tau.p_value)});
  t.add_cells({"root_ks_distance", fmt(ks_root.statistic)});
  t.add_cells({"root_ks_p_value", fmt(ks_root.p_value)});
  run.emit(p.kind, t);
  std::cout << "recursion exact: " << (res.recursion_exact ? "yes" : "no") << ", tau_bar KS p = "
            << fmt(ks_tau.p_value) << ", root KS p = " << fmt(ks_root.p_value) << "\n";
  return 0;
}

int sim_skeletal(Run &run, const SimParams &p) {
  Table t;
  t.note("kind", p.kind);
  t.note("horizon", p.horizon);
  t.note("phi0", p.phi0);
  t.columns = {"t", "max_deviation"};
  for (double x : t_values(p, {0.3, 0.5, 1.0})) {
    if (!(x > 0.0)) throw UsageError("skeletal-check needs t > 0");
    const double d = skeletal_ode_check(x, p.horizon, p.phi0);
    t.add({x, d});
    std::cout << "t = " << fmt(x) << ": max deviation " << fmt(d) << "\n";
  }
  run.emit(p.kind, t);
  return 0;
}

int cmd_simulate(Run &run, const SimParams &p, const Common &c) {
  if (c.format == "pgm") throw UsageError("--format pgm applies to iterate-bivariate only");
  if (p.kind == "rtp-x") return sim_rtp(run, p, c, Side::x);
  if (p.kind == "rtp-y") return sim_rtp(run, p, c, Side::y);
  if (p.kind == "mbbt") return sim_mbbt(run, p, c);
  if (p.kind == "endogeny-gap") return sim_endogeny(run, p, c);
  if (p.kind == "survival") return sim_survival(run, p, c);
  if (p.kind == "perc-cdf") return sim_perc(run, p, c);
  if (p.kind == "offspring") return sim_offspring(run, p, c);
  if (p.kind == "scale-check") return sim_scale(run, p, c);
  if (p.kind == "couple-check") return sim_couple(run, p, c);
  if (p.kind == "skeletal-check") return sim_skeletal(run, p);
  throw UsageError("unknown simulation kind " + p.kind);
}

/** Stored argv without --out-dir/--threads, so replay can redirect output. */
std::vector<std::string> replayable(const std::vector<std::string> &args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string &a = args[i];
    if (a == "--out-dir" || a == "--threads") {
      ++i;
      continue;
    }
    if (a.rfind("--out-dir=", 0) == 0 || a.rfind("--threads=", 0) == 0) continue;
    out.push_back(a);
  }
  return out;
}

int run_cli(std::vector<std::string> args) {
  CLI::App app{"Frozen percolation fixed points: root finding, grid iteration, Monte Carlo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;

  auto *find = app.add_subcommand("find-c2", "solve h(c) = 1 for c2 and report consistency residuals");
  double tol = 1e-9;
  find->add_option("--tol", tol, "bisection tolerance")->check(CLI::PositiveNumber);
  add_common(find, common);

  auto *iter = app.add_subcommand("iterate-bivariate", "iterate the bivariate map on a union-CDF grid");
  std::size_t grid_n = 512;
  int iters = 100;
  double iter_tol = 1e-7;
  std::string init = "product";
  std::vector<int> checkpoints{0, 1, 3, 10, 40, 100};
  iter->add_option("--grid-n", grid_n, "grid points per axis");
  iter->add_option("--iters", iters, "maximum iterations")->check(CLI::NonNegativeNumber);
  iter->add_option("--tol", iter_tol, "sup-norm step tolerance")->check(CLI::NonNegativeNumber);
  iter->add_option("--init", init, "initial grid")->check(CLI::IsMember({"product", "trivial"}));
  iter->add_option("--checkpoints", checkpoints, "iterations at which grids are written")->delimiter(',');
  add_common(iter, common);

  auto *sim = app.add_subcommand("simulate", "Monte Carlo and ODE checks");
  SimParams sp;
  sim->add_option("kind", sp.kind, "simulation kind")
      ->required()
      ->check(CLI::IsMember({"rtp-x", "rtp-y", "mbbt", "endogeny-gap", "survival", "perc-cdf", "offspring",
                             "scale-check", "couple-check", "skeletal-check"}));
  sim->add_option("--depth", sp.depth, "tree depth");
  sim->add_option("--samples", sp.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  sim->add_option("--t", sp.t, "time values")->delimiter(',');
  auto *gens_opt = sim->add_option("--gens", sp.gens, "generation cutoff");
  sim->add_option("--depth-x", sp.depth_x, "binary-tree depth for couple-check");
  sim->add_option("--trees", sp.trees, "number of coupled trees")->check(CLI::PositiveNumber);
  sim->add_option("--horizon", sp.horizon, "ODE horizon")->check(CLI::PositiveNumber);
  sim->add_option("--phi0", sp.phi0, "ODE initial value")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--interval", sp.interval, "center,radius pairs of a general RDE solution")->delimiter(',');
  sim->add_option("--budget", sp.budget, "node visits allowed per endogeny sample")->check(CLI::PositiveNumber);
  sim->add_option("--probes", sp.probes, "probe coordinates for endogeny-gap rectangles")->delimiter(',');
  add_common(sim, common);

  auto *replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  std::string manifest_path;
  std::string replay_out;
  unsigned replay_threads = 0;
  replay->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
  replay->add_option("--out-dir", replay_out, "output directory")->required();
  replay->add_option("--threads", replay_threads, "worker threads");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  if (replay->parsed()) {
    std::ifstream in(manifest_path);
    const auto m = nlohmann::json::parse(in);
    auto argv = replayable(m.at("argv").get<std::vector<std::string>>());
    argv.push_back("--out-dir");
    argv.push_back(replay_out);
    argv.push_back("--threads");
    argv.push_back(std::to_string(replay_threads));
    return run_cli(argv);
  }

  try {
    CLI::App *chosen = app.get_subcommands().front();
    Run run(common, chosen->get_name(), args, app.config_to_str(true, false));
    int code = 0;
    if (chosen == find) code = cmd_find_c2(run, tol);
    if (chosen == iter) code = cmd_iterate_bivariate(run, common, grid_n, iters, iter_tol, init, checkpoints);
    if (chosen == sim) {
      sp.gens_given = gens_opt->count() > 0;
      code = cmd_simulate(run, sp, common);
    }
    run.finish();
    return code;
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidMeasureError &e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ValidationError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError &e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const InsufficientDepthError &e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const InsufficientDataError &e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception &e) {
    // unwritable --out-dir and similar
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}

} // namespace

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args);
}
