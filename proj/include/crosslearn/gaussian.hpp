#pragma once

#include "crosslearn/core.hpp"
#include "crosslearn/coupled_ball.hpp"
#include "crosslearn/csv.hpp"
#include "crosslearn/parallel.hpp"
#include "crosslearn/rng.hpp"

#include <algorithm>
#include <cstdint>

namespace crosslearn {

// ---------------------------------------------------------------------------
// Scenario and sufficient statistics
// ---------------------------------------------------------------------------

// Additive-noise recovery setup: task t observes N_t samples y = truth_t + eta
// with eta ~ N(0, sigma^2 I). Everything downstream is a function of the
// per-task sample means, so Monte Carlo trials draw those directly.
struct GaussianScenario {
  std::vector<VectorXd> truth;
  double sigma = 1.0;
  std::vector<int> n_per_task;
  std::uint64_t seed = 0;

  int task_count() const { return static_cast<int>(truth.size()); }
  int dim() const { return truth.empty() ? 0 : static_cast<int>(truth.front().size()); }
};

inline void validate(const GaussianScenario& s) {
  if (s.truth.empty()) throw std::invalid_argument("gaussian scenario: no tasks");
  if (!(s.sigma > 0.0)) throw std::invalid_argument("gaussian scenario: sigma must be > 0");
  if (s.n_per_task.size() != s.truth.size())
    throw std::invalid_argument("gaussian scenario: |n_per_task| != |truth|");
  for (int n : s.n_per_task)
    if (n < 1) throw std::invalid_argument("gaussian scenario: N_t >= 1 required");
  for (const auto& v : s.truth)
    if (v.size() != s.truth.front().size())
      throw std::invalid_argument("gaussian scenario: ragged truth dimensions");
}

struct SufficientStats {
  std::vector<VectorXd> task_means;
  VectorXd grand_mean;
};

// Per-task arithmetic means of the targets. Rejects empty tasks.
inline std::vector<VectorXd> separate_estimate(const std::vector<TaskDataset>& tasks) {
  std::vector<VectorXd> means;
  means.reserve(tasks.size());
  for (const auto& task : tasks) {
    validate(task);
    VectorXd m = VectorXd::Zero(task.targets.front().size());
    for (const auto& y : task.targets) m += y;
    means.push_back(m / task.n_samples());
  }
  return means;
}

// Minimizer of the pooled objective sum_t (1/N_t) sum_n ||y - theta||^2:
// the unweighted mean of the task means, for equal and unequal N_t alike.
inline VectorXd consensus_estimate(const std::vector<VectorXd>& task_means) {
  if (task_means.empty())
    throw std::invalid_argument("consensus_estimate: T >= 1 required");
  VectorXd c = VectorXd::Zero(task_means.front().size());
  for (const auto& m : task_means) c += m;
  return c / static_cast<double>(task_means.size());
}

inline SufficientStats make_stats(std::vector<VectorXd> task_means) {
  SufficientStats s;
  s.grand_mean = consensus_estimate(task_means);
  s.task_means = std::move(task_means);
  return s;
}

// One seeded Monte Carlo draw of the sufficient statistics. Trial substreams
// are independent by construction: substream seed = scenario.seed + trial.
inline SufficientStats draw_sufficient_stats(const GaussianScenario& s,
                                             std::uint64_t trial) {
  Rng rng(s.seed + trial);
  std::vector<VectorXd> means;
  means.reserve(s.truth.size());
  for (std::size_t t = 0; t < s.truth.size(); ++t) {
    VectorXd sum = VectorXd::Zero(s.dim());
    for (int n = 0; n < s.n_per_task[t]; ++n)
      for (int j = 0; j < s.dim(); ++j) sum[j] += s.truth[t][j] + s.sigma * rng.normal();
    means.push_back(sum / s.n_per_task[t]);
  }
  return make_stats(std::move(means));
}

// ---------------------------------------------------------------------------
// Closed-form cross-learning solver
// ---------------------------------------------------------------------------

struct CrosslearnGaussian {
  ParamBundle bundle;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Exact solver for min sum_t ||task_mean_t - theta_t||^2 subject to
// ||theta_t - theta_g|| <= eps. Reduces to the centroid objective
// g(c) = sum_t max(0, ||task_mean_t - c|| - eps)^2, minimized from the grand
// mean; each theta_t is then the ball projection of its task mean.
inline CrosslearnGaussian crosslearn_gaussian(const SufficientStats& stats,
                                              double eps, double tol = 1e-10,
                                              int max_iters = 100000) {
  if (!(eps >= 0.0)) throw std::invalid_argument("crosslearn_gaussian: eps must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("crosslearn_gaussian: tol must be > 0");

  CrosslearnGaussian out;
  if (eps == 0.0) {
    out.bundle.centroid = stats.grand_mean;
    out.bundle.per_task.assign(stats.task_means.size(), stats.grand_mean);
    out.converged = true;
    return out;
  }

  const VectorXd zero = VectorXd::Zero(stats.grand_mean.size());
  const CentroidSolve solve = minimize_coupled_centroid(
      stats.task_means, eps, 0.0, zero, stats.grand_mean, tol, max_iters);
  out.grad_norm = solve.grad_norm;
  out.iterations = solve.iterations;
  out.converged = solve.converged;
  out.bundle.centroid = solve.centroid;
  out.bundle.per_task.reserve(stats.task_means.size());
  for (const auto& m : stats.task_means)
    out.bundle.per_task.push_back(project_to_ball(m, solve.centroid, eps));
  return out;
}

// ---------------------------------------------------------------------------
// Optimality certificate
// ---------------------------------------------------------------------------

// The converged centroid must be a convex combination of the task means, and
// each per-task solution must be the ball projection of its task mean. The
// combination weights fall out of the centroid stationarity condition:
// gamma_t proportional to max(0, dist_t - eps) / dist_t.
struct KktCertificate {
  std::vector<double> gamma;
  std::vector<double> projection_residuals;
  double combination_residual = 0.0;

  bool passes(double gamma_tol = 1e-6, double proj_tol = 1e-8) const {
    double total = 0.0;
    for (double g : gamma) {
      if (g < -gamma_tol) return false;
      total += g;
    }
    if (std::abs(total - 1.0) > gamma_tol) return false;
    for (double r : projection_residuals)
      if (r > proj_tol) return false;
    return true;
  }
};

inline KktCertificate kkt_certificate(const SufficientStats& stats, double eps,
                                      const ParamBundle& bundle) {
  const int t_count = static_cast<int>(stats.task_means.size());
  KktCertificate cert;
  std::vector<double> weights(t_count, 0.0);
  double weight_sum = 0.0;
  for (int t = 0; t < t_count; ++t) {
    const double dist = (stats.task_means[t] - bundle.centroid).norm();
    if (dist > eps && dist > 0.0) weights[t] = (dist - eps) / dist;
    weight_sum += weights[t];
  }
  cert.gamma.resize(t_count);
  if (weight_sum > 0.0) {
    for (int t = 0; t < t_count; ++t) cert.gamma[t] = weights[t] / weight_sum;
  } else {
    // All constraints inactive: the solver kept the grand mean, certified by
    // uniform weights.
    std::fill(cert.gamma.begin(), cert.gamma.end(), 1.0 / t_count);
  }

  VectorXd combo = VectorXd::Zero(bundle.centroid.size());
  for (int t = 0; t < t_count; ++t) combo += cert.gamma[t] * stats.task_means[t];
  cert.combination_residual = (combo - bundle.centroid).norm();

  cert.projection_residuals.reserve(t_count);
  for (int t = 0; t < t_count; ++t) {
    const VectorXd proj = project_to_ball(stats.task_means[t], bundle.centroid, eps);
    cert.projection_residuals.push_back((bundle.per_task[t] - proj).norm());
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Monte Carlo MSE sweep
// ---------------------------------------------------------------------------

struct MseSweep {
  std::vector<double> eps_grid;
  std::vector<double> e_sep_trials;               // [trials]
  std::vector<double> e_cons_trials;              // [trials]
  std::vector<std::vector<double>> e_cl_trials;   // [grid][trials]

  static double mean(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
  }
  double mean_e_sep() const { return mean(e_sep_trials); }
  double mean_e_cons() const { return mean(e_cons_trials); }
  double mean_e_cl(std::size_t g) const { return mean(e_cl_trials[g]); }
};

// Per-trial errors of all three estimators across an epsilon grid. Trials are
// parallel; each one owns its substream and writes its own slots, so results
// are identical for any thread count.
inline MseSweep mc_mse_sweep(const GaussianScenario& scenario,
                             const std::vector<double>& eps_grid, int trials,
                             int n_threads = 1) {
  validate(scenario);
  if (trials < 1) throw std::invalid_argument("mc_mse_sweep: trials >= 1 required");
  if (eps_grid.empty()) throw std::invalid_argument("mc_mse_sweep: empty eps grid");

  MseSweep sweep;
  sweep.eps_grid = eps_grid;
  sweep.e_sep_trials.resize(trials);
  sweep.e_cons_trials.resize(trials);
  sweep.e_cl_trials.assign(eps_grid.size(), std::vector<double>(trials));

  parallel_for(static_cast<std::size_t>(trials), n_threads, [&](std::size_t i) {
    const SufficientStats stats = draw_sufficient_stats(scenario, i);
    sweep.e_sep_trials[i] = mean_sq_error(stats.task_means, scenario.truth);
    sweep.e_cons_trials[i] = mean_sq_error(stats.grand_mean, scenario.truth);
    for (std::size_t g = 0; g < eps_grid.size(); ++g) {
      const auto solved = crosslearn_gaussian(stats, eps_grid[g]);
      sweep.e_cl_trials[g][i] = mean_sq_error(solved.bundle.per_task, scenario.truth);
    }
  });
  return sweep;
}

inline CsvDoc mse_sweep_csv(const MseSweep& sweep) {
  CsvDoc doc;
  doc.header({"epsilon", "e_sep", "e_cons", "e_cl"});
  for (std::size_t g = 0; g < sweep.eps_grid.size(); ++g)
    doc.row({sweep.eps_grid[g], sweep.mean_e_sep(), sweep.mean_e_cons(), sweep.mean_e_cl(g)});
  return doc;
}

// ---------------------------------------------------------------------------
// Statistical checks
// ---------------------------------------------------------------------------

// Fraction of bootstrap resamples in which mean(deltas) < 0.
inline double bootstrap_negative_confidence(const std::vector<double>& deltas,
                                            int resamples = 2000,
                                            std::uint64_t seed = 0x5eed) {
  Rng rng(seed);
  const std::size_t n = deltas.size();
  int negative = 0;
  for (int b = 0; b < resamples; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += deltas[rng.index(n)];
    if (acc / static_cast<double>(n) < 0.0) ++negative;
  }
  return static_cast<double>(negative) / resamples;
}

struct PropositionReport {
  // Small-eps improvement over consensus.
  double p1_eps = 0.0;
  double p1_mean_diff = 0.0;
  double p1_confidence = 0.0;
  bool p1_pass = false;
  // Large-eps dominance over the separate estimator, per trial.
  int p2_trials = 0;
  int p2_violations = 0;
  bool p2_pass = false;
  // Strict improvement on constructed far-outlier datasets.
  int p3_datasets = 0;
  int p3_violations = 0;
  bool p3_pass = false;
  // Grid minimum beats both baselines.
  double t1_min_mean_cl = 0.0;
  double t1_best_baseline = 0.0;
  double t1_confidence = 0.0;
  bool t1_pass = false;

  bool all_pass() const { return p1_pass && p2_pass && p3_pass && t1_pass; }
};

namespace detail {

// Builds one dataset whose sufficient statistics contain a far outlier:
// T-1 task means in a tight cluster, one at distance 5*eps. After solving,
// the outlier sits >= 3*eps from the centroid and the generating parameters
// are placed inside the eps-ball around the centroid.
struct OutlierInstance {
  SufficientStats stats;
  std::vector<VectorXd> truth;
  ParamBundle solution;
  bool member = false;  // outlier ended up >= 3*eps from the centroid
};

inline OutlierInstance make_outlier_instance(int t_count, int dim, double eps,
                                             std::uint64_t seed) {
  Rng rng(seed);
  VectorXd cluster(dim);
  for (int j = 0; j < dim; ++j) cluster[j] = rng.normal();

  std::vector<VectorXd> means;
  means.reserve(t_count);
  for (int t = 0; t + 1 < t_count; ++t) {
    VectorXd m = cluster;
    for (int j = 0; j < dim; ++j) m[j] += 0.02 * eps * rng.normal();
    means.push_back(m);
  }
  VectorXd direction(dim);
  for (int j = 0; j < dim; ++j) direction[j] = rng.normal();
  direction.normalize();
  means.push_back(cluster + 5.0 * eps * direction);

  OutlierInstance inst;
  inst.stats = make_stats(std::move(means));
  const auto solved = crosslearn_gaussian(inst.stats, eps);
  inst.solution = solved.bundle;

  double max_dist = 0.0;
  for (const auto& m : inst.stats.task_means)
    max_dist = std::max(max_dist, (m - inst.solution.centroid).norm());
  inst.member = max_dist >= 3.0 * eps;

  inst.truth.reserve(t_count);
  for (int t = 0; t < t_count; ++t) {
    VectorXd v(dim);
    for (int j = 0; j < dim; ++j) v[j] = rng.normal();
    v.normalize();
    inst.truth.push_back(inst.solution.centroid + 0.9 * eps * rng.uniform01() * v);
  }
  return inst;
}

}  // namespace detail

// Empirical verdicts for the finite-sample consequences of the theory:
// small-eps gain over consensus, data-driven-eps dominance over separate
// estimation, the strict outlier bound, and the grid-minimum comparison.
inline PropositionReport proposition_suite(const GaussianScenario& scenario,
                                           const MseSweep& sweep,
                                           int p2_trials = 1000,
                                           int p3_datasets = 100,
                                           int n_threads = 1,
                                           std::uint64_t check_seed = 0xc0ffee) {
  PropositionReport report;
  const int trials = static_cast<int>(sweep.e_sep_trials.size());

  // P1: at the smallest nonzero grid epsilon, E_CL - E_C is negative in mean
  // with bootstrap confidence.
  std::size_t smallest = 0;
  for (std::size_t g = 0; g < sweep.eps_grid.size(); ++g) {
    if (sweep.eps_grid[g] > 0.0 &&
        (sweep.eps_grid[smallest] <= 0.0 || sweep.eps_grid[g] < sweep.eps_grid[smallest]))
      smallest = g;
  }
  report.p1_eps = sweep.eps_grid[smallest];
  std::vector<double> deltas(trials);
  for (int i = 0; i < trials; ++i)
    deltas[i] = sweep.e_cl_trials[smallest][i] - sweep.e_cons_trials[i];
  report.p1_mean_diff = MseSweep::mean(deltas);
  report.p1_confidence = bootstrap_negative_confidence(deltas, 2000, check_seed);
  report.p1_pass = report.p1_confidence >= 0.95;

  // P2: with eps = max_t max_tau ||truth_t - task_mean_tau|| chosen per trial,
  // E_CL <= E_S on every trial.
  report.p2_trials = p2_trials;
  std::vector<int> p2_bad(p2_trials, 0);
  parallel_for(static_cast<std::size_t>(p2_trials), n_threads, [&](std::size_t i) {
    const SufficientStats stats =
        draw_sufficient_stats(scenario, 0x70000000ull + i);
    double eps = 0.0;
    for (const auto& star : scenario.truth)
      for (const auto& mean : stats.task_means)
        eps = std::max(eps, (star - mean).norm());
    const auto solved = crosslearn_gaussian(stats, eps);
    const double e_cl = mean_sq_error(solved.bundle.per_task, scenario.truth);
    const double e_sep = mean_sq_error(stats.task_means, scenario.truth);
    if (e_cl > e_sep + 1e-9) p2_bad[i] = 1;
  });
  for (int bad : p2_bad) report.p2_violations += bad;
  report.p2_pass = report.p2_violations == 0;

  // P3: strict bound E_CL <= E_S - eps^2/T on constructed outlier datasets.
  report.p3_datasets = p3_datasets;
  const double p3_eps = 0.5;
  std::vector<int> p3_bad(p3_datasets, 0);
  parallel_for(static_cast<std::size_t>(p3_datasets), n_threads, [&](std::size_t j) {
    const auto inst = detail::make_outlier_instance(
        scenario.task_count(), scenario.dim(), p3_eps, check_seed + 31 * j);
    if (!inst.member) {
      p3_bad[j] = 1;
      return;
    }
    const double e_cl = mean_sq_error(inst.solution.per_task, inst.truth);
    const double e_sep = mean_sq_error(inst.stats.task_means, inst.truth);
    const double margin = p3_eps * p3_eps / scenario.task_count();
    if (e_cl > e_sep - margin + 1e-9) p3_bad[j] = 1;
  });
  for (int bad : p3_bad) report.p3_violations += bad;
  report.p3_pass = report.p3_violations == 0;

  // T1: the grid minimum of mean E_CL beats both baselines, with bootstrap
  // confidence on the gap.
  double min_mean_cl = sweep.mean_e_cl(0);
  for (std::size_t g = 1; g < sweep.eps_grid.size(); ++g)
    min_mean_cl = std::min(min_mean_cl, sweep.mean_e_cl(g));
  report.t1_min_mean_cl = min_mean_cl;
  report.t1_best_baseline = std::min(sweep.mean_e_sep(), sweep.mean_e_cons());
  {
    Rng rng(check_seed ^ 0x7777);
    const int resamples = 2000;
    int negative = 0;
    const std::size_t n = sweep.e_sep_trials.size();
    std::vector<std::size_t> pick(n);
    for (int b = 0; b < resamples; ++b) {
      for (std::size_t i = 0; i < n; ++i) pick[i] = rng.index(n);
      double sep = 0.0, cons = 0.0;
      for (std::size_t i : pick) {
        sep += sweep.e_sep_trials[i];
        cons += sweep.e_cons_trials[i];
      }
      double best_cl = std::numeric_limits<double>::infinity();
      for (const auto& col : sweep.e_cl_trials) {
        double acc = 0.0;
        for (std::size_t i : pick) acc += col[i];
        best_cl = std::min(best_cl, acc);
      }
      if (best_cl < std::min(sep, cons)) ++negative;
    }
    report.t1_confidence = static_cast<double>(negative) / resamples;
  }
  report.t1_pass =
      min_mean_cl < report.t1_best_baseline && report.t1_confidence >= 0.95;
  return report;
}

// The controlled four-task scenario used throughout the verification
// harnesses: centers mu * {(1,0),(-1,0),(0,1),(0,-1)} in R^2, one sample per
// task. With these choices the expected errors are 2*sigma^2 (separate) and
// mu^2 + sigma^2/2 (consensus).
inline GaussianScenario symmetric_four_task_scenario(double mu, double sigma,
                                                     std::uint64_t seed) {
  GaussianScenario s;
  s.truth = {Eigen::Vector2d(mu, 0.0), Eigen::Vector2d(-mu, 0.0),
             Eigen::Vector2d(0.0, mu), Eigen::Vector2d(0.0, -mu)};
  s.sigma = sigma;
  s.n_per_task = {1, 1, 1, 1};
  s.seed = seed;
  return s;
}

}  // namespace crosslearn
