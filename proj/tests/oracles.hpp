#pragma once

// Test-only reference solvers. These deliberately share no code with the
// library paths they check: the coupled-ball projection is recomputed with
// Dykstra's alternating projections, the constrained estimator with a smooth
// penalty continuation, and gradients with central finite differences.

#include "crosslearn/core.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

using crosslearn::ParamBundle;
using crosslearn::VectorXd;

// Projection of the pair (a, b) onto {(a, b) : ||a - b|| <= eps}: both points
// move toward each other by half the excess.
inline void project_pair(VectorXd& a, VectorXd& b, double eps) {
  const VectorXd diff = a - b;
  const double dist = diff.norm();
  if (dist <= eps || dist == 0.0) return;
  const VectorXd shift = (0.5 * (dist - eps) / dist) * diff;
  a -= shift;
  b += shift;
}

// Dykstra's algorithm over the T pair constraints. Converges to the exact
// Euclidean projection of v onto the coupled-ball set.
inline ParamBundle dykstra_project(const ParamBundle& v, double eps,
                                   int sweeps = 20000, double tol = 1e-14) {
  const int t_count = v.task_count();
  ParamBundle z = v;
  std::vector<VectorXd> corr_task(t_count, VectorXd::Zero(v.dim()));
  std::vector<VectorXd> corr_cent(t_count, VectorXd::Zero(v.dim()));
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double moved = 0.0;
    for (int t = 0; t < t_count; ++t) {
      VectorXd a = z.per_task[t] + corr_task[t];
      VectorXd b = z.centroid + corr_cent[t];
      const VectorXd a0 = a, b0 = b;
      project_pair(a, b, eps);
      corr_task[t] = a0 - a;
      corr_cent[t] = b0 - b;
      moved += (a - z.per_task[t]).norm() + (b - z.centroid).norm();
      z.per_task[t] = a;
      z.centroid = b;
    }
    if (moved < tol) break;
  }
  return z;
}

// Smooth penalty continuation for
//   min sum_t w_t ||p_t - theta_t||^2 (+ anchor term)  s.t. ||theta_t - theta_g|| <= eps
// used as an independent route to the constrained estimator.
inline ParamBundle penalty_crosslearn(const std::vector<VectorXd>& points,
                                      double eps) {
  const int t_count = static_cast<int>(points.size());
  const int dim = static_cast<int>(points.front().size());
  ParamBundle th;
  th.per_task = points;
  th.centroid = VectorXd::Zero(dim);
  for (const auto& p : points) th.centroid += p;
  th.centroid /= t_count;

  for (double rho : {1e2, 1e4, 1e6, 1e8, 1e10}) {
    for (int it = 0; it < 20000; ++it) {
      std::vector<VectorXd> g_task(t_count);
      VectorXd g_cent = VectorXd::Zero(dim);
      double max_norm = 0.0;
      for (int t = 0; t < t_count; ++t) {
        g_task[t] = 2.0 * (th.per_task[t] - points[t]);
        const VectorXd diff = th.per_task[t] - th.centroid;
        const double dist = diff.norm();
        if (dist > eps) {
          const VectorXd pen = 2.0 * rho * (dist - eps) / dist * diff;
          g_task[t] += pen;
          g_cent -= pen;
        }
        max_norm = std::max(max_norm, g_task[t].norm());
      }
      max_norm = std::max(max_norm, g_cent.norm());
      if (max_norm < 1e-9 * rho / 1e2) break;
      const double step = 0.25 / (1.0 + rho);
      for (int t = 0; t < t_count; ++t) th.per_task[t] -= step * g_task[t];
      th.centroid -= step * g_cent;
    }
  }
  return th;
}

inline VectorXd finite_diff_grad(const std::function<double(const VectorXd&)>& f,
                                 const VectorXd& theta, double rel_step = 1e-6) {
  VectorXd g(theta.size());
  VectorXd p = theta;
  for (int j = 0; j < theta.size(); ++j) {
    const double h = rel_step * (1.0 + std::abs(theta[j]));
    p[j] = theta[j] + h;
    const double up = f(p);
    p[j] = theta[j] - h;
    const double dn = f(p);
    p[j] = theta[j];
    g[j] = (up - dn) / (2.0 * h);
  }
  return g;
}

}  // namespace oracles
