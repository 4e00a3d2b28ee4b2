#pragma once

#include "crosslearn/core.hpp"

namespace crosslearn {

// Projection of a point onto the closed ball B(center, radius).
inline VectorXd project_to_ball(const VectorXd& point, const VectorXd& center,
                                double radius) {
  const VectorXd delta = point - center;
  const double dist = delta.norm();
  if (dist <= radius || dist == 0.0) return point;
  return center + (radius / dist) * delta;
}

struct CentroidSolve {
  VectorXd centroid;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Minimizes the reduced coupled-ball objective
//
//   F(c) = anchor_weight * ||c - anchor||^2 + sum_t max(0, ||p_t - c|| - eps)^2
//
// by gradient descent with backtracking line search. F is convex and C^1:
// with anchor_weight = 0 this is the centroid problem of the closed-form
// cross-learning estimator; with anchor_weight = 1 it is the reduced form of
// the Euclidean projection onto the coupled-ball set. Once the centroid is
// fixed, the per-task minimizers are ball projections of the p_t.
inline CentroidSolve minimize_coupled_centroid(
    const std::vector<VectorXd>& points, double eps, double anchor_weight,
    const VectorXd& anchor, const VectorXd& init, double tol = 1e-10,
    int max_iters = 100000) {
  const int t_count = static_cast<int>(points.size());

  // eps = 0 collapses every term to a plain squared distance; the weighted
  // mean is the exact minimizer.
  if (eps == 0.0) {
    VectorXd c = anchor_weight * anchor;
    for (const auto& p : points) c += p;
    c /= (anchor_weight + t_count);
    return {c, 0.0, 0, true};
  }

  const auto value = [&](const VectorXd& c) {
    double f = anchor_weight * (c - anchor).squaredNorm();
    for (const auto& p : points) {
      const double excess = (p - c).norm() - eps;
      if (excess > 0.0) f += excess * excess;
    }
    return f;
  };
  const auto gradient = [&](const VectorXd& c) {
    VectorXd g = 2.0 * anchor_weight * (c - anchor);
    for (const auto& p : points) {
      const double dist = (p - c).norm();
      if (dist > eps) g += 2.0 * (dist - eps) / dist * (c - p);
    }
    return g;
  };

  CentroidSolve out;
  out.centroid = init;
  // 1/L for the gradient's Lipschitz bound L = 2 * (T + anchor_weight).
  double step = 0.5 / (t_count + anchor_weight);
  const double step_cap = step * 0x1p20;

  for (int it = 0; it < max_iters; ++it) {
    const VectorXd g = gradient(out.centroid);
    out.grad_norm = g.norm();
    out.iterations = it;
    if (out.grad_norm <= tol) {
      out.converged = true;
      return out;
    }
    const double f0 = value(out.centroid);
    double alpha = step;
    bool backtracked = false;
    for (;;) {
      const VectorXd trial = out.centroid - alpha * g;
      if (value(trial) <= f0 - 1e-4 * alpha * out.grad_norm * out.grad_norm) {
        out.centroid = trial;
        break;
      }
      alpha *= 0.5;
      backtracked = true;
      if (alpha < 1e-30) return out;  // line search exhausted
    }
    step = backtracked ? alpha : std::min(2.0 * alpha, step_cap);
  }
  out.grad_norm = gradient(out.centroid).norm();
  out.converged = out.grad_norm <= tol;
  return out;
}

}  // namespace crosslearn
