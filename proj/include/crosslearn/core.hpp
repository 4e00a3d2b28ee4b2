#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace crosslearn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// Supervised samples for one task: inputs x_i (dim P) and targets y_i (dim Q).
struct TaskDataset {
  int task_id = 0;
  std::vector<VectorXd> inputs;
  std::vector<VectorXd> targets;

  int n_samples() const { return static_cast<int>(targets.size()); }
};

inline void validate(const TaskDataset& d) {
  if (d.inputs.size() != d.targets.size())
    throw std::invalid_argument("task dataset: |inputs| != |targets|");
  if (d.targets.empty())
    throw std::invalid_argument("task dataset: needs at least one sample");
  for (const auto& x : d.inputs)
    if (x.size() != d.inputs.front().size())
      throw std::invalid_argument("task dataset: ragged input dimensions");
  for (const auto& y : d.targets)
    if (y.size() != d.targets.front().size())
      throw std::invalid_argument("task dataset: ragged target dimensions");
}

// Joint decision variable: one parameter vector per task plus the shared
// centroid, all of dimension S.
struct ParamBundle {
  std::vector<VectorXd> per_task;
  VectorXd centroid;

  int task_count() const { return static_cast<int>(per_task.size()); }
  int dim() const { return static_cast<int>(centroid.size()); }
};

inline void validate(const ParamBundle& b) {
  if (b.per_task.empty()) throw std::invalid_argument("param bundle: T >= 1 required");
  for (const auto& t : b.per_task) {
    if (t.size() != b.centroid.size())
      throw std::invalid_argument("param bundle: mixed parameter dimensions");
    if (!t.allFinite())
      throw std::invalid_argument("param bundle: non-finite coordinate");
  }
  if (!b.centroid.allFinite())
    throw std::invalid_argument("param bundle: non-finite centroid");
}

enum class CouplingKind { Parametric, Functional };

// Which coupling constrains the tasks, and how tightly. epsilon = 0 forces
// consensus; a large epsilon leaves every task on its own.
struct ConstraintSpec {
  CouplingKind kind = CouplingKind::Parametric;
  double epsilon = 0.0;
};

inline void validate(const ConstraintSpec& c) {
  if (!(c.epsilon >= 0.0))
    throw std::invalid_argument("constraint spec: epsilon must be >= 0");
}

struct ErrorTriple {
  double e_separate = 0.0;
  double e_consensus = 0.0;
  double e_crosslearn = 0.0;
};

// ---------------------------------------------------------------------------
// LossModel
// ---------------------------------------------------------------------------

// A parametric model f(x, theta) together with its sample loss. Concrete
// models provide the gradient of the per-task empirical loss in closed form
// (or finite differences); each implementation must match central finite
// differences of task_loss to 1e-4 relative.
class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual int param_dim() const = 0;
  virtual int output_dim() const = 0;

  virtual VectorXd predict(const VectorXd& x, const VectorXd& theta) const = 0;
  virtual double loss(const VectorXd& y, const VectorXd& y_hat) const = 0;

  // Mean sample loss over one task: (1/N) sum_i loss(y_i, f(x_i, theta)).
  virtual double task_loss(const TaskDataset& data, const VectorXd& theta) const {
    double acc = 0.0;
    for (int i = 0; i < data.n_samples(); ++i)
      acc += loss(data.targets[i], predict(data.inputs[i], theta));
    return acc / data.n_samples();
  }

  virtual VectorXd task_loss_grad(const TaskDataset& data, const VectorXd& theta) const = 0;

  // Jacobian of f w.r.t. theta at one sample (Q x S). Default is central
  // finite differences on predict; smooth models override with closed forms.
  virtual MatrixXd output_jacobian(const VectorXd& x, const VectorXd& theta) const {
    MatrixXd jac(output_dim(), param_dim());
    VectorXd p = theta;
    for (int j = 0; j < param_dim(); ++j) {
      const double h = 1e-6 * (1.0 + std::abs(theta[j]));
      p[j] = theta[j] + h;
      const VectorXd up = predict(x, p);
      p[j] = theta[j] - h;
      const VectorXd dn = predict(x, p);
      p[j] = theta[j];
      jac.col(j) = (up - dn) / (2.0 * h);
    }
    return jac;
  }

  // Projection onto the model's admissible parameter domain (identity unless
  // the model has bound constraints, e.g. nonnegative rates).
  virtual VectorXd clamp_params(VectorXd theta) const { return theta; }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// (1/T) sum_t (1/N_t) sum_i loss(y_i, f(x_i, theta_t)).
inline double empirical_objective(const std::vector<TaskDataset>& datasets,
                                  const ParamBundle& bundle,
                                  const LossModel& model) {
  if (datasets.size() != bundle.per_task.size())
    throw std::invalid_argument("empirical_objective: |datasets| != |bundle.per_task|");
  if (bundle.dim() != model.param_dim())
    throw std::invalid_argument("empirical_objective: bundle dim != model param dim");
  double acc = 0.0;
  for (std::size_t t = 0; t < datasets.size(); ++t)
    acc += model.task_loss(datasets[t], bundle.per_task[t]);
  return acc / static_cast<double>(datasets.size());
}

// Per-task constraint slack s_t = ||theta_t - theta_g|| - eps. Feasible iff
// every slack is <= 0.
inline std::vector<double> parametric_slacks(const ParamBundle& bundle, double eps) {
  std::vector<double> slacks;
  slacks.reserve(bundle.per_task.size());
  for (const auto& t : bundle.per_task)
    slacks.push_back((t - bundle.centroid).norm() - eps);
  return slacks;
}

inline bool parametric_feasible(const ParamBundle& bundle, double eps, double tol = 0.0) {
  for (double s : parametric_slacks(bundle, eps))
    if (s > tol) return false;
  return true;
}

// Mean absolute output gap between two parameterizations of the same model,
// (1/N) sum_i ||f(x_i, theta_a) - f(x_i, theta_b)||_1.
inline double functional_gap(const TaskDataset& data, const VectorXd& theta_a,
                             const VectorXd& theta_b, const LossModel& model) {
  if (data.targets.empty())
    throw std::invalid_argument("functional_gap: empty dataset");
  double acc = 0.0;
  for (int i = 0; i < data.n_samples(); ++i) {
    acc += (model.predict(data.inputs[i], theta_a) -
            model.predict(data.inputs[i], theta_b))
               .lpNorm<1>();
  }
  return acc / data.n_samples();
}

// Mean squared distance between per-task estimates and the generating
// parameters.
inline double mean_sq_error(const std::vector<VectorXd>& estimates,
                            const std::vector<VectorXd>& truth) {
  if (estimates.size() != truth.size())
    throw std::invalid_argument("mean_sq_error: |estimates| != |truth|");
  double acc = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t)
    acc += (estimates[t] - truth[t]).squaredNorm();
  return acc / static_cast<double>(truth.size());
}

// Same metric for a single shared estimate measured against every task.
inline double mean_sq_error(const VectorXd& shared_estimate,
                            const std::vector<VectorXd>& truth) {
  double acc = 0.0;
  for (const auto& star : truth) acc += (shared_estimate - star).squaredNorm();
  return acc / static_cast<double>(truth.size());
}

inline ErrorTriple error_metrics(const std::vector<VectorXd>& separate_estimates,
                                 const VectorXd& consensus_estimate,
                                 const std::vector<VectorXd>& crosslearn_estimates,
                                 const std::vector<VectorXd>& truth) {
  return ErrorTriple{mean_sq_error(separate_estimates, truth),
                     mean_sq_error(consensus_estimate, truth),
                     mean_sq_error(crosslearn_estimates, truth)};
}

}  // namespace crosslearn
