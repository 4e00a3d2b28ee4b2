#pragma once

#include "crosslearn/core.hpp"

namespace crosslearn {

// f(x, theta) = theta with squared-error loss. The separate estimate under
// this model is the per-task sample mean, which makes it the reference model
// for everything solved in closed form by the gaussian module.
class ConstantRegressor final : public LossModel {
 public:
  explicit ConstantRegressor(int dim) : dim_(dim) {}

  int param_dim() const override { return dim_; }
  int output_dim() const override { return dim_; }

  VectorXd predict(const VectorXd&, const VectorXd& theta) const override {
    return theta;
  }

  double loss(const VectorXd& y, const VectorXd& y_hat) const override {
    return (y - y_hat).squaredNorm();
  }

  double task_loss(const TaskDataset& data, const VectorXd& theta) const override {
    double acc = 0.0;
    for (const auto& y : data.targets) acc += (y - theta).squaredNorm();
    return acc / data.n_samples();
  }

  VectorXd task_loss_grad(const TaskDataset& data, const VectorXd& theta) const override {
    VectorXd mean = VectorXd::Zero(dim_);
    for (const auto& y : data.targets) mean += y;
    mean /= data.n_samples();
    return 2.0 * (theta - mean);
  }

  MatrixXd output_jacobian(const VectorXd&, const VectorXd&) const override {
    return MatrixXd::Identity(dim_, dim_);
  }

 private:
  int dim_;
};

// Scalar linear regression f(x, theta) = theta^T x with squared-error loss.
class LinearModel final : public LossModel {
 public:
  explicit LinearModel(int input_dim) : dim_(input_dim) {}

  int param_dim() const override { return dim_; }
  int output_dim() const override { return 1; }

  VectorXd predict(const VectorXd& x, const VectorXd& theta) const override {
    VectorXd out(1);
    out[0] = theta.dot(x);
    return out;
  }

  double loss(const VectorXd& y, const VectorXd& y_hat) const override {
    return (y - y_hat).squaredNorm();
  }

  VectorXd task_loss_grad(const TaskDataset& data, const VectorXd& theta) const override {
    VectorXd g = VectorXd::Zero(dim_);
    for (int i = 0; i < data.n_samples(); ++i)
      g += 2.0 * (theta.dot(data.inputs[i]) - data.targets[i][0]) * data.inputs[i];
    return g / data.n_samples();
  }

  MatrixXd output_jacobian(const VectorXd& x, const VectorXd&) const override {
    return x.transpose();
  }

 private:
  int dim_;
};

}  // namespace crosslearn
