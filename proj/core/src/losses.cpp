#include "cqrlab/losses.hpp"

#include <cmath>
#include <string>

#include "cqrlab/error.hpp"

namespace cqrlab {
namespace {

void check_quantile_args(std::span<const double> pred, std::span<const double> target,
                         std::span<const double> taus, double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("kappa must be positive");
  if (pred.empty()) throw DimensionError("quantile prediction", 1, 0);
  if (target.size() != pred.size()) {
    throw DimensionError("quantile target", pred.size(), target.size());
  }
  if (taus.size() != pred.size()) throw DimensionError("quantile taus", pred.size(), taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0 && taus[i] < 1.0)) {
      throw InvalidArgument("tau[" + std::to_string(i) + "] = " + std::to_string(taus[i]) +
                            " is outside (0, 1)");
    }
    if (i > 0 && !(taus[i] > taus[i - 1])) {
      throw InvalidArgument("taus must be strictly increasing");
    }
  }
}

}  // namespace

double huber(double u, double kappa) {
  const double a = std::abs(u);
  return a <= kappa ? 0.5 * u * u : kappa * (a - 0.5 * kappa);
}

double huber_derivative(double u, double kappa) {
  if (u > kappa) return kappa;
  if (u < -kappa) return -kappa;
  return u;
}

std::vector<double> quantile_midpoints(int n) {
  if (n <= 0) throw InvalidArgument("quantile count must be positive");
  std::vector<double> taus(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) taus[i] = (2.0 * i + 1.0) / (2.0 * n);
  return taus;
}

QuantileLoss quantile_huber_loss_with_grad(std::span<const double> pred,
                                           std::span<const double> target,
                                           std::span<const double> taus, double kappa) {
  check_quantile_args(pred, target, taus, kappa);
  const std::size_t n = pred.size();
  const double inv_samples = 1.0 / static_cast<double>(target.size());
  QuantileLoss out;
  out.grad_pred.assign(n, 0.0);
  for (std::size_t j = 0; j < target.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double u = target[j] - pred[i];
      const double weight = std::abs(taus[i] - (u < 0.0 ? 1.0 : 0.0));
      out.loss += weight * huber(u, kappa) / kappa;
      out.grad_pred[i] -= weight * huber_derivative(u, kappa) / kappa;
    }
  }
  out.loss *= inv_samples;
  for (double& g : out.grad_pred) g *= inv_samples;
  return out;
}

double quantile_huber_loss(std::span<const double> pred, std::span<const double> target,
                           std::span<const double> taus, double kappa) {
  return quantile_huber_loss_with_grad(pred, target, taus, kappa).loss;
}

}  // namespace cqrlab
