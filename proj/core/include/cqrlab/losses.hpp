#pragma once

#include <span>
#include <vector>

namespace cqrlab {

/// Huber function: u^2/2 inside [-kappa, kappa], kappa(|u| - kappa/2) outside.
double huber(double u, double kappa);

/// d huber / d u, i.e. u clamped to [-kappa, kappa].
double huber_derivative(double u, double kappa);

/// Quantile midpoints (2i - 1) / (2N), i = 1..N.
std::vector<double> quantile_midpoints(int n);

struct QuantileLoss {
  double loss = 0.0;
  /// d loss / d pred[i].
  std::vector<double> grad_pred;
};

/// Quantile-Huber loss between N predicted quantiles and N target samples:
///
///   (1/N) sum_j sum_i |tau_i - 1{u_ij < 0}| huber(u_ij, kappa) / kappa,
///   u_ij = target[j] - pred[i].
///
/// Throws DimensionError on length mismatch and InvalidArgument when a tau is
/// outside (0, 1), taus are not strictly increasing, or kappa <= 0.
double quantile_huber_loss(std::span<const double> pred, std::span<const double> target,
                           std::span<const double> taus, double kappa);

/// Same value as quantile_huber_loss, plus its gradient with respect to pred.
QuantileLoss quantile_huber_loss_with_grad(std::span<const double> pred,
                                           std::span<const double> target,
                                           std::span<const double> taus, double kappa);

}  // namespace cqrlab
