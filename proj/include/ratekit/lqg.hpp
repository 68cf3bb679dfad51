#pragma once

#include "ratekit/plant_model.hpp"

namespace ratekit {

/// Sampled LQG controller in current-estimator form:
///
///   x̂[k|k]   = x̂[k|k−1] + Kf (y[k] − C x̂[k|k−1])
///   u[k]     = −K x̂[k|k]
///   x̂[k+1|k] = Φ x̂[k|k] + Γ u[k]
///
/// Gains are designed for unit process-noise intensity.
struct LqgController {
  DiscretePlant plant;
  MatrixXd K;   // nu × nx
  MatrixXd Kf;  // nx × ny
  MatrixXd S;   // control Riccati solution
  MatrixXd P;   // stationary one-step prediction error covariance (r = 1)
  MatrixXd innovation_cov;  // C P Cᵀ + R2 at r = 1
  double control_residual = 0.0;
  double filter_residual = 0.0;
  double closed_loop_radius = 0.0;

  double h() const { return plant.h; }
};

/// J(r) = a·r + b, per unit time.
struct CostBreakdown {
  double a = 0.0;
  double b = 0.0;
  double J = 0.0;
  double lyapunov_residual = 0.0;
};

LqgController design(const PlantModel& plant, double h);

/// Stationary closed-loop cost per second at process-noise intensity r.
CostBreakdown evaluate_cost(const PlantModel& plant, const LqgController& ctrl, double r);

/// Stationary innovation covariance as an affine function of r:
/// E[ε εᵀ] = r·slope + offset. At r = 1 this equals ctrl.innovation_cov.
struct InnovationModel {
  MatrixXd slope;
  MatrixXd offset;
};
InnovationModel innovation_model(const PlantModel& plant, const LqgController& ctrl);

/// Closed-loop matrices over z = [x; x − x̂[k|k−1]]:
///   z⁺ = F z + Gw w + Ge e,   [x; u] = M z + Ne e.
struct ClosedLoop {
  MatrixXd F, Gw, Ge, M, Ne;
};
ClosedLoop closed_loop(const PlantModel& plant, const LqgController& ctrl);

}  // namespace ratekit
