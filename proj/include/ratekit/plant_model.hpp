#pragma once

#include <Eigen/Dense>

namespace ratekit {

using Eigen::MatrixXd;

/// Continuous-time LTI plant
///
///   ẋ = A x + B u + v,   E[v vᵀ] = r · Rc  (continuous white noise)
///   y = C x + D u + e,   E[e eᵀ] = R2       (sampled white noise)
///
/// with the integral cost weight Qxu on [x; u]. Construction validates
/// dimensions, finiteness and the definiteness of Rc, R2 and Qxu.
class PlantModel {
 public:
  PlantModel(MatrixXd A, MatrixXd B, MatrixXd C, MatrixXd D, MatrixXd Rc,
             MatrixXd R2, MatrixXd Qxu);

  const MatrixXd& A() const { return A_; }
  const MatrixXd& B() const { return B_; }
  const MatrixXd& C() const { return C_; }
  const MatrixXd& D() const { return D_; }
  const MatrixXd& Rc() const { return Rc_; }
  const MatrixXd& R2() const { return R2_; }
  const MatrixXd& Qxu() const { return Qxu_; }

  Eigen::Index states() const { return A_.rows(); }
  Eigen::Index inputs() const { return B_.cols(); }
  Eigen::Index outputs() const { return C_.rows(); }

  /// Same plant with a different measurement noise variance.
  PlantModel with_measurement_noise(MatrixXd R2) const;

 private:
  MatrixXd A_, B_, C_, D_, Rc_, R2_, Qxu_;
};

/// Zero-order-hold sampled plant at period h.
struct DiscretePlant {
  double h = 0.0;
  MatrixXd Phi;    // e^{Ah}
  MatrixXd Gamma;  // ∫₀ʰ e^{As} ds B
  MatrixXd R1d;    // ∫₀ʰ e^{As} Rc e^{Aᵀs} ds, unit noise intensity
  MatrixXd Qd;     // ∫₀ʰ e^{Āᵀs} Qxu e^{Ās} ds over [x; u] with held u
  /// Expected inter-sample cost of the process noise over one period at unit
  /// intensity: tr(Qx ∫₀ʰ (h−s) e^{As} Rc e^{Aᵀs} ds).
  double noise_cost = 0.0;

  Eigen::Index states() const { return Phi.rows(); }
  Eigen::Index inputs() const { return Gamma.cols(); }
  MatrixXd Q1() const { return Qd.topLeftCorner(states(), states()); }
  MatrixXd Q12() const { return Qd.topRightCorner(states(), inputs()); }
  MatrixXd Q2() const { return Qd.bottomRightCorner(inputs(), inputs()); }
};

/// Smallest admissible sampling period in seconds.
inline constexpr double kMinPeriod = 1e-6;

/// Exact sampled-data lift via Van Loan block exponentials.
DiscretePlant discretize(const PlantModel& plant, double h);

}  // namespace ratekit
