#include "ratekit/lqg.hpp"

#include <string>

#include "ratekit/error.hpp"
#include "ratekit/linalg.hpp"

namespace ratekit {

namespace {

constexpr double kResidualLimit = 1e-8;

}  // namespace

LqgController design(const PlantModel& plant, double h) {
  if (!plant.D().isZero(0.0)) {
    throw ConfigError("lqg: nonzero feedthrough D is not supported by the current-estimator design");
  }
  LqgController c;
  c.plant = discretize(plant, h);
  const auto& dp = c.plant;
  const Eigen::Index nx = dp.states();

  const MatrixXd q1 = dp.Q1();
  const MatrixXd q12 = dp.Q12();
  const MatrixXd q2 = dp.Q2();
  c.S = linalg::solve_dare(dp.Phi, dp.Gamma, q1, q2, q12).S;
  c.control_residual = linalg::dare_residual(dp.Phi, dp.Gamma, q1, q2, q12, c.S);
  const MatrixXd gain_lhs = q2 + dp.Gamma.transpose() * c.S * dp.Gamma;
  c.K = gain_lhs.ldlt().solve(dp.Gamma.transpose() * c.S * dp.Phi + q12.transpose());

  const MatrixXd& C = plant.C();
  const MatrixXd zero_cross = MatrixXd::Zero(nx, C.rows());
  c.P = linalg::solve_dare(dp.Phi.transpose(), C.transpose(), dp.R1d, plant.R2(),
                           zero_cross)
            .S;
  c.filter_residual = linalg::dare_residual(dp.Phi.transpose(), C.transpose(), dp.R1d,
                                            plant.R2(), zero_cross, c.P);
  c.innovation_cov = linalg::symmetrize(C * c.P * C.transpose() + plant.R2());
  c.Kf = c.innovation_cov.ldlt().solve(C * c.P).transpose();

  if (c.control_residual > kResidualLimit || c.filter_residual > kResidualLimit) {
    throw NumericError("lqg: Riccati residual too large at h=" + std::to_string(h) +
                       " (control " + std::to_string(c.control_residual) + ", filter " +
                       std::to_string(c.filter_residual) + ")");
  }
  c.closed_loop_radius = linalg::spectral_radius(closed_loop(plant, c).F);
  if (!(c.closed_loop_radius < 1.0)) {
    throw NumericError("lqg: designed loop is unstable at h=" + std::to_string(h));
  }
  return c;
}

ClosedLoop closed_loop(const PlantModel& plant, const LqgController& ctrl) {
  const auto& dp = ctrl.plant;
  const Eigen::Index nx = dp.states();
  const Eigen::Index nu = dp.inputs();
  const Eigen::Index ny = plant.outputs();
  const MatrixXd eye = MatrixXd::Identity(nx, nx);
  const MatrixXd filt = eye - ctrl.Kf * plant.C();  // I − Kf C

  ClosedLoop cl;
  cl.F = MatrixXd::Zero(2 * nx, 2 * nx);
  cl.F.topLeftCorner(nx, nx) = dp.Phi - dp.Gamma * ctrl.K;
  cl.F.topRightCorner(nx, nx) = dp.Gamma * ctrl.K * filt;
  cl.F.bottomRightCorner(nx, nx) = dp.Phi * filt;

  cl.Gw = MatrixXd(2 * nx, nx);
  cl.Gw << eye, eye;
  cl.Ge = MatrixXd(2 * nx, ny);
  cl.Ge << -dp.Gamma * ctrl.K * ctrl.Kf, -dp.Phi * ctrl.Kf;

  cl.M = MatrixXd::Zero(nx + nu, 2 * nx);
  cl.M.topLeftCorner(nx, nx) = eye;
  cl.M.bottomLeftCorner(nu, nx) = -ctrl.K;
  cl.M.bottomRightCorner(nu, nx) = ctrl.K * filt;
  cl.Ne = MatrixXd::Zero(nx + nu, ny);
  cl.Ne.bottomRows(nu) = -ctrl.K * ctrl.Kf;
  return cl;
}

CostBreakdown evaluate_cost(const PlantModel& plant, const LqgController& ctrl, double r) {
  if (!(r >= 0.0)) throw ConfigError("evaluate_cost: noise intensity must be >= 0");
  const auto& dp = ctrl.plant;
  const ClosedLoop cl = closed_loop(plant, ctrl);

  const MatrixXd w_proc = linalg::symmetrize(cl.Gw * dp.R1d * cl.Gw.transpose());
  const MatrixXd w_meas = linalg::symmetrize(cl.Ge * plant.R2() * cl.Ge.transpose());
  const MatrixXd z_proc = linalg::solve_dlyap(cl.F, w_proc);
  const MatrixXd z_meas = linalg::solve_dlyap(cl.F, w_meas);

  CostBreakdown out;
  out.lyapunov_residual = std::max(linalg::dlyap_residual(cl.F, w_proc, z_proc),
                                   linalg::dlyap_residual(cl.F, w_meas, z_meas));
  const double stage_proc = (dp.Qd * cl.M * z_proc * cl.M.transpose()).trace();
  const double stage_meas =
      (dp.Qd * (cl.M * z_meas * cl.M.transpose() + cl.Ne * plant.R2() * cl.Ne.transpose()))
          .trace();
  out.a = (stage_proc + dp.noise_cost) / dp.h;
  out.b = stage_meas / dp.h;
  out.J = out.a * r + out.b;
  return out;
}

InnovationModel innovation_model(const PlantModel& plant, const LqgController& ctrl) {
  const auto& dp = ctrl.plant;
  const Eigen::Index nx = dp.states();
  const MatrixXd& C = plant.C();
  // Prediction error x̃⁺ = Φ(I − Kf C) x̃ − Φ Kf e + w, independent of the control.
  const MatrixXd f = dp.Phi * (MatrixXd::Identity(nx, nx) - ctrl.Kf * C);
  const MatrixXd g = dp.Phi * ctrl.Kf;
  const MatrixXd p_proc = linalg::solve_dlyap(f, dp.R1d);
  const MatrixXd p_meas = linalg::solve_dlyap(f, linalg::symmetrize(g * plant.R2() * g.transpose()));
  return {linalg::symmetrize(C * p_proc * C.transpose()),
          linalg::symmetrize(C * p_meas * C.transpose() + plant.R2())};
}

}  // namespace ratekit
