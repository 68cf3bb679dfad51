#include "ratekit/plant_model.hpp"

#include <cmath>
#include <string>

#include "ratekit/error.hpp"
#include "ratekit/linalg.hpp"

namespace ratekit {

namespace {

void require_dims(const MatrixXd& m, Eigen::Index rows, Eigen::Index cols,
                  const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError(std::string("plant: ") + name + " must be " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      ", got " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
  }
}

}  // namespace

PlantModel::PlantModel(MatrixXd A, MatrixXd B, MatrixXd C, MatrixXd D,
                       MatrixXd Rc, MatrixXd R2, MatrixXd Qxu)
    : A_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)),
      D_(std::move(D)),
      Rc_(std::move(Rc)),
      R2_(std::move(R2)),
      Qxu_(std::move(Qxu)) {
  const Eigen::Index nx = A_.rows();
  if (nx == 0) throw ConfigError("plant: A must be non-empty");
  require_dims(A_, nx, nx, "A");
  const Eigen::Index nu = B_.cols();
  const Eigen::Index ny = C_.rows();
  if (nu == 0 || ny == 0) throw ConfigError("plant: B and C must be non-empty");
  require_dims(B_, nx, nu, "B");
  require_dims(C_, ny, nx, "C");
  require_dims(D_, ny, nu, "D");
  require_dims(Rc_, nx, nx, "Rc");
  require_dims(R2_, ny, ny, "R2");
  require_dims(Qxu_, nx + nu, nx + nu, "Qxu");

  for (auto [m, name] : {std::pair{&A_, "A"}, {&B_, "B"}, {&C_, "C"}, {&D_, "D"},
                         {&Rc_, "Rc"}, {&R2_, "R2"}, {&Qxu_, "Qxu"}}) {
    linalg::require_finite(*m, std::string("plant.") + name);
  }
  if (!linalg::is_psd(Rc_)) throw ConfigError("plant: Rc must be symmetric PSD");
  if (!linalg::is_psd(R2_)) throw ConfigError("plant: R2 must be symmetric PSD");
  if (!linalg::is_psd(Qxu_)) throw ConfigError("plant: Qxu must be symmetric PSD");
}

PlantModel PlantModel::with_measurement_noise(MatrixXd R2) const {
  return PlantModel(A_, B_, C_, D_, Rc_, std::move(R2), Qxu_);
}

DiscretePlant discretize(const PlantModel& plant, double h) {
  if (!std::isfinite(h) || h < kMinPeriod) {
    throw ConfigError("discretize: period must be finite and >= 1e-6 s, got " +
                      std::to_string(h));
  }
  const Eigen::Index n = plant.states();
  const Eigen::Index m = plant.inputs();
  const Eigen::Index p = n + m;

  DiscretePlant d;
  d.h = h;

  // Ā = [A B; 0 0],  exp([−Āᵀ Qxu; 0 Ā]·h) = [· F12; 0 e^{Āh}],  Qd = e^{Āh}ᵀ F12
  MatrixXd abar = MatrixXd::Zero(p, p);
  abar.topLeftCorner(n, n) = plant.A();
  abar.topRightCorner(n, m) = plant.B();
  MatrixXd cost_block = MatrixXd::Zero(2 * p, 2 * p);
  cost_block.topLeftCorner(p, p) = -abar.transpose();
  cost_block.topRightCorner(p, p) = plant.Qxu();
  cost_block.bottomRightCorner(p, p) = abar;
  const MatrixXd ec = linalg::expm(cost_block * h);
  const MatrixXd eabar = ec.bottomRightCorner(p, p);
  d.Phi = eabar.topLeftCorner(n, n);
  d.Gamma = eabar.topRightCorner(n, m);
  d.Qd = linalg::symmetrize(eabar.transpose() * ec.topRightCorner(p, p));

  // exp([−A Rc; 0 Aᵀ]·h) = [· G12; 0 e^{Aᵀh}],  R1d = e^{Aᵀh}ᵀ G12
  MatrixXd noise_block = MatrixXd::Zero(2 * n, 2 * n);
  noise_block.topLeftCorner(n, n) = -plant.A();
  noise_block.topRightCorner(n, n) = plant.Rc();
  noise_block.bottomRightCorner(n, n) = plant.A().transpose();
  const MatrixXd en = linalg::expm(noise_block * h);
  d.R1d = linalg::symmetrize(en.bottomRightCorner(n, n).transpose() *
                             en.topRightCorner(n, n));

  // vec(e^{As} Rc e^{Aᵀs}) = e^{(A⊕A)s} vec(Rc). With
  //   N = [K I 0; 0 0 I; 0 0 0],
  // the (1,3) block of e^{Nh} is ∫₀ʰ (h−s) e^{Ks} ds.
  const Eigen::Index nn = n * n;
  const MatrixXd eye_n = MatrixXd::Identity(n, n);
  MatrixXd ksum = MatrixXd::Zero(nn, nn);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      ksum.block(i * n, j * n, n, n) += plant.A()(i, j) * eye_n;
      if (i == j) ksum.block(i * n, j * n, n, n) += plant.A();
    }
  }
  MatrixXd ramp = MatrixXd::Zero(3 * nn, 3 * nn);
  ramp.topLeftCorner(nn, nn) = ksum;
  ramp.block(0, nn, nn, nn).setIdentity();
  ramp.block(nn, 2 * nn, nn, nn).setIdentity();
  const MatrixXd er = linalg::expm(ramp * h);
  const Eigen::VectorXd rc_vec = Eigen::Map<const Eigen::VectorXd>(plant.Rc().data(), nn);
  Eigen::VectorXd y_vec = er.topRightCorner(nn, nn) * rc_vec;
  const MatrixXd y = Eigen::Map<MatrixXd>(y_vec.data(), n, n);
  d.noise_cost = (plant.Qxu().topLeftCorner(n, n) * y).trace();

  return d;
}

}  // namespace ratekit
