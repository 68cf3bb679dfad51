#include "ratekit/linalg.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "ratekit/error.hpp"

namespace ratekit::linalg {

MatrixXd expm(const MatrixXd& m) { return m.exp(); }

double spectral_radius(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool all_finite(const MatrixXd& m) { return m.allFinite(); }

bool is_symmetric(const MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_psd(const MatrixXd& m, double rel_tol) {
  if (!is_symmetric(m)) return false;
  if (m.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(m), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  return ev.minCoeff() >= -rel_tol * scale;
}

bool is_pd(const MatrixXd& m) {
  if (!is_symmetric(m) || m.size() == 0) return false;
  Eigen::LLT<MatrixXd> llt(symmetrize(m));
  return llt.info() == Eigen::Success;
}

void require_finite(const MatrixXd& m, std::string_view what) {
  if (!m.allFinite()) {
    throw ConfigError(std::string(what) + ": matrix has non-finite entries");
  }
}

DareSolution solve_dare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                        const MatrixXd& R, const MatrixXd& N, double rel_tol,
                        int max_iter) {
  const Eigen::Index n = A.rows();
  Eigen::LLT<MatrixXd> r_llt(symmetrize(R));
  if (r_llt.info() != Eigen::Success) {
    throw NumericError("Riccati: input weight is not positive definite");
  }
  // Remove the cross term: A ← A − B R⁻¹ Nᵀ, Q ← Q − N R⁻¹ Nᵀ.
  const MatrixXd r_inv_nt = r_llt.solve(N.transpose());
  MatrixXd a = A - B * r_inv_nt;
  MatrixXd h = symmetrize(Q - N * r_inv_nt);
  MatrixXd g = symmetrize(B * r_llt.solve(B.transpose()));
  const MatrixXd eye = MatrixXd::Identity(n, n);

  for (int it = 1; it <= max_iter; ++it) {
    Eigen::PartialPivLU<MatrixXd> w(eye + g * h);
    const MatrixXd w_inv_a = w.solve(a);
    const MatrixXd w_inv_g = w.solve(g);
    const MatrixXd h_next = symmetrize(h + a.transpose() * h * w_inv_a);
    g = symmetrize(g + a * w_inv_g * a.transpose());
    a = a * w_inv_a;
    if (!h_next.allFinite()) {
      throw NumericError("Riccati: doubling iteration diverged (system not stabilizable/detectable?)");
    }
    const double change = (h_next - h).norm();
    h = h_next;
    if (change <= rel_tol * std::max(h.norm(), 1e-300)) {
      return {h, it};
    }
  }
  throw NumericError("Riccati: no convergence after " + std::to_string(max_iter) +
                     " iterations, residual " +
                     std::to_string(dare_residual(A, B, Q, R, N, h)));
}

double dare_residual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                     const MatrixXd& R, const MatrixXd& N, const MatrixXd& S) {
  const MatrixXd gain_lhs = R + B.transpose() * S * B;
  const MatrixXd cross = A.transpose() * S * B + N;
  const MatrixXd map = A.transpose() * S * A + Q -
                       cross * gain_lhs.ldlt().solve(cross.transpose());
  return (S - map).norm();
}

MatrixXd solve_dlyap(const MatrixXd& F, const MatrixXd& W) {
  const Eigen::Index n = F.rows();
  const double rho = spectral_radius(F);
  if (!(rho < 1.0)) {
    throw NumericError("Lyapunov: closed loop not stable (spectral radius " +
                       std::to_string(rho) + ")");
  }
  if (n <= 16) {
    // vec(Z) = (I − F⊗F)⁻¹ vec(W)
    const Eigen::Index nn = n * n;
    MatrixXd kron(nn, nn);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        kron.block(i * n, j * n, n, n) = F(i, j) * F;
    const MatrixXd lhs = MatrixXd::Identity(nn, nn) - kron;
    const VectorXd w = Eigen::Map<const VectorXd>(W.data(), nn);
    VectorXd z = lhs.partialPivLu().solve(w);
    // Column-major vec with F⊗F matches Z = F Z Fᵀ.
    return symmetrize(Eigen::Map<MatrixXd>(z.data(), n, n));
  }
  // Smith doubling.
  MatrixXd z = W;
  MatrixXd f = F;
  for (int it = 0; it < 200; ++it) {
    const MatrixXd inc = f * z * f.transpose();
    z += inc;
    f = f * f;
    if (inc.norm() <= 1e-16 * z.norm()) break;
  }
  return symmetrize(z);
}

double dlyap_residual(const MatrixXd& F, const MatrixXd& W, const MatrixXd& Z) {
  return (Z - F * Z * F.transpose() - W).norm();
}

}  // namespace ratekit::linalg
