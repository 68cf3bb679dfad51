#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace ratekit::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Matrix exponential by scaling and squaring with Padé approximation.
MatrixXd expm(const MatrixXd& m);

double spectral_radius(const MatrixXd& m);

bool all_finite(const MatrixXd& m);
bool is_symmetric(const MatrixXd& m, double rel_tol = 1e-12);

/// Symmetric positive semidefinite test with an eigenvalue floor relative to
/// the largest magnitude eigenvalue.
bool is_psd(const MatrixXd& m, double rel_tol = 1e-10);
bool is_pd(const MatrixXd& m);

inline MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

/// Throws ConfigError naming `what` when `m` is not finite.
void require_finite(const MatrixXd& m, std::string_view what);

struct DareSolution {
  MatrixXd S;
  int iterations = 0;
};

/// Stabilizing solution of the discrete algebraic Riccati equation
///
///   S = AᵀSA + Q − (AᵀSB + N)(R + BᵀSB)⁻¹(BᵀSA + Nᵀ)
///
/// via the structure-preserving doubling algorithm. R must be positive
/// definite. Converges when the relative change in S falls below `rel_tol`.
DareSolution solve_dare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                        const MatrixXd& R, const MatrixXd& N,
                        double rel_tol = 1e-12, int max_iter = 10000);

/// Frobenius norm of S minus the Riccati map applied to S.
double dare_residual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                     const MatrixXd& R, const MatrixXd& N, const MatrixXd& S);

/// Solves Z = F Z Fᵀ + W. Throws NumericError when F is not Schur stable.
MatrixXd solve_dlyap(const MatrixXd& F, const MatrixXd& W);

double dlyap_residual(const MatrixXd& F, const MatrixXd& W, const MatrixXd& Z);

}  // namespace ratekit::linalg
