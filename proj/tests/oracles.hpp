#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's numerics.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ratekit/cost_tables.hpp"
#include "ratekit/synthesis.hpp"

namespace oracle {

using Eigen::MatrixXd;

struct Sampled {
  MatrixXd Phi, Gamma, R1d, Qd;
  double noise_cost = 0.0;
};

/// Integrates e^{Ās} with classical RK4 on `steps` substeps and forms the
/// sampled-data integrals with composite Simpson on the same grid.
Sampled quadrature_discretize(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Rc,
                              const MatrixXd& Qxu, double h, int steps = 10000);

/// Positive root of the scalar DARE with cross term
///   s = a²s + q − (abs + n)²/(b²s + r)
/// and the resulting gain k = (abs + n)/(b²s + r).
struct ScalarDare {
  double s, k;
};
ScalarDare scalar_dare(double a, double b, double q, double r, double n);

/// Time-domain closed loop of a sampled LQG controller driven by Gaussian
/// noise; returns the per-second cost mean and its batch-means standard error.
struct MonteCarlo {
  double mean, std_error;
};
MonteCarlo simulate_cost(const Sampled& d, const MatrixXd& C, const MatrixXd& R2,
                         const MatrixXd& K, const MatrixXd& Kf, double h, double r,
                         std::size_t steps, std::uint64_t seed, std::size_t batches = 100);

/// Stationary per-second cost of the closed loop in [x; x̂(k|k−1)]
/// coordinates from one Kronecker-form Lyapunov solve with total noise
/// r·R1d (process) and R2 (measurement).
double lyapunov_cost(const Sampled& d, const MatrixXd& C, const MatrixXd& R2, const MatrixXd& K,
                     const MatrixXd& Kf, double h, double r);

/// Enumerates every level→period map directly from the cost table, periods,
/// pattern and φ. Returns the optimum with the same tie-break as the library.
struct Brute {
  bool feasible = false;
  std::vector<std::size_t> choice;
  double cost = 0.0;
  double energy = 0.0;
  std::uint64_t count = 0;
};
Brute brute_force(const Eigen::MatrixXd& J, const std::vector<double>& periods_s,
                  const std::vector<double>& fractions, double window_s, double phi_j,
                  double budget_j);

/// A random instance with costs non-decreasing in the period.
struct Instance {
  ratekit::CostTable ct;
  ratekit::PowerTable pt;
  std::vector<double> fractions;
  double window_s = 100.0;
  double budget_j = 0.0;
  bool strict = true;
};
Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t k,
                         bool allow_ties = false);

}  // namespace oracle
