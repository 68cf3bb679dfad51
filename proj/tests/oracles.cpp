#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace oracle {

Sampled quadrature_discretize(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Rc,
                              const MatrixXd& Qxu, double h, int steps) {
  if (steps % 2) ++steps;
  const Eigen::Index nx = A.rows(), nu = B.cols(), na = nx + nu;
  MatrixXd Abar = MatrixXd::Zero(na, na);
  Abar.topLeftCorner(nx, nx) = A;
  Abar.topRightCorner(nx, nu) = B;

  const double dt = h / steps;
  const MatrixXd Qx = Qxu.topLeftCorner(nx, nx);
  MatrixXd E = MatrixXd::Identity(na, na);
  MatrixXd R1d = MatrixXd::Zero(nx, nx), Qd = MatrixXd::Zero(na, na);
  double noise = 0.0;

  for (int i = 0; i <= steps; ++i) {
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double s = i * dt;
    const MatrixXd Ex = E.topLeftCorner(nx, nx);
    const MatrixXd G = Ex * Rc * Ex.transpose();
    R1d += w * G;
    Qd += w * E.transpose() * Qxu * E;
    noise += w * (h - s) * (Qx * G).trace();
    if (i == steps) break;
    const MatrixXd k1 = Abar * E;
    const MatrixXd k2 = Abar * (E + 0.5 * dt * k1);
    const MatrixXd k3 = Abar * (E + 0.5 * dt * k2);
    const MatrixXd k4 = Abar * (E + dt * k3);
    E += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  Sampled out;
  out.Phi = E.topLeftCorner(nx, nx);
  out.Gamma = E.topRightCorner(nx, nu);
  out.R1d = R1d * dt / 3.0;
  out.Qd = Qd * dt / 3.0;
  out.noise_cost = noise * dt / 3.0;
  return out;
}

ScalarDare scalar_dare(double a, double b, double q, double r, double n) {
  // b²s² + (r(1−a²) − b²q + 2abn)s + (n² − rq) = 0
  const double A2 = b * b;
  const double B1 = r * (1.0 - a * a) - b * b * q + 2.0 * a * b * n;
  const double C0 = n * n - r * q;
  const double s = (-B1 + std::sqrt(B1 * B1 - 4.0 * A2 * C0)) / (2.0 * A2);
  return {s, (a * b * s + n) / (b * b * s + r)};
}

namespace {

MatrixXd chol_factor(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

MonteCarlo simulate_cost(const Sampled& d, const MatrixXd& C, const MatrixXd& R2,
                         const MatrixXd& K, const MatrixXd& Kf, double h, double r,
                         std::size_t steps, std::uint64_t seed, std::size_t batches) {
  const Eigen::Index nx = d.Phi.rows(), nu = d.Gamma.cols(), ny = C.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const MatrixXd Lw = chol_factor(r * d.R1d);
  const MatrixXd Le = chol_factor(R2);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(nx), xp = Eigen::VectorXd::Zero(nx);
  Eigen::VectorXd w(nx), e(ny), z(nx + nu);
  const std::size_t burn = steps / 20;
  const std::size_t per_batch = steps / batches;
  std::vector<double> batch_sum(batches, 0.0);

  for (std::size_t k = 0; k < burn + per_batch * batches; ++k) {
    for (Eigen::Index i = 0; i < ny; ++i) e(i) = normal(rng);
    const Eigen::VectorXd y = C * x + Le * e;
    const Eigen::VectorXd xf = xp + Kf * (y - C * xp);
    const Eigen::VectorXd u = -K * xf;
    z << x, u;
    const double stage = z.dot(d.Qd * z) + r * d.noise_cost;
    if (k >= burn) batch_sum[(k - burn) / per_batch] += stage;
    for (Eigen::Index i = 0; i < nx; ++i) w(i) = normal(rng);
    x = d.Phi * x + d.Gamma * u + Lw * w;
    xp = d.Phi * xf + d.Gamma * u;
  }
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) means[b] = batch_sum[b] / per_batch / h;
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / batches;
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= (batches - 1);
  return {mean, std::sqrt(var / batches)};
}

double lyapunov_cost(const Sampled& d, const MatrixXd& C, const MatrixXd& R2, const MatrixXd& K,
                     const MatrixXd& Kf, double h, double r) {
  const Eigen::Index nx = d.Phi.rows(), nu = d.Gamma.cols(), ny = C.rows(), nz = 2 * nx;
  const MatrixXd I = MatrixXd::Identity(nx, nx);
  const MatrixXd Acl = d.Phi - d.Gamma * K;
  const MatrixXd KfC = Kf * C;
  MatrixXd F(nz, nz), Gw = MatrixXd::Zero(nz, nx), Ge(nz, ny), M(nx + nu, nz),
      N = MatrixXd::Zero(nx + nu, ny);
  F << d.Phi - d.Gamma * K * KfC, -d.Gamma * K * (I - KfC), Acl * KfC, Acl * (I - KfC);
  Gw.topRows(nx) = I;
  Ge << -d.Gamma * K * Kf, Acl * Kf;
  M << I, MatrixXd::Zero(nx, nx), -K * KfC, -K * (I - KfC);
  N.bottomRows(nu) = -K * Kf;

  const MatrixXd W = r * Gw * d.R1d * Gw.transpose() + Ge * R2 * Ge.transpose();
  // vec(Σ) = (I − F⊗F)⁻¹ vec(W)
  MatrixXd L = MatrixXd::Identity(nz * nz, nz * nz);
  for (Eigen::Index i = 0; i < nz; ++i)
    for (Eigen::Index j = 0; j < nz; ++j) L.block(i * nz, j * nz, nz, nz) -= F(i, j) * F;
  const Eigen::VectorXd vecW = Eigen::Map<const Eigen::VectorXd>(W.data(), nz * nz);
  const Eigen::VectorXd vecS = L.fullPivLu().solve(vecW);
  const MatrixXd S = Eigen::Map<const MatrixXd>(vecS.data(), nz, nz);
  const MatrixXd Z = M * S * M.transpose() + N * R2 * N.transpose();
  return ((d.Qd * Z).trace() + r * d.noise_cost) / h;
}

Brute brute_force(const Eigen::MatrixXd& J, const std::vector<double>& periods_s,
                  const std::vector<double>& fractions, double window_s, double phi_j,
                  double budget_j) {
  const std::size_t n = periods_s.size(), k = fractions.size();
  Brute best;
  std::vector<std::size_t> c(k, 0);
  std::function<void(std::size_t)> rec = [&](std::size_t level) {
    if (level == k) {
      ++best.count;
      double cost = 0.0, energy = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double T = fractions[j] * window_s;
        cost += J(static_cast<Eigen::Index>(c[j]), static_cast<Eigen::Index>(j)) * T;
        energy += std::floor(T / periods_s[c[j]] * (1.0 + 1e-9)) * phi_j;
      }
      cost /= window_s;
      if (energy > budget_j) return;
      const auto better = [&] {
        if (!best.feasible) return true;
        const double tol = 1e-12 * std::max(1.0, std::abs(best.cost));
        if (cost < best.cost - tol) return true;
        if (cost > best.cost + tol) return false;
        if (energy < best.energy - 1e-12) return true;
        if (energy > best.energy + 1e-12) return false;
        return c < best.choice;
      };
      if (better()) best = {true, c, cost, energy, best.count};
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      c[level] = i;
      rec(level + 1);
    }
  };
  rec(0);
  return best;
}

Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t k, bool allow_ties) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> ms(n);
  double h = 5.0 + std::floor(u(rng) * 10.0);
  for (std::size_t i = 0; i < n; ++i) {
    ms[i] = h;
    h += 1.0 + std::floor(u(rng) * 15.0);
  }
  ratekit::RateSet rates(ms);
  Eigen::MatrixXd J(n, k);
  for (std::size_t j = 0; j < k; ++j) {
    double v = 0.1 + 10.0 * u(rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) v += (allow_ties && u(rng) < 0.3) ? 0.0 : 0.01 + 5.0 * u(rng);
      J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  Instance inst{ratekit::CostTable{rates, J, {}},
                ratekit::build_power_table(rates, 50.0 + 100.0 * u(rng)),
                {},
                100.0,
                0.0,
                !allow_ties};
  std::vector<double> raw(k);
  for (auto& r : raw) r = 0.05 + u(rng);
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    inst.fractions.push_back(raw[j] / total);
    acc += inst.fractions.back();
  }
  inst.fractions.push_back(1.0 - acc);

  // Budgets from clearly infeasible to unconstrained.
  double e_min = 0.0, e_max = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double T = inst.fractions[j] * inst.window_s;
    e_min += std::floor(T / rates.seconds(n - 1) * (1.0 + 1e-9)) * inst.pt.phi_j();
    e_max += std::floor(T / rates.seconds(0) * (1.0 + 1e-9)) * inst.pt.phi_j();
  }
  const double t = -0.2 + 1.4 * u(rng);
  inst.budget_j = std::max(0.0, e_min + t * (e_max - e_min));
  return inst;
}

}  // namespace oracle
