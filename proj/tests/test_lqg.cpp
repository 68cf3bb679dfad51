#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "ratekit/error.hpp"
#include "ratekit/linalg.hpp"
#include "ratekit/lqg.hpp"

using namespace ratekit;
using Eigen::MatrixXd;

namespace {

oracle::Sampled sampled(const PlantModel& p, double h) {
  return oracle::quadrature_discretize(p.A(), p.B(), p.Rc(), p.Qxu(), h);
}

}  // namespace

TEST_CASE("scalar plant gains match the closed-form DARE roots") {
  const auto one = [](double v) { return MatrixXd::Constant(1, 1, v); };
  const PlantModel p(one(-1), one(1), one(1), one(0), one(1), one(0.1), MatrixXd::Identity(2, 2));
  for (double h : {0.01, 0.1, 0.5}) {
    const LqgController c = design(p, h);
    const oracle::Sampled o = sampled(p, h);
    const auto ctl = oracle::scalar_dare(o.Phi(0, 0), o.Gamma(0, 0), o.Qd(0, 0), o.Qd(1, 1), o.Qd(0, 1));
    CHECK(c.S(0, 0) == doctest::Approx(ctl.s).epsilon(1e-9));
    CHECK(c.K(0, 0) == doctest::Approx(ctl.k).epsilon(1e-9));
    // Filter: predictor covariance from the dual equation, current-estimator gain.
    const auto flt = oracle::scalar_dare(o.Phi(0, 0), 1.0, o.R1d(0, 0), 0.1, 0.0);
    CHECK(c.P(0, 0) == doctest::Approx(flt.s).epsilon(1e-9));
    CHECK(c.Kf(0, 0) == doctest::Approx(flt.s / (flt.s + 0.1)).epsilon(1e-9));
  }
}

TEST_CASE("servo designs: residuals, stability and cost cross-check") {
  const PlantModel p = fixture::servo();
  for (double ms : fixture::servo_rates_ms()) {
    const double h = ms / 1000.0;
    const LqgController c = design(p, h);
    CHECK(c.control_residual < 1e-8);
    CHECK(c.filter_residual < 1e-8);
    CHECK(c.closed_loop_radius < 1.0);
    const oracle::Sampled o = sampled(p, h);
    for (double r : {0.0, 1.0, 30.0}) {
      const CostBreakdown cb = evaluate_cost(p, c, r);
      CHECK(cb.lyapunov_residual < 1e-8);
      const double ref = oracle::lyapunov_cost(o, p.C(), p.R2(), c.K, c.Kf, h, r);
      CHECK(cb.J == doctest::Approx(ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("cost is affine in the noise intensity") {
  const PlantModel p = fixture::servo();
  for (double h : {0.01, 0.05, 0.09}) {
    const LqgController c = design(p, h);
    const double j0 = evaluate_cost(p, c, 0).J, j1 = evaluate_cost(p, c, 1).J,
                 j2 = evaluate_cost(p, c, 2).J;
    CHECK(std::abs((j2 - j0) - 2 * (j1 - j0)) <= 1e-9 * std::abs(j2));
    const CostBreakdown cb = evaluate_cost(p, c, 7.5);
    CHECK(cb.J == doctest::Approx(7.5 * cb.a + cb.b).epsilon(1e-14));
    CHECK(cb.a > 0);
  }
}

TEST_CASE("no excitation gives zero cost") {
  const LqgController c = design(fixture::servo(), 0.02);
  const CostBreakdown cb = evaluate_cost(fixture::servo(0.0), c, 0.0);
  CHECK(std::abs(cb.J) < 1e-14);
  CHECK(std::abs(cb.b) < 1e-14);
}

TEST_CASE("cost engine agrees with a Monte-Carlo closed loop") {
  const PlantModel p = fixture::servo();
  const double h = 0.05;
  const LqgController c = design(p, h);
  const oracle::Sampled o = sampled(p, h);
  std::uint64_t seed = 11;
  for (double r : {5.0, 30.0, 75.0}) {
    const auto mc = oracle::simulate_cost(o, p.C(), p.R2(), c.K, c.Kf, h, r, 1'000'000, seed++);
    const double J = evaluate_cost(p, c, r).J;
    INFO("r=" << r << " J=" << J << " mc=" << mc.mean << " se=" << mc.std_error);
    CHECK(std::abs(J - mc.mean) <= 3 * mc.std_error);
  }
}

TEST_CASE("innovation model") {
  const PlantModel p = fixture::servo();
  const LqgController c = design(p, 0.03);
  const InnovationModel im = innovation_model(p, c);
  CHECK((im.slope + im.offset - c.innovation_cov).norm() < 1e-10 * c.innovation_cov.norm());
  CHECK(im.slope(0, 0) > 0);
  CHECK(im.offset(0, 0) >= p.R2()(0, 0) * (1 - 1e-12));
}

TEST_CASE("design rejects feedthrough and invalid periods") {
  const auto one = [](double v) { return MatrixXd::Constant(1, 1, v); };
  const PlantModel p(one(-1), one(1), one(1), one(0.5), one(1), one(0.1), MatrixXd::Identity(2, 2));
  CHECK_THROWS(design(p, 0.01));
  CHECK_THROWS(design(fixture::servo(), 0.0));
}

TEST_CASE("linear algebra helpers") {
  MatrixXd F(2, 2);
  F << 0.5, 0.2, -0.1, 0.7;
  const MatrixXd W = MatrixXd::Identity(2, 2);
  const MatrixXd Z = linalg::solve_dlyap(F, W);
  CHECK(linalg::dlyap_residual(F, W, Z) < 1e-12);
  CHECK_THROWS_AS(linalg::solve_dlyap(2.0 * MatrixXd::Identity(2, 2), W), NumericError);

  // Larger system goes through the doubling path.
  const int n = 20;
  MatrixXd G = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    G(i, i) = 0.9 - 0.03 * i;
    if (i + 1 < n) G(i, i + 1) = 0.2;
  }
  const MatrixXd Wn = MatrixXd::Identity(n, n);
  const MatrixXd Zn = linalg::solve_dlyap(G, Wn);
  CHECK(linalg::dlyap_residual(G, Wn, Zn) < 1e-10);
  CHECK(linalg::is_psd(Zn));
}
