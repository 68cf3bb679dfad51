#pragma once

#include "ratekit/plant_model.hpp"

namespace fixture {

using Eigen::MatrixXd;

// Motor-servo plant used throughout: integrator in series with a first-order lag.
inline ratekit::PlantModel servo(double r2 = 0.01) {
  MatrixXd A(2, 2), B(2, 1), C(1, 2);
  A << -1, 0, 1, 0;
  B << 1, 0;
  C << 0, 1000;
  return ratekit::PlantModel(A, B, C, MatrixXd::Zero(1, 1), B * B.transpose(),
                             MatrixXd::Constant(1, 1, r2), MatrixXd::Identity(3, 3));
}

inline std::vector<double> servo_rates_ms() {
  std::vector<double> ms;
  for (int h = 10; h <= 90; h += 5) ms.push_back(h);
  return ms;
}

}  // namespace fixture
