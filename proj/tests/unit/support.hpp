#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "etpr/emtd.hpp"
#include "etpr/kernels.hpp"
#include "etpr/model.hpp"

namespace etpr::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline Vector random_vector(Eigen::Index n, Rng& rng, double sd = 1.0) {
  return random_matrix(n, 1, rng, sd).col(0);
}

/// Well-conditioned SPD matrix: B B^T / n + ridge.
inline SymMatrix random_spd(Eigen::Index n, Rng& rng, double ridge = 0.5) {
  const Matrix b = random_matrix(n, n, rng);
  SymMatrix a = b * b.transpose() / static_cast<double>(n);
  a.diagonal().array() += ridge;
  return 0.5 * (a + a.transpose());
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline KernelParams random_kernel(std::size_t p, Rng& rng) {
  KernelParams k = KernelParams::all_included(p, uniform(rng, 0.2, 2.0), 1.0, 0.1);
  for (std::size_t q = 0; q < p; ++q) {
    const auto qi = static_cast<Eigen::Index>(q);
    k.w[qi] = uniform(rng, 0.3, 3.0);
    k.a[qi] = uniform(rng, 0.01, 0.5);
  }
  return k;
}

inline CurveData random_curve(const std::string& id, Eigen::Index n, Eigen::Index p, Rng& rng) {
  CurveData c;
  c.id = id;
  c.x = random_matrix(n, p, rng);
  c.t = c.x.col(0);
  c.y = random_vector(n, rng);
  return c;
}

inline std::vector<CurveData> random_data(std::size_t m, Eigen::Index n, Eigen::Index p, Rng& rng) {
  std::vector<CurveData> data;
  for (std::size_t i = 0; i < m; ++i) data.push_back(random_curve("c" + std::to_string(i), n, p, rng));
  return data;
}

inline EtprModel random_model(std::size_t m, std::size_t p, Rng& rng) {
  EtprModel model;
  model.nu = uniform(rng, 1.2, 6.0);
  model.sigma_sq = uniform(rng, 0.05, 0.5);
  for (std::size_t i = 0; i < m; ++i) model.kernels.push_back(random_kernel(p, rng));
  return model;
}

}  // namespace etpr::testing
