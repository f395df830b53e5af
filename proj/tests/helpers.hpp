#pragma once

#include <random>

#include <Eigen/Dense>

#include "rfplm/error.hpp"

// Runs `expr` and checks it throws rfplm::Error with the given code.
#define CHECK_ERROR_CODE(expr, expected)                    \
  do {                                                      \
    bool thrown_ = false;                                   \
    try {                                                   \
      (void)(expr);                                         \
    } catch (const rfplm::Error& e_) {                      \
      thrown_ = true;                                       \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());    \
    }                                                       \
    CHECK_MESSAGE(thrown_, "expected an rfplm::Error");     \
  } while (0)

inline Eigen::VectorXd normal_vector(std::mt19937_64& rng, Eigen::Index n, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline Eigen::MatrixXd normal_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> d(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = d(rng);
  return m;
}
