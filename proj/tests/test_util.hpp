#pragma once

#include <random>

#include "qemetro/tensor.hpp"

namespace qemetro::testutil {

inline ComplexMatrix random_matrix(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(dim, dim);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = {g(rng), g(rng)};
  return m;
}

inline ComplexMatrix random_density(int n_qubits, std::mt19937_64& rng) {
  const ComplexMatrix a = random_matrix(dim_of(n_qubits), rng);
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

inline ComplexVector random_pure(int n_qubits, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexVector v(dim_of(n_qubits));
  for (auto& x : v) x = {g(rng), g(rng)};
  return v.normalized();
}

}  // namespace qemetro::testutil
