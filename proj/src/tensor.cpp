#include "qemetro/tensor.hpp"

namespace qemetro {

ComplexMatrix checked_unitary(ComplexMatrix u, double tol) {
  if (!is_unitary(u, tol)) throw DomainError("matrix is not unitary within tolerance");
  return u;
}

int qubits_of(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw ShapeError("dimension is not a power of two");
  return n;
}

ComplexMatrix basis_projector(int n_qubits, std::size_t index) {
  const int d = dim_of(n_qubits);
  ComplexMatrix p = ComplexMatrix::Zero(d, d);
  p(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return p;
}

ComplexMatrix zero_state(int n_qubits) { return basis_projector(n_qubits, 0); }

ComplexMatrix pure_density(const ComplexVector& psi) { return psi * psi.adjoint(); }

ComplexMatrix embed(const ComplexMatrix& op, int qubit, int n_qubits) {
  ComplexMatrix out = ComplexMatrix::Identity(dim_of(n_qubits), dim_of(n_qubits));
  left_multiply(out, op, qubit, n_qubits);
  return out;
}

void left_multiply(ComplexMatrix& m, const ComplexMatrix& op, int qubit, int n_qubits) {
  const Eigen::Index d = dim_of(n_qubits);
  const Eigen::Index bit = Eigen::Index{1} << (n_qubits - 1 - qubit);
  const cplx a = op(0, 0), b = op(0, 1), c = op(1, 0), e = op(1, 1);
  for (Eigen::Index r = 0; r < d; ++r) {
    if (r & bit) continue;
    const Eigen::Index r1 = r | bit;
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
      const cplx x0 = m(r, col), x1 = m(r1, col);
      m(r, col) = a * x0 + b * x1;
      m(r1, col) = c * x0 + e * x1;
    }
  }
}

void right_multiply_adjoint(ComplexMatrix& m, const ComplexMatrix& op, int qubit, int n_qubits) {
  // m ← m · op†, column pairs mix with conj(op) entries.
  const Eigen::Index d = dim_of(n_qubits);
  const Eigen::Index bit = Eigen::Index{1} << (n_qubits - 1 - qubit);
  const cplx a = std::conj(op(0, 0)), b = std::conj(op(0, 1));
  const cplx c = std::conj(op(1, 0)), e = std::conj(op(1, 1));
  for (Eigen::Index col = 0; col < d; ++col) {
    if (col & bit) continue;
    const Eigen::Index c1 = col | bit;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const cplx x0 = m(r, col), x1 = m(r, c1);
      m(r, col) = x0 * a + x1 * b;
      m(r, c1) = x0 * c + x1 * e;
    }
  }
}

ComplexMatrix sandwich(const ComplexMatrix& rho, const ComplexMatrix& op, int qubit, int n_qubits) {
  ComplexMatrix out = rho;
  left_multiply(out, op, qubit, n_qubits);
  right_multiply_adjoint(out, op, qubit, n_qubits);
  return out;
}

}  // namespace qemetro
