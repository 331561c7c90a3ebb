#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qemetro {

// Error categories shared by every module. The CLI maps ConfigError and
// CapabilityError onto distinct exit codes.
struct SizeError : std::runtime_error { using std::runtime_error::runtime_error; };
struct ShapeError : std::runtime_error { using std::runtime_error::runtime_error; };
struct DomainError : std::runtime_error { using std::runtime_error::runtime_error; };
struct DegenerateError : std::runtime_error { using std::runtime_error::runtime_error; };
struct CapabilityError : std::runtime_error { using std::runtime_error::runtime_error; };
struct ConfigError : std::runtime_error { using std::runtime_error::runtime_error; };

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using cplx = std::complex<double>;
using ComplexMatrix = Matrix<cplx>;
using ComplexVector = Vector<cplx>;
using RealVector = Vector<double>;

// States are plain matrices; the aliases document intent at call sites.
using DensityOperator = ComplexMatrix;

// Largest operator dimension the library accepts (12 qubits).
inline constexpr Eigen::Index kMaxDim = Eigen::Index{1} << 12;

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Kronecker product a ⊗ b; row index of the result is i_a*dim(b) + i_b.
template <class A, class B>
auto kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using Scalar = typename Eigen::ScalarBinaryOpTraits<typename A::Scalar,
                                                      typename B::Scalar>::ReturnType;
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows > kMaxDim || cols > kMaxDim)
    throw SizeError("kron: result exceeds maximum dimension " + std::to_string(kMaxDim));
  Matrix<Scalar> out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          a(i, j) * b.template cast<Scalar>();
  return out;
}

// Trace over every subsystem not listed in `keep`. Subsystem 0 is the most
// significant factor, matching kron ordering.
template <class Derived>
Matrix<typename Derived::Scalar> partial_trace(const Eigen::MatrixBase<Derived>& rho,
                                               const std::vector<int>& keep,
                                               const std::vector<int>& dims) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(dims.size());
  Eigen::Index total = 1;
  for (int d : dims) {
    if (d < 1) throw ShapeError("partial_trace: local dimension must be positive");
    total *= d;
  }
  if (rho.rows() != total || rho.cols() != total)
    throw ShapeError("partial_trace: matrix size does not match product of local dims");

  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw ShapeError("partial_trace: keep index out of range");
    if (kept[k]) throw ShapeError("partial_trace: duplicate keep index");
    kept[k] = true;
  }

  // Strides of every subsystem in the full index.
  std::vector<Eigen::Index> stride(n, 1);
  for (int s = n - 2; s >= 0; --s) stride[s] = stride[s + 1] * dims[s + 1];

  std::vector<int> kept_sys, traced_sys;
  for (int s = 0; s < n; ++s) (kept[s] ? kept_sys : traced_sys).push_back(s);

  Eigen::Index dk = 1, dt = 1;
  for (int s : kept_sys) dk *= dims[s];
  for (int s : traced_sys) dt *= dims[s];

  auto offset = [&](const std::vector<int>& systems, Eigen::Index idx) {
    Eigen::Index off = 0;
    for (int p = static_cast<int>(systems.size()) - 1; p >= 0; --p) {
      const int s = systems[p];
      off += (idx % dims[s]) * stride[s];
      idx /= dims[s];
    }
    return off;
  };

  std::vector<Eigen::Index> kept_off(dk), traced_off(dt);
  for (Eigen::Index i = 0; i < dk; ++i) kept_off[i] = offset(kept_sys, i);
  for (Eigen::Index t = 0; t < dt; ++t) traced_off[t] = offset(traced_sys, t);

  Matrix<Scalar> out = Matrix<Scalar>::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i)
    for (Eigen::Index j = 0; j < dk; ++j) {
      Scalar acc(0);
      for (Eigen::Index t = 0; t < dt; ++t)
        acc += rho(kept_off[i] + traced_off[t], kept_off[j] + traced_off[t]);
      out(i, j) = acc;
    }
  return out;
}

template <class Scalar>
struct HermitianEigenSystem {
  RealVector eigenvalues;     // ascending
  Matrix<Scalar> eigenvectors;  // orthonormal columns
};

inline constexpr double kHermitianTol = 1e-10;

// Symmetrizes and decomposes. Deviations from Hermiticity above 1e-10
// (relative to the largest entry, floor 1) are rejected, not repaired.
template <class Derived>
HermitianEigenSystem<typename Derived::Scalar> eig_hermitian(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw ShapeError("eig_hermitian: matrix must be square");
  const double scale = std::max(1.0, max_abs(m));
  if (max_abs(m - m.adjoint()) > kHermitianTol * scale)
    throw DomainError("eig_hermitian: matrix is not Hermitian within tolerance");
  const Matrix<Scalar> sym = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(sym);
  if (solver.info() != Eigen::Success) throw DomainError("eig_hermitian: solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// Sum of singular values.
template <class Derived>
double trace_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw ShapeError("trace_norm: matrix must be square");
  const double scale = std::max(1.0, max_abs(m));
  if (max_abs(m - m.adjoint()) <= kHermitianTol * scale)
    return eig_hermitian(m).eigenvalues.cwiseAbs().sum();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m.eval());
  return svd.singularValues().sum();
}

// Principal square root of a PSD matrix; eigenvalues in [-1e-10, 0) are
// clamped to zero.
template <class Derived>
Matrix<typename Derived::Scalar> psd_sqrt(const Eigen::MatrixBase<Derived>& m) {
  auto es = eig_hermitian(m);
  if (es.eigenvalues.size() > 0 && es.eigenvalues.minCoeff() < -1e-10)
    throw DomainError("psd_sqrt: matrix has a negative eigenvalue below -1e-10");
  const RealVector root = es.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors * root.asDiagonal() * es.eigenvectors.adjoint();
}

template <class Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& u, double tol = 1e-12) {
  if (u.rows() != u.cols()) return false;
  using Scalar = typename Derived::Scalar;
  return max_abs(u.adjoint() * u - Matrix<Scalar>::Identity(u.rows(), u.cols())) <= tol;
}

// Validates a unitary at construction time (U†U = 1 within 1e-12).
ComplexMatrix checked_unitary(ComplexMatrix u, double tol = 1e-12);

// ---- qubit-register helpers ------------------------------------------------
// Qubit q of an n-qubit register corresponds to bit (n-1-q) of the basis
// index, so qubit 0 is the leftmost tensor factor.

inline int dim_of(int n_qubits) { return 1 << n_qubits; }
int qubits_of(Eigen::Index dim);

ComplexMatrix basis_projector(int n_qubits, std::size_t index);
ComplexMatrix zero_state(int n_qubits);
ComplexMatrix pure_density(const ComplexVector& psi);

// op (2x2) embedded on `qubit`: 1 ⊗ ... ⊗ op ⊗ ... ⊗ 1.
ComplexMatrix embed(const ComplexMatrix& op, int qubit, int n_qubits);

// In-place one-qubit products without forming the full operator.
void left_multiply(ComplexMatrix& m, const ComplexMatrix& op, int qubit, int n_qubits);
void right_multiply_adjoint(ComplexMatrix& m, const ComplexMatrix& op, int qubit, int n_qubits);

// op ρ op† for a one-qubit op.
ComplexMatrix sandwich(const ComplexMatrix& rho, const ComplexMatrix& op, int qubit, int n_qubits);

}  // namespace qemetro
