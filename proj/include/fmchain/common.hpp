#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fmc {

using Real = double;
using Complex = std::complex<double>;

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Broad failure classes. The CLI maps each one to an exit status.
enum class ErrorKind {
  validation,   // malformed or out-of-range input
  infeasible,   // well-formed input for which the requested object does not exist
  convergence,  // an iterative method did not reach its tolerance
  resource,     // a size guard was exceeded
  numeric,      // numerical breakdown or internal consistency failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Stable machine-readable identifier, e.g. "not_stochastic".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

struct ValidationError : Error {
  ValidationError(std::string code, const std::string& msg)
      : Error(ErrorKind::validation, std::move(code), msg) {}
};
struct InfeasibleError : Error {
  InfeasibleError(std::string code, const std::string& msg)
      : Error(ErrorKind::infeasible, std::move(code), msg) {}
};
struct ConvergenceError : Error {
  ConvergenceError(std::string code, const std::string& msg)
      : Error(ErrorKind::convergence, std::move(code), msg) {}
};
struct ResourceError : Error {
  ResourceError(std::string code, const std::string& msg)
      : Error(ErrorKind::resource, std::move(code), msg) {}
};
struct NumericError : Error {
  NumericError(std::string code, const std::string& msg)
      : Error(ErrorKind::numeric, std::move(code), msg) {}
};

/// Tolerance for accepting eigenvalues marginally outside [0, 1].
inline constexpr Real kSpectralSlack = 1e-10;

/// Largest matrix dimension handed to a dense eigensolver.
inline constexpr long kMaxDenseDim = 4096;

/// -x log x with the continuous extension 0 log 0 = 0.
template <typename Scalar>
Scalar xlogx_neg(Scalar x) {
  return x > Scalar(0) ? -x * std::log(x) : Scalar(0);
}

/// Binary entropy in nats. Arguments within kSpectralSlack of [0, 1] are
/// clamped; anything further out raises a NumericError.
Real binary_entropy(Real lambda);

/// Shannon entropy (nats) of a probability vector.
template <typename Derived>
Real shannon_entropy(const Eigen::MatrixBase<Derived>& p) {
  Real h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) h += xlogx_neg<Real>(p(i));
  return h;
}

/// Max-abs deviation of a square matrix from its adjoint.
template <typename Derived>
Real hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<Real>::infinity();
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Ascending eigenvalues of the Hermitian part of `m`.
template <typename Derived>
RealVector hermitian_eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  const Plain h = (m + m.adjoint()) / 2;
  Eigen::SelfAdjointEigenSolver<Plain> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigensolver_failure", "Hermitian eigensolver did not converge");
  return solver.eigenvalues();
}

template <typename Derived>
Real min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : hermitian_eigenvalues(m)(0);
}

/// Largest singular value.
template <typename Derived>
Real operator_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  using Plain = typename Derived::PlainObject;
  Eigen::JacobiSVD<Plain> svd(m.eval());
  return svd.singularValues()(0);
}

void require_square(const CMatrix& m, const std::string& what);

void require_hermitian(const CMatrix& m, const std::string& what, Real tol = 1e-12);

std::string describe_shape(Eigen::Index rows, Eigen::Index cols);

/// Uniform grid on the circle, shifted by half a step so that no node
/// coincides with 0 or +-pi/2.
inline Real circle_node(long j, long count) {
  return -std::numbers::pi + 2.0 * std::numbers::pi * (static_cast<Real>(j) + 0.5) / static_cast<Real>(count);
}

}  // namespace fmc
