#include "fmchain/common.hpp"

#include <sstream>

namespace fmc {

Real binary_entropy(Real lambda) {
  if (lambda < -kSpectralSlack || lambda > 1.0 + kSpectralSlack) {
    std::ostringstream os;
    os.precision(17);
    os << "binary entropy evaluated outside [0,1]: " << lambda;
    throw NumericError("spectrum_out_of_range", os.str());
  }
  if (lambda <= 0.0 || lambda >= 1.0) return 0.0;
  return xlogx_neg(lambda) + xlogx_neg(1.0 - lambda);
}

std::string describe_shape(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

void require_square(const CMatrix& m, const std::string& what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ValidationError("dimension_mismatch",
                          what + " must be a non-empty square matrix, got " +
                              describe_shape(m.rows(), m.cols()));
}

void require_hermitian(const CMatrix& m, const std::string& what, Real tol) {
  require_square(m, what);
  const Real defect = hermiticity_defect(m);
  if (!(defect <= tol)) {
    std::ostringstream os;
    os << what << " is not Hermitian (defect " << defect << ")";
    throw ValidationError("not_hermitian", os.str());
  }
}

}  // namespace fmc
