#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace iflab {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

bool all_finite(const ComplexMatrix& m);
bool all_finite(const RealMatrix& m);

/// Water-filling power allocation over the eigenmodes of H'H under the total
/// budget cols(H) * snr. `powers` is indexed by decreasing eigenvalue;
/// inactive modes carry zero.
struct WaterfillingSolution {
  double capacity_bits = 0.0;
  RealVector powers;
  double water_level = 0.0;
};

/// Real form [[Re H, -Im H], [Im H, Re H]] of an N x M complex matrix.
/// Complex products carry over: (H x)~ = real_expansion(H) * x~ with
/// x~ = [Re x; Im x].
RealMatrix real_expansion(const ComplexMatrix& h);

/// White-input mutual information log2 det(I + snr H'H) in bits per channel
/// use. The argument of the determinant is Hermitian positive definite, so
/// the log-det is real; an imaginary residue above 1e-9 trips an error.
double wi_mutual_information(const ComplexMatrix& h, double snr);

/// Exact KKT water-filling: eigenvalues are sorted and active-set sizes
/// scanned, no iterative bisection. Eigenvalues of H'H below 1e-12 are
/// treated as zero modes.
WaterfillingSolution waterfilling_capacity(const ComplexMatrix& h, double snr);

/// Lower-triangular L with strictly positive diagonal such that
/// L L^T = (I + snr Hr^T Hr)^{-1}. The Gram matrix is symmetric positive
/// definite for every finite Hr and snr > 0, so the factor always exists.
RealMatrix cholesky_inv_gram(const RealMatrix& h_real, double snr);

// Shared matrix text format: first line "rows cols", then `rows` lines each
// holding `cols` whitespace-separated "re,im" pairs.
ComplexMatrix read_complex_matrix(std::istream& in);
ComplexMatrix read_complex_matrix_file(const std::string& path);
void write_complex_matrix(std::ostream& out, const ComplexMatrix& m);

}  // namespace iflab
