#include "iflab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace iflab {

namespace {

void require_nonempty_finite(const ComplexMatrix& m, const char* where) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw std::invalid_argument(std::string(where) + ": matrix must have at least one row and column");
  }
  if (!all_finite(m)) {
    throw std::invalid_argument(std::string(where) + ": matrix has non-finite entries");
  }
}

void require_positive_snr(double snr, const char* where) {
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw std::invalid_argument(std::string(where) + ": snr must be positive and finite");
  }
}

}  // namespace

bool all_finite(const ComplexMatrix& m) {
  return m.real().allFinite() && m.imag().allFinite();
}

bool all_finite(const RealMatrix& m) { return m.allFinite(); }

RealMatrix real_expansion(const ComplexMatrix& h) {
  require_nonempty_finite(h, "real_expansion");
  const Eigen::Index n = h.rows();
  const Eigen::Index m = h.cols();
  RealMatrix out(2 * n, 2 * m);
  out.topLeftCorner(n, m) = h.real();
  out.topRightCorner(n, m) = -h.imag();
  out.bottomLeftCorner(n, m) = h.imag();
  out.bottomRightCorner(n, m) = h.real();
  return out;
}

double wi_mutual_information(const ComplexMatrix& h, double snr) {
  require_nonempty_finite(h, "wi_mutual_information");
  require_positive_snr(snr, "wi_mutual_information");
  const Eigen::Index m = h.cols();
  const ComplexMatrix a = ComplexMatrix::Identity(m, m) + snr * (h.adjoint() * h);

  // Size-stable log-det: sum log-magnitudes of the LU diagonal and track the
  // phase separately so huge determinants cannot overflow.
  Eigen::PartialPivLU<ComplexMatrix> lu(a);
  double log2_abs = 0.0;
  std::complex<double> phase = static_cast<double>(lu.permutationP().determinant());
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::complex<double> d = lu.matrixLU()(i, i);
    const double mag = std::abs(d);
    if (!(mag > 0.0)) {
      throw std::logic_error("wi_mutual_information: singular Gram matrix (cannot happen for snr > 0)");
    }
    log2_abs += std::log2(mag);
    phase *= d / mag;
  }
  if (std::abs(std::arg(phase)) > 1e-9) {
    throw std::logic_error("wi_mutual_information: log-det has imaginary residue above 1e-9");
  }
  return std::max(0.0, log2_abs);
}

WaterfillingSolution waterfilling_capacity(const ComplexMatrix& h, double snr) {
  require_nonempty_finite(h, "waterfilling_capacity");
  require_positive_snr(snr, "waterfilling_capacity");
  const Eigen::Index m = h.cols();

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h.adjoint() * h);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("waterfilling_capacity: eigendecomposition failed");
  }

  // Descending eigenvalues of H'H; sub-1e-12 modes are dead.
  std::vector<double> lambda(eig.eigenvalues().data(), eig.eigenvalues().data() + m);
  std::sort(lambda.begin(), lambda.end(), std::greater<double>());
  Eigen::Index positive = 0;
  while (positive < m && lambda[static_cast<std::size_t>(positive)] > 1e-12) ++positive;

  WaterfillingSolution sol;
  sol.powers = RealVector::Zero(m);
  if (positive == 0) {
    return sol;  // all-zero channel: zero capacity, zero powers
  }

  const double budget = static_cast<double>(m) * snr;
  double inv_sum = 0.0;
  double water = 0.0;
  Eigen::Index active = 0;
  for (Eigen::Index k = 0; k < positive; ++k) {
    inv_sum += 1.0 / lambda[static_cast<std::size_t>(k)];
    const double candidate = (budget + inv_sum) / static_cast<double>(k + 1);
    if (candidate >= 1.0 / lambda[static_cast<std::size_t>(k)]) {
      water = candidate;
      active = k + 1;
    } else {
      break;  // weaker modes only get shallower; once dry, stays dry
    }
  }

  double capacity = 0.0;
  for (Eigen::Index k = 0; k < active; ++k) {
    const double lam = lambda[static_cast<std::size_t>(k)];
    sol.powers(k) = water - 1.0 / lam;
    capacity += std::log2(water * lam);
  }
  sol.capacity_bits = capacity;
  sol.water_level = water;
  return sol;
}

RealMatrix cholesky_inv_gram(const RealMatrix& h_real, double snr) {
  if (h_real.rows() < 1 || h_real.cols() < 1 || !all_finite(h_real)) {
    throw std::invalid_argument("cholesky_inv_gram: matrix must be nonempty and finite");
  }
  require_positive_snr(snr, "cholesky_inv_gram");
  const Eigen::Index k = h_real.cols();
  const RealMatrix gram = RealMatrix::Identity(k, k) + snr * (h_real.transpose() * h_real);

  Eigen::LLT<RealMatrix> gram_llt(gram);
  if (gram_llt.info() != Eigen::Success) {
    throw std::runtime_error("cholesky_inv_gram: Gram factorization failed");
  }
  const RealMatrix inv = gram_llt.solve(RealMatrix::Identity(k, k));

  Eigen::LLT<RealMatrix> inv_llt(RealMatrix((inv + inv.transpose()) / 2.0));
  if (inv_llt.info() != Eigen::Success) {
    throw std::runtime_error("cholesky_inv_gram: inverse Gram factorization failed");
  }
  return inv_llt.matrixL();
}

ComplexMatrix read_complex_matrix(std::istream& in) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  if (!(in >> rows >> cols)) {
    throw std::runtime_error("matrix read: missing \"rows cols\" header");
  }
  if (rows < 1 || cols < 1 || rows > 4096 || cols > 4096) {
    throw std::runtime_error("matrix read: implausible dimensions");
  }
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      std::string token;
      if (!(in >> token)) {
        throw std::runtime_error("matrix read: unexpected end of input");
      }
      const auto comma = token.find(',');
      if (comma == std::string::npos) {
        throw std::runtime_error("matrix read: entry \"" + token + "\" is not a re,im pair");
      }
      std::size_t used_re = 0;
      std::size_t used_im = 0;
      double re = 0.0;
      double im = 0.0;
      try {
        re = std::stod(token.substr(0, comma), &used_re);
        im = std::stod(token.substr(comma + 1), &used_im);
      } catch (const std::exception&) {
        throw std::runtime_error("matrix read: cannot parse entry \"" + token + "\"");
      }
      if (used_re != comma || used_im != token.size() - comma - 1) {
        throw std::runtime_error("matrix read: trailing junk in entry \"" + token + "\"");
      }
      m(r, c) = std::complex<double>(re, im);
    }
  }
  if (!all_finite(m)) {
    throw std::runtime_error("matrix read: non-finite entries");
  }
  return m;
}

ComplexMatrix read_complex_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open matrix file: " + path);
  }
  return read_complex_matrix(in);
}

void write_complex_matrix(std::ostream& out, const ComplexMatrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  char buf[96];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g", m(r, c).real(), m(r, c).imag());
      out << buf << (c + 1 == m.cols() ? "" : " ");
    }
    out << '\n';
  }
}

}  // namespace iflab
