#include "iflab/space_time.hpp"

#include "iflab/rng.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace iflab {

namespace {

constexpr long kDeltaSearchBudget = 50'000'000;

void require_precoder_invariants(const ComplexMatrix& p, double delta_min, int m,
                                 double unitarity_tol) {
  const Eigen::Index dim = static_cast<Eigen::Index>(m) * m;
  if (m < 1 || p.rows() != dim || p.cols() != dim) {
    throw std::invalid_argument("Precoder: generating matrix must be M^2 x M^2");
  }
  if (!all_finite(p)) {
    throw std::invalid_argument("Precoder: generating matrix has non-finite entries");
  }
  const double residual = (p.adjoint() * p - ComplexMatrix::Identity(dim, dim)).norm();
  if (!(residual <= unitarity_tol)) {
    std::ostringstream msg;
    msg << "Precoder: generating matrix is not unitary (residual " << residual << ")";
    throw std::invalid_argument(msg.str());
  }
  if (!(delta_min > 0.0) || !std::isfinite(delta_min)) {
    throw std::invalid_argument("Precoder: delta_min must be positive");
  }
}

// Box-constrained sphere search over the real expansion of H: minimizes
// ||R a||^2 over a in {-L..L}^{2K} \ {0}, visiting one of each +-a pair.
// Returns the minimum if it is below radius2, otherwise nothing.
std::optional<double> pam_box_min_norm2(const RealMatrix& r, int box_radius, double radius2) {
  const int k_dim = static_cast<int>(r.cols());
  const double diag_tol = 1e-13;
  double best = radius2;
  bool found = false;
  std::vector<std::int64_t> a(static_cast<std::size_t>(k_dim), 0);
  std::vector<double> partial2(static_cast<std::size_t>(k_dim) + 1, 0.0);

  auto descend = [&](auto&& self, int level, bool zero_above) -> void {
    if (level < 0) {
      if (!zero_above && partial2[0] < best) {
        best = partial2[0];
        found = true;
      }
      return;
    }
    const double above = partial2[static_cast<std::size_t>(level) + 1];
    if (!(above < best)) return;
    double offset = 0.0;
    for (int j = level + 1; j < k_dim; ++j) {
      offset += r(level, j) * static_cast<double>(a[static_cast<std::size_t>(j)]);
    }
    const double diag = r(level, level);
    std::int64_t lo = -box_radius;
    std::int64_t hi = box_radius;
    if (diag > diag_tol && std::isfinite(best)) {
      const double rem = best - above;
      const double center = -offset / diag;
      const double half_width = std::sqrt(rem) / diag;
      lo = std::max<std::int64_t>(lo, static_cast<std::int64_t>(std::ceil(center - half_width - 1e-12)));
      hi = std::min<std::int64_t>(hi, static_cast<std::int64_t>(std::floor(center + half_width + 1e-12)));
    }
    if (zero_above) lo = std::max<std::int64_t>(lo, 0);
    for (std::int64_t v = lo; v <= hi; ++v) {
      const double term = offset + diag * static_cast<double>(v);
      const double p2 = above + term * term;
      if (!(p2 < best) && !(zero_above && v == 0)) continue;
      a[static_cast<std::size_t>(level)] = v;
      partial2[static_cast<std::size_t>(level)] = p2;
      self(self, level - 1, zero_above && v == 0);
      if (best <= 0.0 && found) return;  // an exact zero cannot be beaten
    }
    a[static_cast<std::size_t>(level)] = 0;
  };

  descend(descend, k_dim - 1, true);
  if (!found) return std::nullopt;
  return best;
}

// Upper-triangular square factor of a (possibly tall or wide) real matrix,
// zero-padded so that ||H a||^2 = ||R a||^2 exactly.
RealMatrix padded_triangular_factor(const RealMatrix& h) {
  const Eigen::Index k = h.cols();
  Eigen::HouseholderQR<RealMatrix> qr(h);
  RealMatrix r = RealMatrix::Zero(k, k);
  const Eigen::Index rows = std::min(h.rows(), k);
  r.topRows(rows) =
      RealMatrix(qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>()).leftCols(k);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (r(i, i) < 0) r.row(i) = -r.row(i);
  }
  return r;
}

void validate_dmin_args(const ComplexMatrix& h, int constellation_radius) {
  if (h.rows() < 1 || h.cols() < 1 || !all_finite(h)) {
    throw std::invalid_argument("dmin: channel must be nonempty and finite");
  }
  if (h.cols() > kMaxDminComplexDim) {
    throw std::invalid_argument("dmin: complex dimension exceeds the exact enumeration limit");
  }
  if (constellation_radius < 1) {
    throw std::invalid_argument("dmin: constellation radius must be positive");
  }
}

}  // namespace

QamConstellation::QamConstellation(int r) : radius(r) {
  if (r < 1) throw std::invalid_argument("QamConstellation: radius must be positive");
}

Precoder::Precoder(int antennas, ComplexMatrix generating, double certified_delta_min,
                   bool builtin)
    : M(antennas), P(std::move(generating)), delta_min(certified_delta_min), is_builtin(builtin) {
  // builtin constructions must be unitary to near machine precision;
  // file-loaded ones get the documented 1e-9 gate
  require_precoder_invariants(P, delta_min, M, builtin ? 1e-12 : 1e-9);
}

double dmin(const ComplexMatrix& h, int constellation_radius) {
  validate_dmin_args(h, constellation_radius);
  const RealMatrix r = padded_triangular_factor(real_expansion(h));
  const auto min2 =
      pam_box_min_norm2(r, constellation_radius, std::numeric_limits<double>::infinity());
  if (!min2) {
    throw std::logic_error("dmin: search over a nonempty box found nothing");
  }
  return std::sqrt(std::max(0.0, *min2));
}

std::optional<double> dmin_squared_within(const ComplexMatrix& h, int constellation_radius,
                                          double radius2) {
  validate_dmin_args(h, constellation_radius);
  if (!(radius2 > 0.0)) return std::nullopt;
  const RealMatrix r = padded_triangular_factor(real_expansion(h));
  auto min2 = pam_box_min_norm2(r, constellation_radius, radius2);
  if (min2) *min2 = std::max(0.0, *min2);
  return min2;
}

Precoder golden_code_precoder() {
  // Codewords (1/sqrt 5) [[alpha (s1 + s2 th), alpha (s3 + s4 th)],
  //                       [i albar (s3 + s4 thbar), albar (s1 + s2 thbar)]]
  // with th = (1+sqrt 5)/2, thbar = (1-sqrt 5)/2, alpha = 1 + i (1 - th),
  // albar = 1 + i (1 - thbar); column-stacked into the generating matrix.
  const double sqrt5 = std::sqrt(5.0);
  const double theta = (1.0 + sqrt5) / 2.0;
  const double theta_bar = (1.0 - sqrt5) / 2.0;
  const std::complex<double> i_unit(0.0, 1.0);
  const std::complex<double> alpha = 1.0 + i_unit * (1.0 - theta);
  const std::complex<double> alpha_bar = 1.0 + i_unit * (1.0 - theta_bar);
  const double inv = 1.0 / sqrt5;

  ComplexMatrix p = ComplexMatrix::Zero(4, 4);
  // vec(X) rows: x11, x21, x12, x22
  p(0, 0) = inv * alpha;
  p(0, 1) = inv * alpha * theta;
  p(3, 0) = inv * alpha_bar;
  p(3, 1) = inv * alpha_bar * theta_bar;
  p(1, 2) = inv * i_unit * alpha_bar;
  p(1, 3) = inv * i_unit * alpha_bar * theta_bar;
  p(2, 2) = inv * alpha;
  p(2, 3) = inv * alpha * theta;
  return Precoder(2, std::move(p), 1.0 / 5.0, /*builtin=*/true);
}

DeltaMinSearchResult delta_min_search(const Precoder& p, int l_search) {
  if (l_search < 1) {
    throw std::invalid_argument("delta_min_search: constellation radius must be positive");
  }
  const int n_sym = p.M * p.M;
  const long side = 2L * l_search + 1;
  double tuples = 1.0;
  for (int i = 0; i < 2 * n_sym; ++i) tuples *= static_cast<double>(side);
  if (tuples > static_cast<double>(kDeltaSearchBudget)) {
    throw std::invalid_argument(
        "delta_min_search: enumeration infeasible at this size; use the sampled search");
  }

  // odometer over the 2 n_sym PAM coordinates of s
  std::vector<int> digits(static_cast<std::size_t>(2 * n_sym), -l_search);
  ComplexVector s(n_sym);
  ComplexMatrix x(p.M, p.M);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    bool zero = true;
    for (int k = 0; k < n_sym; ++k) {
      const double re = static_cast<double>(digits[static_cast<std::size_t>(2 * k)]);
      const double im = static_cast<double>(digits[static_cast<std::size_t>(2 * k + 1)]);
      s(k) = std::complex<double>(re, im);
      zero = zero && re == 0.0 && im == 0.0;
    }
    if (!zero) {
      const ComplexVector v = p.P * s;
      for (int c = 0; c < p.M; ++c) {
        x.col(c) = v.segment(static_cast<Eigen::Index>(c) * p.M, p.M);
      }
      const double det2 = std::norm(x.determinant());
      if (det2 < best) best = det2;
    }
    int pos = 0;
    while (pos < 2 * n_sym && ++digits[static_cast<std::size_t>(pos)] > l_search) {
      digits[static_cast<std::size_t>(pos)] = -l_search;
      ++pos;
    }
    if (pos == 2 * n_sym) break;
  }
  return DeltaMinSearchResult{best, /*exact=*/true};
}

DeltaMinSearchResult delta_min_search_sampled(const Precoder& p, int l_search, long samples,
                                              std::uint64_t seed) {
  if (l_search < 1 || samples < 1) {
    throw std::invalid_argument("delta_min_search_sampled: bad arguments");
  }
  const int n_sym = p.M * p.M;
  double best = std::numeric_limits<double>::infinity();
  ComplexVector s(n_sym);
  ComplexMatrix x(p.M, p.M);
  for (long t = 0; t < samples; ++t) {
    TrialRng rng(seed, static_cast<std::uint64_t>(t));
    bool zero = true;
    while (zero) {
      zero = true;
      for (int k = 0; k < n_sym; ++k) {
        const double re = static_cast<double>(rng.uniform_int(-l_search, l_search));
        const double im = static_cast<double>(rng.uniform_int(-l_search, l_search));
        s(k) = std::complex<double>(re, im);
        zero = zero && re == 0.0 && im == 0.0;
      }
    }
    const ComplexVector v = p.P * s;
    for (int c = 0; c < p.M; ++c) {
      x.col(c) = v.segment(static_cast<Eigen::Index>(c) * p.M, p.M);
    }
    best = std::min(best, std::norm(x.determinant()));
  }
  return DeltaMinSearchResult{best, /*exact=*/false};
}

ComplexMatrix codeword_from_symbols(const Precoder& p, const ComplexVector& s) {
  if (s.size() != static_cast<Eigen::Index>(p.M) * p.M) {
    throw std::invalid_argument("codeword_from_symbols: symbol vector must have length M^2");
  }
  const ComplexVector v = p.P * s;
  ComplexMatrix x(p.M, p.M);
  for (int c = 0; c < p.M; ++c) {
    x.col(c) = v.segment(static_cast<Eigen::Index>(c) * p.M, p.M);
  }
  return x;
}

double worst_case_norm_bound(double c_wi, double delta_min, int antennas,
                             int constellation_radius) {
  if (!(c_wi >= 0.0) || !(delta_min > 0.0) || antennas < 1 || constellation_radius < 1) {
    throw std::invalid_argument("worst_case_norm_bound: all inputs must be positive");
  }
  const double m = static_cast<double>(antennas);
  const double l = static_cast<double>(constellation_radius);
  const double floor_term = std::pow(delta_min, 1.0 / m) * std::exp2(c_wi / m);
  return std::max(0.0, floor_term - 2.0 * m * m * l * l);
}

Precoder load_precoder_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open precoder file: " + path);
  }
  int m = 0;
  double delta = 0.0;
  if (!(in >> m >> delta)) {
    throw std::runtime_error("precoder file: missing \"M delta_min\" header");
  }
  ComplexMatrix p = read_complex_matrix(in);
  return Precoder(m, std::move(p), delta, /*builtin=*/false);
}

}  // namespace iflab
