#include "iflab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace iflab {

namespace {

constexpr double kRadiusInflation2 = 1.0 + 3e-9;  // applied to squared radii
constexpr std::size_t kNodeBudget = 80'000'000;
constexpr std::size_t kPointBudget = 4'000'000;

int first_nonzero(const IntVector& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != 0) return static_cast<int>(i);
  }
  return static_cast<int>(a.size());
}

void canonicalize_sign(IntVector& a) {
  const int fnz = first_nonzero(a);
  if (fnz < a.size() && a(fnz) < 0) a = -a;
}

// Deterministic order used for tie-breaking among equal-length vectors:
// earliest leading nonzero first, then plain lexicographic. Reproduces the
// unit-vector ordering e1, e2, ... on the integer lattice.
bool canonical_less(const IntVector& x, const IntVector& y) {
  const int fx = first_nonzero(x);
  const int fy = first_nonzero(y);
  if (fx != fy) return fx < fy;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) != y(i)) return x(i) < y(i);
  }
  return false;
}

struct LatticePoint {
  IntVector coeffs;
  double norm2;
};

// Upper-triangular factor R with R^T R = G^T G and positive diagonal, so
// that ||G a|| = ||R a|| for every coefficient vector.
RealMatrix triangular_factor(const RealMatrix& g) {
  Eigen::HouseholderQR<RealMatrix> qr(g);
  RealMatrix r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    if (r(i, i) < 0) r.row(i) = -r.row(i);
    if (!(r(i, i) > 0)) {
      throw std::invalid_argument("lattice enumeration: rank-deficient basis");
    }
  }
  return r;
}

// Fincke-Pohst: collects every nonzero a with ||R a||^2 <= radius2, one
// representative per +-a pair (the highest-index nonzero entry is kept
// positive). Depth-first over coefficient levels K-1 .. 0.
std::vector<LatticePoint> enumerate_within(const RealMatrix& r, double radius2) {
  const int k_dim = static_cast<int>(r.cols());
  std::vector<LatticePoint> points;
  IntVector a = IntVector::Zero(k_dim);
  std::size_t nodes = 0;

  // partial2[i] = contribution of levels > i; filled on the way down.
  std::vector<double> partial2(static_cast<std::size_t>(k_dim) + 1, 0.0);

  auto descend = [&](auto&& self, int level, bool zero_above) -> void {
    if (level < 0) {
      if (!zero_above) {
        points.push_back({a, partial2[0]});
        if (points.size() > kPointBudget) {
          throw std::runtime_error("lattice enumeration: point budget exceeded");
        }
      }
      return;
    }
    const double rem = radius2 - partial2[static_cast<std::size_t>(level) + 1];
    if (rem < 0) return;
    double offset = 0.0;
    for (int j = level + 1; j < k_dim; ++j) {
      offset += r(level, j) * static_cast<double>(a(j));
    }
    const double diag = r(level, level);
    const double center = -offset / diag;
    const double half_width = std::sqrt(rem) / diag;
    const std::int64_t lo_full = static_cast<std::int64_t>(std::ceil(center - half_width - 1e-12));
    const std::int64_t hi = static_cast<std::int64_t>(std::floor(center + half_width + 1e-12));
    const std::int64_t lo = zero_above ? std::max<std::int64_t>(0, lo_full) : lo_full;
    for (std::int64_t v = lo; v <= hi; ++v) {
      if (++nodes > kNodeBudget) {
        throw std::runtime_error("lattice enumeration: node budget exceeded");
      }
      const double term = offset + diag * static_cast<double>(v);
      const double p2 = partial2[static_cast<std::size_t>(level) + 1] + term * term;
      if (p2 > radius2) continue;
      a(level) = v;
      partial2[static_cast<std::size_t>(level)] = p2;
      self(self, level - 1, zero_above && v == 0);
    }
    a(level) = 0;
  };

  descend(descend, k_dim - 1, true);
  return points;
}

// Greedy collection of linearly independent achievers from points sorted by
// (norm, canonical order). Independence is tested on the residual after
// projecting out the span collected so far.
bool greedy_independent(const std::vector<const LatticePoint*>& sorted, int k_dim,
                        MinimaProfile& out) {
  std::vector<RealVector> ortho;
  out.lambdas = RealVector::Zero(k_dim);
  out.achievers = IntMatrix::Zero(k_dim, k_dim);
  int found = 0;
  for (const LatticePoint* p : sorted) {
    RealVector v = p->coeffs.cast<double>();
    const double orig = v.norm();
    for (const RealVector& q : ortho) {
      v -= q.dot(v) * q;
    }
    if (v.norm() <= 1e-8 * orig) continue;  // dependent on the collected set
    ortho.push_back(v.normalized());
    out.achievers.col(found) = p->coeffs;
    out.lambdas(found) = std::sqrt(p->norm2);
    if (++found == k_dim) return true;
  }
  return false;
}

}  // namespace

LatticeBasis::LatticeBasis(RealMatrix generator) : generator_(std::move(generator)) {
  if (generator_.rows() < 1 || generator_.rows() != generator_.cols()) {
    throw std::invalid_argument("LatticeBasis: generator must be square and nonempty");
  }
  if (!all_finite(generator_)) {
    throw std::invalid_argument("LatticeBasis: generator has non-finite entries");
  }
  const double det = Eigen::PartialPivLU<RealMatrix>(generator_).determinant();
  if (!(std::abs(det) > 1e-12)) {
    throw std::invalid_argument("LatticeBasis: generator is rank deficient (|det| <= 1e-12)");
  }
}

LllResult lll_reduce(const LatticeBasis& basis, double delta) {
  if (!(delta > 0.25 && delta <= 0.9999)) {
    throw std::invalid_argument("lll_reduce: delta must lie in (0.25, 0.9999]");
  }
  const int k_dim = basis.dim();
  RealMatrix b = basis.generator();
  IntMatrix u = IntMatrix::Identity(k_dim, k_dim);

  RealMatrix mu = RealMatrix::Zero(k_dim, k_dim);
  RealVector star_norm2 = RealVector::Zero(k_dim);
  RealMatrix bstar = RealMatrix::Zero(b.rows(), k_dim);

  auto gram_schmidt = [&]() {
    for (int i = 0; i < k_dim; ++i) {
      RealVector v = b.col(i);
      for (int j = 0; j < i; ++j) {
        mu(i, j) = b.col(i).dot(bstar.col(j)) / star_norm2(j);
        v -= mu(i, j) * bstar.col(j);
      }
      bstar.col(i) = v;
      star_norm2(i) = v.squaredNorm();
      if (!(star_norm2(i) > 0)) {
        throw std::invalid_argument("lll_reduce: rank-deficient basis");
      }
    }
  };

  gram_schmidt();
  int k = 1;
  long iterations = 0;
  while (k < k_dim) {
    if (++iterations > 200'000) {
      throw std::runtime_error("lll_reduce: iteration budget exceeded");
    }
    for (int j = k - 1; j >= 0; --j) {
      const auto q = static_cast<std::int64_t>(std::llround(mu(k, j)));
      if (q != 0) {
        b.col(k) -= static_cast<double>(q) * b.col(j);
        u.col(k) -= q * u.col(j);
        gram_schmidt();
      }
    }
    if (star_norm2(k) >= (delta - mu(k, k - 1) * mu(k, k - 1)) * star_norm2(k - 1)) {
      ++k;
    } else {
      b.col(k).swap(b.col(k - 1));
      u.col(k).swap(u.col(k - 1));
      gram_schmidt();
      k = std::max(k - 1, 1);
    }
  }
  return LllResult{LatticeBasis(std::move(b)), std::move(u)};
}

ShortestVectorResult shortest_vector(const LatticeBasis& basis) {
  if (basis.dim() > kMaxEnumerationDim) {
    throw std::invalid_argument("shortest_vector: dimension exceeds the exact enumeration limit");
  }
  const LllResult reduced = lll_reduce(basis);
  const RealMatrix& g = reduced.basis.generator();
  const RealMatrix r = triangular_factor(g);

  double radius2 = g.colwise().squaredNorm().minCoeff() * kRadiusInflation2;
  const std::vector<LatticePoint> points = enumerate_within(r, radius2);
  if (points.empty()) {
    throw std::runtime_error("shortest_vector: enumeration returned no points");
  }

  double best2 = std::numeric_limits<double>::infinity();
  for (const LatticePoint& p : points) best2 = std::min(best2, p.norm2);

  // map candidates back to coefficients of the original basis, then apply
  // the canonical tie-break among near-equal lengths
  bool have = false;
  IntVector best_coeffs;
  for (const LatticePoint& p : points) {
    if (p.norm2 > best2 * kRadiusInflation2) continue;
    IntVector coeffs = reduced.transform * p.coeffs;
    canonicalize_sign(coeffs);
    if (!have || canonical_less(coeffs, best_coeffs)) {
      best_coeffs = coeffs;
      have = true;
    }
  }
  return ShortestVectorResult{best_coeffs, std::sqrt(best2)};
}

MinimaProfile successive_minima(const LatticeBasis& basis) {
  if (basis.dim() > kMaxEnumerationDim) {
    throw std::invalid_argument("successive_minima: dimension exceeds the exact enumeration limit");
  }
  const int k_dim = basis.dim();
  const LllResult reduced = lll_reduce(basis);
  const RealMatrix& g = reduced.basis.generator();
  const RealMatrix r = triangular_factor(g);

  const RealVector col_norm2 = g.colwise().squaredNorm();
  // The K reduced columns are independent lattice vectors, so lambda_K is at
  // most the largest column norm; start smaller and grow on demand.
  const double radius2_cap = col_norm2.maxCoeff() * kRadiusInflation2;
  double radius2 = col_norm2.minCoeff() * kRadiusInflation2;

  for (;;) {
    std::vector<LatticePoint> points = enumerate_within(r, radius2);
    for (LatticePoint& p : points) {
      p.coeffs = reduced.transform * p.coeffs;
      canonicalize_sign(p.coeffs);
    }
    std::vector<const LatticePoint*> sorted;
    sorted.reserve(points.size());
    for (const LatticePoint& p : points) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](const LatticePoint* x, const LatticePoint* y) {
      if (x->norm2 != y->norm2) return x->norm2 < y->norm2;
      return canonical_less(x->coeffs, y->coeffs);
    });

    MinimaProfile profile;
    if (greedy_independent(sorted, k_dim, profile)) {
      return profile;
    }
    if (radius2 >= radius2_cap) {
      throw std::runtime_error("successive_minima: failed to collect a full independent set");
    }
    radius2 = std::min(radius2 * 2.25, radius2_cap);
  }
}

LatticeBasis dual_basis(const LatticeBasis& basis) {
  const int k_dim = basis.dim();
  const RealMatrix gt = basis.generator().transpose();
  Eigen::PartialPivLU<RealMatrix> lu(gt);
  RealMatrix dual = lu.solve(RealMatrix::Identity(k_dim, k_dim));
  if (!all_finite(dual)) {
    throw std::invalid_argument("dual_basis: generator is numerically singular");
  }
  return LatticeBasis(std::move(dual));
}

RealVector transference_margin(const LatticeBasis& basis) {
  const int k_dim = basis.dim();
  if (k_dim > kMaxTransferenceDim) {
    throw std::invalid_argument("transference_margin: dimension exceeds the two-enumeration limit");
  }
  const MinimaProfile primal = successive_minima(basis);
  const MinimaProfile dual = successive_minima(dual_basis(basis));
  RealVector products(k_dim);
  for (int k = 0; k < k_dim; ++k) {
    products(k) = primal.lambdas(k) * dual.lambdas(k_dim - 1 - k);
    if (!(products(k) < static_cast<double>(k_dim))) {
      throw std::logic_error("transference_margin: product at or above K contradicts the transference bound");
    }
  }
  return products;
}

}  // namespace iflab
