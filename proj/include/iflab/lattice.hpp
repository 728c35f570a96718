#pragma once

#include "iflab/numerics.hpp"

#include <cstdint>

namespace iflab {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Exact enumeration is guarded at this dimension; the largest lattice the
/// library ever builds is the 2M^2 = 8 dimensional aggregate for M = 2.
inline constexpr int kMaxEnumerationDim = 12;
inline constexpr int kMaxTransferenceDim = 10;

/// Full-rank real lattice; the columns of `generator` span
/// Lambda = { G a : a in Z^K }.
class LatticeBasis {
 public:
  explicit LatticeBasis(RealMatrix generator);

  int dim() const { return static_cast<int>(generator_.cols()); }
  const RealMatrix& generator() const { return generator_; }

 private:
  RealMatrix generator_;
};

struct LllResult {
  LatticeBasis basis;
  IntMatrix transform;  // unimodular U with reduced generator = input generator * U
};

struct ShortestVectorResult {
  IntVector coeffs;  // canonical sign: first nonzero entry positive
  double length;
};

/// lambda_1 <= ... <= lambda_K with integer coefficient vectors achieving
/// them (columns of `achievers`). The achievers are linearly independent over
/// the rationals but need not generate the lattice.
struct MinimaProfile {
  RealVector lambdas;
  IntMatrix achievers;
};

/// Textbook LLL in double precision with the unimodular transform tracked.
/// delta must lie in (0.25, 0.9999].
LllResult lll_reduce(const LatticeBasis& basis, double delta = 0.99);

/// Exact shortest nonzero vector by Fincke-Pohst enumeration seeded with the
/// LLL-reduced shortest column (inflated by 1 + 1e-9 against boundary
/// misses). Ties resolve to the canonical coefficient vector with the
/// earliest leading nonzero, then lexicographically smallest.
ShortestVectorResult shortest_vector(const LatticeBasis& basis);

/// Exact successive minima: enumerate every lattice point inside a growing
/// radius and greedily collect linearly independent achievers by length.
MinimaProfile successive_minima(const LatticeBasis& basis);

/// Generator (G^T)^{-1} of the dual lattice.
LatticeBasis dual_basis(const LatticeBasis& basis);

/// Transference products lambda_k(G) * lambda_{K-k+1}((G^T)^{-1}), k = 1..K.
/// Banaszczyk's theorem puts every product strictly below K; a computed
/// product at or above K means the enumeration is broken and throws.
RealVector transference_margin(const LatticeBasis& basis);

}  // namespace iflab
