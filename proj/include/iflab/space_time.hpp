#pragma once

#include "iflab/numerics.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace iflab {

/// Symmetric QAM box {-L..L} + i{-L..L}.
struct QamConstellation {
  explicit QamConstellation(int radius);
  int radius;
  long point_count() const { return static_cast<long>(2 * radius + 1) * (2 * radius + 1); }
};

/// Generating matrix of a full-rate linear dispersion space-time code:
/// vec(X) = P s with s a vector of M^2 QAM symbols. P must be unitary and
/// carry a positive certified nonvanishing determinant.
struct Precoder {
  Precoder(int antennas, ComplexMatrix generating, double certified_delta_min,
           bool builtin);

  int M;
  ComplexMatrix P;  // M^2 x M^2
  double delta_min;
  bool is_builtin;  // false for file-loaded precoders
};

/// Exact enumeration guard: the complex dimension of the search vector in
/// dmin() may not exceed this.
inline constexpr int kMaxDminComplexDim = 6;

/// Received minimum distance min ||H a|| over nonzero a in QAM^M(L), by
/// sphere enumeration with partial-norm pruning.
double dmin(const ComplexMatrix& h, int constellation_radius);

/// Same search restricted to ||H a||^2 < radius2; empty when no nonzero
/// point beats the radius. dmin_based_bound uses this to keep the per-L
/// searches cheap.
std::optional<double> dmin_squared_within(const ComplexMatrix& h, int constellation_radius,
                                          double radius2);

/// The 2x2 golden code. Unitarity of the generating matrix is asserted at
/// construction; its nonvanishing determinant over the infinite QAM lattice
/// is 1/5.
Precoder golden_code_precoder();

struct DeltaMinSearchResult {
  double value = 0.0;
  bool exact = true;  // false for the sampled (lower-confidence) search
};

/// min |det(unvec(P s))|^2 over nonzero s in QAM^{M^2}(L), by full
/// enumeration. Throws when the enumeration is infeasible; use the sampled
/// variant for large M or L.
DeltaMinSearchResult delta_min_search(const Precoder& p, int l_search);

/// Randomized search over the same set; exact=false marks the reduced
/// confidence.
DeltaMinSearchResult delta_min_search_sampled(const Precoder& p, int l_search,
                                              long samples, std::uint64_t seed);

/// X with vec(X) = P s (column stacking). ||X||_F = ||s|| since P is unitary.
ComplexMatrix codeword_from_symbols(const Precoder& p, const ComplexVector& s);

/// Worst-case received-energy floor [delta^{1/M} 2^{c_wi/M} - 2 M^2 L^2]^+
/// shared by every nonzero codeword of an M x M perfect code over QAM(L).
double worst_case_norm_bound(double c_wi, double delta_min, int antennas,
                             int constellation_radius);

/// Precoder file: first line "M delta_min", then the M^2 x M^2 generating
/// matrix in the shared matrix text format. Non-unitary matrices are
/// rejected.
Precoder load_precoder_file(const std::string& path);

}  // namespace iflab
