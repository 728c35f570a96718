#pragma once

#include "iflab/lattice.hpp"
#include "iflab/numerics.hpp"

#include <cstdint>

namespace iflab {

/// How the target integer matrix is chosen. `exact` enumerates the
/// successive minima of the decision lattice (guarded at real dimension 12);
/// `lll_approx` takes the columns of the LLL transform instead, which is
/// unimodular and cheap at any dimension but only near-optimal.
enum class SelectionMode { exact, lll_approx };

/// One full integer-forcing solve: target matrix A (rows a_k), MMSE
/// equalizer B, and the per-subchannel effective SNRs with their bottleneck.
struct IFSolution {
  IntMatrix A;             // 2M x 2M, det != 0 over the reals
  RealMatrix B;            // 2M x 2N
  RealVector snr_eff_k;    // 2M entries, positive
  double snr_eff = 0.0;    // min_k snr_eff_k
  RealVector sigma2_eff_k; // (snr/2) / snr_eff_k
  bool exact_selection = true;
};

/// Uncoded one-dimensional nested pair: fine lattice gamma Z, coarse lattice
/// gamma q Z, with gamma = sqrt(12 snr / (2 q^2)) so the dithered transmit
/// signal meets the per-dimension power snr/2 exactly.
struct UncodedLatticeParams {
  UncodedLatticeParams(int q_points, double snr_linear);
  int q;
  double gamma;
  double snr;
};

/// Rows of the returned A are the successive-minima achievers of the lattice
/// spanned by L^T, where L L^T = (I + snr Hr^T Hr)^{-1}; this minimizes
/// max_k ||L^T a_k|| over independent integer sets.
IntMatrix select_integer_matrix(const ComplexMatrix& h, double snr);

/// LLL-based stand-in for select_integer_matrix past the enumeration guard.
IntMatrix select_integer_matrix_lll(const ComplexMatrix& h, double snr);

/// MMSE-optimal equalizer B = A Hr^T (I/snr + Hr Hr^T)^{-1} for a given
/// full-rank A.
RealMatrix mmse_equalizer(const ComplexMatrix& h, double snr, const IntMatrix& a);

struct EffectiveSnr {
  RealVector per_subchannel;  // snr_eff_k = 1 / (a_k^T (I + snr Hr^T Hr)^{-1} a_k)
  double bottleneck = 0.0;
};

EffectiveSnr effective_snr(const ComplexMatrix& h, double snr, const IntMatrix& a);

/// A, B, and effective SNRs in one call.
IFSolution solve_if(const ComplexMatrix& h, double snr,
                    SelectionMode mode = SelectionMode::exact);

/// Achievable rate M log2(snr_eff) in bits per complex channel use, clamped
/// at zero for reporting.
double rate_if(double snr_eff, int antennas);

/// Same rate minus the M log2(2 pi e / 12) shaping penalty of q-ary linear
/// codes without shaping. May be negative; reported raw.
double rate_if_qary(double snr_eff, int antennas);

/// Union bound 4M exp{-(3/2) 2^{(M log2 snr_eff - R) / M}} on the slicer
/// error of uncoded transmission at total rate R. Returned unclamped; clamp
/// to [0,1] when reporting a probability.
double uncoded_error_bound(double snr_eff, double rate_if_total, int antennas);

/// (1/4M^2) min over nonzero Gaussian-integer vectors a of
/// a' (I + snr H'H) a, computed exactly by a shortest-vector call on the
/// Cholesky factor of the real expansion. Guarded at M <= 3.
double snr_eff_lower_bound(const ComplexMatrix& h, double snr);

/// (1/4M^2) min_{L >= 1} (L^2 + snr dmin^2(H, L)); the scan stops once L^2
/// alone reaches the incumbent. Guarded at M <= 3.
double dmin_based_bound(const ComplexMatrix& h, double snr);

/// Monte Carlo of uncoded IF: dithered q-PAM streams through H, MMSE
/// equalization with the optimal A, mod-lattice slicing, and a symbol-vector
/// error count. Deterministic given (seed); trials may run on several
/// workers without changing the result.
double simulate_uncoded_if(const ComplexMatrix& h, double snr, const UncodedLatticeParams& params,
                           long trials, std::uint64_t seed, int workers = 1);

/// Sub-Gaussian tail exp{-tau^2 / (2 sigma2_eff)} of a Gaussian-plus-uniform
/// mixture; the Monte Carlo tail tests use it as their ceiling.
double noise_tail_bound(double tau, double sigma2_eff);

}  // namespace iflab
