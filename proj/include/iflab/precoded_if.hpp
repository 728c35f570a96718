#pragma once

#include "iflab/integer_forcing.hpp"
#include "iflab/space_time.hpp"

namespace iflab {

/// T channel uses of H fused with a precoder: H_bar = (I_T kron H) P.
struct AggregateChannel {
  ComplexMatrix H;      // original N x M channel
  ComplexMatrix P;      // MT x MT unitary precoder
  int T = 0;
  ComplexMatrix H_bar;  // NT x MT
};

AggregateChannel aggregate_channel(const ComplexMatrix& h, const Precoder& p, int block_extension);

/// Outcome of one precoded integer-forcing solve, with both the worst-case
/// constant gap and the empirically achieved gap recoverable from it.
struct GapReport {
  double c_wi = 0.0;               // white-input mutual information of H
  double r_pif = 0.0;              // achieved rate after the 1/M normalization
  double gamma = 0.0;              // worst-case constant gap for this precoder
  double snr_eff_aggregate = 0.0;  // bottleneck effective SNR on H_bar
  double bound_thm_snr = 0.0;      // (1/8M^6) delta^{1/M} 2^{c_wi/M}
  bool exact = true;               // exact A selection (vs LLL approximation)
};

struct PrecodedIfResult {
  GapReport report;
  IFSolution solution;
};

/// Runs integer forcing on the aggregate channel (I_M kron H) P. The target
/// matrix is selected exactly up to real dimension 12 (M = 2 aggregates);
/// beyond that an LLL approximation is used and the report flags it.
PrecodedIfResult precoded_if_solve(const ComplexMatrix& h, double snr, const Precoder& p);

/// Constant gap log2(1/delta_min) + 3M log2(2M^2) in bits.
double constant_gap(double delta_min, int antennas);

/// Uncoded error ceiling 4M^2 exp{-(3/2) 2^{(c_wi - r - Gamma)/M}} for
/// precoded IF. Returned unclamped.
double precoded_uncoded_error_bound(double c_wi, double r_pif, double delta_min, int antennas);

/// Two-rate rateless decision: the channel is embedded as
/// H1 = [[H,0],[0,0]] (short code, rate R) and H2 = [[H,0],[0,H]] (long
/// code, rate R/2), both driven through a perfect precoder for 2M antennas.
/// Decodability flags use the constant-gap sufficient condition
/// R + Gamma(delta, 2M) < C_WI(H1) (resp. R/2 + ... < C_WI(H2)); the
/// water-filling capacities and achieved rates are reported alongside so a
/// caller can apply a different stopping rule.
struct RatelessDecision {
  GapReport short_report;
  GapReport long_report;
  double capacity_short = 0.0;  // water-filling capacity of H1
  double capacity_long = 0.0;   // water-filling capacity of H2
  double rate_bits = 0.0;
  double gamma = 0.0;  // Gamma(delta_min, 2M)
  bool short_decodable = false;
  bool long_decodable = false;
};

RatelessDecision rateless_thresholds(const ComplexMatrix& h, double snr, const Precoder& p_2m,
                                     double rate_bits);

}  // namespace iflab
