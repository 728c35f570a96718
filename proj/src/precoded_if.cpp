#include "iflab/precoded_if.hpp"

#include <cmath>
#include <stdexcept>

namespace iflab {

AggregateChannel aggregate_channel(const ComplexMatrix& h, const Precoder& p,
                                   int block_extension) {
  if (block_extension < 1) {
    throw std::invalid_argument("aggregate_channel: block extension must be positive");
  }
  if (h.rows() < 1 || h.cols() < 1 || !all_finite(h)) {
    throw std::invalid_argument("aggregate_channel: channel must be nonempty and finite");
  }
  const Eigen::Index n = h.rows();
  const Eigen::Index m = h.cols();
  const Eigen::Index t = block_extension;
  if (p.P.rows() != m * t) {
    throw std::invalid_argument("aggregate_channel: precoder must be MT x MT");
  }
  ComplexMatrix block = ComplexMatrix::Zero(n * t, m * t);
  for (Eigen::Index i = 0; i < t; ++i) {
    block.block(i * n, i * m, n, m) = h;
  }
  AggregateChannel agg;
  agg.H = h;
  agg.P = p.P;
  agg.T = block_extension;
  agg.H_bar = block * p.P;
  return agg;
}

PrecodedIfResult precoded_if_solve(const ComplexMatrix& h, double snr, const Precoder& p) {
  const int m = static_cast<int>(h.cols());
  if (p.M != m) {
    throw std::invalid_argument("precoded_if_solve: precoder antenna count must match cols(H)");
  }
  const AggregateChannel agg = aggregate_channel(h, p, m);

  const int aggregate_real_dim = 2 * m * m;
  const SelectionMode mode =
      aggregate_real_dim <= kMaxEnumerationDim ? SelectionMode::exact : SelectionMode::lll_approx;

  PrecodedIfResult result;
  result.solution = solve_if(agg.H_bar, snr, mode);

  GapReport& rep = result.report;
  rep.c_wi = wi_mutual_information(h, snr);
  rep.snr_eff_aggregate = result.solution.snr_eff;
  // aggregate rate M^2 log2(snr_eff), normalized by the M channel uses it spans
  rep.r_pif = rate_if(rep.snr_eff_aggregate, m * m) / static_cast<double>(m);
  rep.gamma = constant_gap(p.delta_min, m);
  const double m_d = static_cast<double>(m);
  rep.bound_thm_snr = std::pow(p.delta_min, 1.0 / m_d) * std::exp2(rep.c_wi / m_d) /
                      (8.0 * std::pow(m_d, 6.0));
  rep.exact = result.solution.exact_selection;
  return result;
}

double constant_gap(double delta_min, int antennas) {
  if (!(delta_min > 0.0) || antennas < 1) {
    throw std::invalid_argument("constant_gap: delta_min must be positive and M >= 1");
  }
  const double m = static_cast<double>(antennas);
  return std::log2(1.0 / delta_min) + 3.0 * m * std::log2(2.0 * m * m);
}

double precoded_uncoded_error_bound(double c_wi, double r_pif, double delta_min, int antennas) {
  if (!std::isfinite(c_wi) || !std::isfinite(r_pif)) {
    throw std::invalid_argument("precoded_uncoded_error_bound: rates must be finite");
  }
  const double m = static_cast<double>(antennas);
  const double exponent = (c_wi - r_pif - constant_gap(delta_min, antennas)) / m;
  return 4.0 * m * m * std::exp(-1.5 * std::exp2(exponent));
}

RatelessDecision rateless_thresholds(const ComplexMatrix& h, double snr, const Precoder& p_2m,
                                     double rate_bits) {
  if (!(rate_bits >= 0.0)) {
    throw std::invalid_argument("rateless_thresholds: rate must be nonnegative");
  }
  const Eigen::Index n = h.rows();
  const Eigen::Index m = h.cols();
  if (p_2m.M != 2 * m) {
    throw std::invalid_argument("rateless_thresholds: precoder must target 2M antennas");
  }

  ComplexMatrix h1 = ComplexMatrix::Zero(2 * n, 2 * m);
  h1.topLeftCorner(n, m) = h;
  ComplexMatrix h2 = h1;
  h2.bottomRightCorner(n, m) = h;

  RatelessDecision decision;
  decision.rate_bits = rate_bits;
  decision.gamma = constant_gap(p_2m.delta_min, p_2m.M);
  decision.short_report = precoded_if_solve(h1, snr, p_2m).report;
  decision.long_report = precoded_if_solve(h2, snr, p_2m).report;
  decision.capacity_short = waterfilling_capacity(h1, snr).capacity_bits;
  decision.capacity_long = waterfilling_capacity(h2, snr).capacity_bits;
  decision.short_decodable = rate_bits + decision.gamma < decision.short_report.c_wi;
  decision.long_decodable = rate_bits / 2.0 + decision.gamma < decision.long_report.c_wi;
  return decision;
}

}  // namespace iflab
