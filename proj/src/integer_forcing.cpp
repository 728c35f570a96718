#include "iflab/integer_forcing.hpp"

#include "iflab/rng.hpp"
#include "iflab/space_time.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

namespace iflab {

namespace {

void require_positive_snr(double snr, const char* where) {
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw std::invalid_argument(std::string(where) + ": snr must be positive and finite");
  }
}

void require_full_rank(const IntMatrix& a, const char* where) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw std::invalid_argument(std::string(where) + ": A must be square");
  }
  const double det = Eigen::PartialPivLU<RealMatrix>(a.cast<double>()).determinant();
  if (!(std::abs(det) > 1e-9)) {
    throw std::invalid_argument(std::string(where) + ": A is rank deficient");
  }
}

// Generator of the decision lattice Lambda(L^T), rescaled to unit
// determinant so enumeration stays inside the LatticeBasis rank guard even
// at very high snr. Minima scale back exactly by homogeneity.
struct ScaledDecisionLattice {
  RealMatrix generator;
  double scale;  // generator = scale * L^T
};

ScaledDecisionLattice decision_lattice(const ComplexMatrix& h, double snr) {
  const RealMatrix l = cholesky_inv_gram(real_expansion(h), snr);
  RealMatrix g = l.transpose();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    log_det += std::log(std::abs(g(i, i)));  // triangular
  }
  const double scale = std::exp(-log_det / static_cast<double>(g.rows()));
  g *= scale;
  return {std::move(g), scale};
}

double mod_interval(double x, double period) {
  // reduce into [-period/2, period/2), half-open on the right
  return x - period * std::floor(x / period + 0.5);
}

long long canonical_symbol(long long v, int q, long long lo) {
  long long r = (v - lo) % q;
  if (r < 0) r += q;
  return r + lo;
}

}  // namespace

UncodedLatticeParams::UncodedLatticeParams(int q_points, double snr_linear)
    : q(q_points), gamma(std::sqrt(12.0 * snr_linear / (2.0 * q_points * q_points))),
      snr(snr_linear) {
  if (q < 2) throw std::invalid_argument("UncodedLatticeParams: q must be at least 2");
  require_positive_snr(snr_linear, "UncodedLatticeParams");
  const double coarse_power = gamma * gamma * q * q / 12.0;  // dithered transmit power
  if (std::abs(coarse_power - snr / 2.0) > 1e-9 * std::max(1.0, snr)) {
    throw std::logic_error("UncodedLatticeParams: power constraint violated");
  }
}

IntMatrix select_integer_matrix(const ComplexMatrix& h, double snr) {
  require_positive_snr(snr, "select_integer_matrix");
  if (2 * h.cols() > kMaxEnumerationDim) {
    throw std::invalid_argument("select_integer_matrix: 2M exceeds the exact enumeration limit");
  }
  const ScaledDecisionLattice lat = decision_lattice(h, snr);
  const MinimaProfile minima = successive_minima(LatticeBasis(lat.generator));
  return minima.achievers.transpose();
}

IntMatrix select_integer_matrix_lll(const ComplexMatrix& h, double snr) {
  require_positive_snr(snr, "select_integer_matrix_lll");
  const ScaledDecisionLattice lat = decision_lattice(h, snr);
  const LllResult reduced = lll_reduce(LatticeBasis(lat.generator));
  const Eigen::Index k = reduced.transform.cols();

  // order the transform columns by the length of the reduced vector they
  // produce, so row k of A keeps the bottleneck interpretation
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
  const RealVector norms = reduced.basis.generator().colwise().norm();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return norms(x) < norms(y); });

  IntMatrix a(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    IntVector col = reduced.transform.col(order[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j) {
      if (col(j) != 0) {
        if (col(j) < 0) col = -col;
        break;
      }
    }
    a.row(i) = col.transpose();
  }
  return a;
}

RealMatrix mmse_equalizer(const ComplexMatrix& h, double snr, const IntMatrix& a) {
  require_positive_snr(snr, "mmse_equalizer");
  require_full_rank(a, "mmse_equalizer");
  const RealMatrix hr = real_expansion(h);
  if (a.rows() != hr.cols()) {
    throw std::invalid_argument("mmse_equalizer: A must be 2M x 2M");
  }
  const Eigen::Index n2 = hr.rows();
  const RealMatrix receive_gram =
      RealMatrix::Identity(n2, n2) / snr + hr * hr.transpose();
  return a.cast<double>() * hr.transpose() * receive_gram.llt().solve(RealMatrix::Identity(n2, n2));
}

EffectiveSnr effective_snr(const ComplexMatrix& h, double snr, const IntMatrix& a) {
  require_positive_snr(snr, "effective_snr");
  require_full_rank(a, "effective_snr");
  const RealMatrix hr = real_expansion(h);
  if (a.rows() != hr.cols()) {
    throw std::invalid_argument("effective_snr: A must be 2M x 2M");
  }
  const Eigen::Index m2 = hr.cols();
  const RealMatrix gram = RealMatrix::Identity(m2, m2) + snr * (hr.transpose() * hr);
  const Eigen::LLT<RealMatrix> llt(gram);

  EffectiveSnr out;
  out.per_subchannel = RealVector(m2);
  out.bottleneck = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < m2; ++k) {
    const RealVector ak = a.row(k).transpose().cast<double>();
    const double quad = ak.dot(llt.solve(ak));
    if (!(quad > 0.0) || !std::isfinite(quad)) {
      throw std::runtime_error("effective_snr: quadratic form is not positive");
    }
    out.per_subchannel(k) = 1.0 / quad;
    out.bottleneck = std::min(out.bottleneck, out.per_subchannel(k));
  }
  return out;
}

IFSolution solve_if(const ComplexMatrix& h, double snr, SelectionMode mode) {
  IFSolution sol;
  sol.exact_selection = mode == SelectionMode::exact;
  sol.A = sol.exact_selection ? select_integer_matrix(h, snr)
                              : select_integer_matrix_lll(h, snr);
  sol.B = mmse_equalizer(h, snr, sol.A);
  const EffectiveSnr eff = effective_snr(h, snr, sol.A);
  sol.snr_eff_k = eff.per_subchannel;
  sol.snr_eff = eff.bottleneck;
  sol.sigma2_eff_k = (snr / 2.0) * sol.snr_eff_k.cwiseInverse();
  return sol;
}

double rate_if(double snr_eff, int antennas) {
  if (!(snr_eff > 0.0) || antennas < 1) {
    throw std::invalid_argument("rate_if: snr_eff must be positive");
  }
  return std::max(0.0, static_cast<double>(antennas) * std::log2(snr_eff));
}

double rate_if_qary(double snr_eff, int antennas) {
  const double shaping = std::log2(2.0 * std::numbers::pi * std::numbers::e / 12.0);
  return rate_if(snr_eff, antennas) - static_cast<double>(antennas) * shaping;
}

double uncoded_error_bound(double snr_eff, double rate_if_total, int antennas) {
  if (!(snr_eff > 0.0) || !(rate_if_total >= 0.0) || antennas < 1) {
    throw std::invalid_argument("uncoded_error_bound: bad arguments");
  }
  const double m = static_cast<double>(antennas);
  const double exponent = (m * std::log2(snr_eff) - rate_if_total) / m;
  return 4.0 * m * std::exp(-1.5 * std::exp2(exponent));
}

double snr_eff_lower_bound(const ComplexMatrix& h, double snr) {
  require_positive_snr(snr, "snr_eff_lower_bound");
  const Eigen::Index m = h.cols();
  if (m > 3) {
    throw std::invalid_argument("snr_eff_lower_bound: guarded at M <= 3");
  }
  const RealMatrix hr = real_expansion(h);
  const Eigen::Index m2 = hr.cols();
  const RealMatrix gram = RealMatrix::Identity(m2, m2) + snr * (hr.transpose() * hr);
  const Eigen::LLT<RealMatrix> llt(gram);
  // ||C^T a||^2 = a^T gram a, so the minimum quadratic form is the squared
  // first minimum of the lattice spanned by C^T
  RealMatrix g = RealMatrix(llt.matrixL()).transpose();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) log_det += std::log(std::abs(g(i, i)));
  const double scale = std::exp(-log_det / static_cast<double>(g.rows()));
  const ShortestVectorResult sv = shortest_vector(LatticeBasis(scale * g));
  const double lambda1 = sv.length / scale;
  const double m_d = static_cast<double>(m);
  return lambda1 * lambda1 / (4.0 * m_d * m_d);
}

double dmin_based_bound(const ComplexMatrix& h, double snr) {
  require_positive_snr(snr, "dmin_based_bound");
  const Eigen::Index m = h.cols();
  if (m > 3) {
    throw std::invalid_argument("dmin_based_bound: guarded at M <= 3");
  }
  double best = std::numeric_limits<double>::infinity();
  for (int l = 1;; ++l) {
    const double l2 = static_cast<double>(l) * l;
    if (l2 >= best) break;  // L^2 alone already exceeds the incumbent
    const double radius2 = (best - l2) / snr;
    const auto d2 = dmin_squared_within(h, l, radius2);
    if (d2) best = std::min(best, l2 + snr * *d2);
  }
  const double m_d = static_cast<double>(m);
  return best / (4.0 * m_d * m_d);
}

double simulate_uncoded_if(const ComplexMatrix& h, double snr, const UncodedLatticeParams& params,
                           long trials, std::uint64_t seed, int workers) {
  require_positive_snr(snr, "simulate_uncoded_if");
  if (trials < 1) throw std::invalid_argument("simulate_uncoded_if: trials must be at least 1");
  if (std::abs(params.snr - snr) > 1e-9 * std::max(1.0, snr)) {
    throw std::invalid_argument("simulate_uncoded_if: params were built for a different snr");
  }

  const IntMatrix a_int = select_integer_matrix(h, snr);
  const RealMatrix a = a_int.cast<double>();
  const RealMatrix b = mmse_equalizer(h, snr, a_int);
  const RealMatrix hr = real_expansion(h);
  const Eigen::Index m2 = hr.cols();
  const Eigen::Index n2 = hr.rows();

  const int q = params.q;
  const double gamma = params.gamma;
  const double period = gamma * static_cast<double>(q);
  const long long sym_lo = -static_cast<long long>((q + 1) / 2) + 1;  // -ceil(q/2)+1
  const long long sym_hi = q / 2;                                     // floor(q/2)

  auto run_trial = [&](long trial) -> bool {
    TrialRng rng(seed, static_cast<std::uint64_t>(trial));
    std::vector<long long> symbols(static_cast<std::size_t>(m2));
    RealVector dither(m2);
    RealVector x(m2);
    for (Eigen::Index k = 0; k < m2; ++k) {
      symbols[static_cast<std::size_t>(k)] = rng.uniform_int(sym_lo, sym_hi);
    }
    for (Eigen::Index k = 0; k < m2; ++k) {
      dither(k) = rng.uniform(-period / 2.0, period / 2.0);
    }
    for (Eigen::Index k = 0; k < m2; ++k) {
      const double t = gamma * static_cast<double>(symbols[static_cast<std::size_t>(k)]);
      x(k) = mod_interval(t - dither(k), period);
    }
    RealVector noise(n2);
    for (Eigen::Index k = 0; k < n2; ++k) {
      noise(k) = rng.gaussian() * std::numbers::sqrt2 / 2.0;  // variance 1/2 per real dim
    }
    const RealVector y = hr * x + noise;
    const RealVector equalized = b * y + a * dither;
    // sub-channel k carries the integer combination (A u)_k of the stream
    // symbols, reduced to the coarse lattice
    for (Eigen::Index k = 0; k < m2; ++k) {
      const double folded = mod_interval(equalized(k), period);
      const long long sliced = std::llround(folded / gamma);
      const long long decided = canonical_symbol(sliced, q, sym_lo);
      long long combination = 0;
      for (Eigen::Index j = 0; j < m2; ++j) {
        combination += a_int(k, j) * symbols[static_cast<std::size_t>(j)];
      }
      if (decided != canonical_symbol(combination, q, sym_lo)) return true;
    }
    return false;
  };

  const int used_workers = std::max(1, workers);
  std::atomic<long> next{0};
  std::vector<long> errors(static_cast<std::size_t>(used_workers), 0);
  auto work = [&](int w) {
    long local = 0;
    for (;;) {
      const long t = next.fetch_add(1, std::memory_order_relaxed);
      if (t >= trials) break;
      if (run_trial(t)) ++local;
    }
    errors[static_cast<std::size_t>(w)] = local;
  };
  if (used_workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(used_workers));
    for (int w = 0; w < used_workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  long total = 0;
  for (long e : errors) total += e;
  return static_cast<double>(total) / static_cast<double>(trials);
}

double noise_tail_bound(double tau, double sigma2_eff) {
  if (!(tau >= 0.0) || !(sigma2_eff > 0.0)) {
    throw std::invalid_argument("noise_tail_bound: tau must be nonnegative and sigma2 positive");
  }
  return std::exp(-tau * tau / (2.0 * sigma2_eff));
}

}  // namespace iflab
