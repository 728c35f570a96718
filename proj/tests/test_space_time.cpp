#include "iflab/space_time.hpp"

#include "iflab/numerics.hpp"
#include "iflab/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

using namespace iflab;

TEST_CASE("QAM constellation counts its points") {
  CHECK(QamConstellation(1).point_count() == 9);
  CHECK(QamConstellation(2).point_count() == 25);
  CHECK_THROWS_AS(QamConstellation(0), std::invalid_argument);
}

TEST_CASE("dmin of the identity channel is one") {
  for (int m : {1, 2, 3}) {
    CHECK(dmin(ComplexMatrix::Identity(m, m), 1) == doctest::Approx(1.0));
    CHECK(dmin(ComplexMatrix::Identity(m, m), 3) == doctest::Approx(1.0));
  }
}

TEST_CASE("dmin vanishes when a column is dead") {
  ComplexMatrix h = ComplexMatrix::Identity(2, 2);
  h.col(1).setZero();
  CHECK(dmin(h, 1) == doctest::Approx(0.0));
  CHECK(dmin(h, 2) == doctest::Approx(0.0));
}

TEST_CASE("dmin matches the unpruned scan on random channels") {
  TrialRng rng(31, 0);
  for (int rep = 0; rep < 25; ++rep) {
    const ComplexMatrix h = oracle::random_channel(rng, 2, 2);
    CHECK(dmin(h, 2) == doctest::Approx(oracle::unpruned_dmin(h, 2)).epsilon(1e-12));
  }
}

TEST_CASE("dmin is nonincreasing in the constellation radius and homogeneous") {
  TrialRng rng(32, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const ComplexMatrix h = oracle::random_channel(rng, 2, 2);
    const double d1 = dmin(h, 1);
    const double d2 = dmin(h, 2);
    const double d3 = dmin(h, 3);
    CHECK(d2 <= d1 + 1e-12);
    CHECK(d3 <= d2 + 1e-12);
    CHECK(dmin(ComplexMatrix(2.5 * h), 2) == doctest::Approx(2.5 * d2).epsilon(1e-12));
  }
}

TEST_CASE("dmin_squared_within reports nothing when the radius is too tight") {
  const ComplexMatrix h = ComplexMatrix::Identity(2, 2);
  CHECK(!dmin_squared_within(h, 1, 0.5).has_value());
  const auto hit = dmin_squared_within(h, 1, 1.5);
  REQUIRE(hit.has_value());
  CHECK(*hit == doctest::Approx(1.0));
}

TEST_CASE("dmin dimension guard") {
  CHECK_THROWS_AS(dmin(ComplexMatrix::Identity(7, 7), 1), std::invalid_argument);
}

TEST_CASE("golden code generating matrix is unitary to machine precision") {
  const Precoder p = golden_code_precoder();
  CHECK(p.M == 2);
  CHECK(p.delta_min == doctest::Approx(0.2));
  const double residual =
      (p.P.adjoint() * p.P - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff();
  CHECK(residual < 1e-12);
}

TEST_CASE("golden code nonvanishing determinant comes out at one fifth") {
  const Precoder p = golden_code_precoder();
  const DeltaMinSearchResult r1 = delta_min_search(p, 1);
  CHECK(r1.exact);
  CHECK(r1.value == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("identity dispersion matrix has vanishing determinant") {
  // a claimed delta just gets the matrix through construction; the search
  // exposes that the code is not perfect
  const Precoder p(2, ComplexMatrix::Identity(4, 4), 1.0, /*builtin=*/true);
  const DeltaMinSearchResult r = delta_min_search(p, 1);
  CHECK(r.value == doctest::Approx(0.0));
}

TEST_CASE("sampled delta search is flagged and never undercuts the exact one") {
  const Precoder p = golden_code_precoder();
  const DeltaMinSearchResult s = delta_min_search_sampled(p, 1, 2000, 99);
  CHECK(!s.exact);
  CHECK(s.value >= 0.2 - 1e-9);
}

TEST_CASE("exact delta search refuses infeasible enumerations") {
  const Precoder p = golden_code_precoder();
  CHECK_THROWS_AS(delta_min_search(p, 50), std::invalid_argument);
}

TEST_CASE("codeword_from_symbols stacks columns and preserves energy") {
  const Precoder identity(2, ComplexMatrix::Identity(4, 4), 1.0, true);
  ComplexVector e1 = ComplexVector::Zero(4);
  e1(0) = 1.0;
  const ComplexMatrix x = codeword_from_symbols(identity, e1);
  CHECK(x(0, 0) == std::complex<double>(1.0, 0.0));
  CHECK(x.cwiseAbs().sum() == doctest::Approx(1.0));

  CHECK(codeword_from_symbols(identity, ComplexVector::Zero(4)).isZero());

  const Precoder golden = golden_code_precoder();
  TrialRng rng(33, 0);
  for (int rep = 0; rep < 20; ++rep) {
    ComplexVector s(4);
    for (int k = 0; k < 4; ++k) s(k) = std::complex<double>(rng.gaussian(), rng.gaussian());
    const ComplexMatrix cw = codeword_from_symbols(golden, s);
    CHECK(cw.squaredNorm() == doctest::Approx(s.squaredNorm()).epsilon(1e-12));
  }
  CHECK_THROWS_AS(codeword_from_symbols(golden, ComplexVector::Zero(3)), std::invalid_argument);
}

TEST_CASE("worst_case_norm_bound arithmetic") {
  CHECK(worst_case_norm_bound(1.0, 1.0, 2, 3) == 0.0);  // clamp: 2 M^2 L^2 dominates
  CHECK(worst_case_norm_bound(3.0, 1.0, 1, 1) == doctest::Approx(6.0));
}

TEST_CASE("golden codewords respect the worst-case received energy floor") {
  const Precoder golden = golden_code_precoder();
  TrialRng rng(34, 0);
  for (int rep = 0; rep < 60; ++rep) {
    const ComplexMatrix h = oracle::random_channel(rng, 2, 2);
    const double snr = std::exp(rng.uniform(std::log(1.0), std::log(1e4)));
    const double c_wi = wi_mutual_information(h, snr);
    ComplexVector s(4);
    bool zero = true;
    while (zero) {
      zero = true;
      for (int k = 0; k < 4; ++k) {
        const double re = static_cast<double>(rng.uniform_int(-1, 1));
        const double im = static_cast<double>(rng.uniform_int(-1, 1));
        s(k) = std::complex<double>(re, im);
        zero = zero && re == 0.0 && im == 0.0;
      }
    }
    const ComplexMatrix x = codeword_from_symbols(golden, s);
    const double energy = snr * (h * x).squaredNorm();
    CHECK(energy >= worst_case_norm_bound(c_wi, golden.delta_min, 2, 1) - 1e-9);
  }
}

TEST_CASE("corollary inequality: aggregate dmin vs the norm floor") {
  const Precoder golden = golden_code_precoder();
  TrialRng rng(35, 0);
  for (int rep = 0; rep < 8; ++rep) {
    const ComplexMatrix h = oracle::random_channel(rng, 2, 2);
    const double snr = std::exp(rng.uniform(std::log(1.0), std::log(100.0)));
    const double c_wi = wi_mutual_information(h, snr);
    ComplexMatrix block = ComplexMatrix::Zero(4, 4);
    block.topLeftCorner(2, 2) = h;
    block.bottomRightCorner(2, 2) = h;
    const ComplexMatrix aggregate = block * golden.P;
    for (int l : {1, 2}) {
      const double d = dmin(aggregate, l);
      CHECK(snr * d * d >= worst_case_norm_bound(c_wi, golden.delta_min, 2, l) - 1e-9);
    }
  }
}

TEST_CASE("precoder files load and enforce unitarity") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "iflab_precoder_test";
  fs::create_directories(dir);

  const Precoder golden = golden_code_precoder();
  const fs::path good = dir / "golden.txt";
  {
    std::ofstream out(good);
    out << "2 0.2\n";
    write_complex_matrix(out, golden.P);
  }
  const Precoder loaded = load_precoder_file(good.string());
  CHECK(loaded.M == 2);
  CHECK(!loaded.is_builtin);
  CHECK((loaded.P - golden.P).cwiseAbs().maxCoeff() < 1e-15);

  const fs::path bad = dir / "skewed.txt";
  {
    ComplexMatrix p = golden.P;
    p(0, 0) += 0.05;  // break unitarity well past the 1e-9 gate
    std::ofstream out(bad);
    out << "2 0.2\n";
    write_complex_matrix(out, p);
  }
  CHECK_THROWS_AS(load_precoder_file(bad.string()), std::invalid_argument);

  const fs::path negative = dir / "negative_delta.txt";
  {
    std::ofstream out(negative);
    out << "2 -0.1\n";
    write_complex_matrix(out, golden.P);
  }
  CHECK_THROWS_AS(load_precoder_file(negative.string()), std::invalid_argument);
  CHECK_THROWS(load_precoder_file((dir / "missing.txt").string()));
}
