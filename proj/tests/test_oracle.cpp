#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "unext/divergence.hpp"
#include "unext/oracle.hpp"
#include "unext/quantum.hpp"

using namespace unext;
using namespace unext::oracle;

TEST_CASE("identity channel value") {
  CHECK(identity_unext(2).value_bits == doctest::Approx(1.0));
  CHECK(identity_unext(3).value_bits == doctest::Approx(std::log2(3.0)));
  CHECK(identity_unext(4).value_bits == doctest::Approx(2.0));
  CHECK(identity_unext(2).is_exact);
  CHECK_THROWS_AS(identity_unext(1), InvalidDimension);
}

TEST_CASE("erasure order-one bound") {
  SUBCASE("frozen values") {
    OracleValue at0 = erasure_bs_bound(2, 0.0);
    CHECK(at0.value_bits == doctest::Approx(1.0));
    CHECK(at0.is_exact);

    CHECK(erasure_bs_bound(2, 0.2).value_bits ==
          doctest::Approx(0.8 - 0.5 * std::log2(1.6)).epsilon(1e-12));
    CHECK(erasure_bs_bound(2, 0.2).value_bits == doctest::Approx(0.46096).epsilon(1e-4));

    CHECK(erasure_bs_bound(2, 0.4).value_bits ==
          doctest::Approx(0.1 * std::log2(1.5)).epsilon(1e-12));
    CHECK(erasure_bs_bound(2, 0.4).value_bits == doctest::Approx(0.05850).epsilon(1e-3));
  }

  SUBCASE("zero in the antidegradable region") {
    for (double p : {0.51, 0.75, 1.0}) {
      OracleValue v = erasure_bs_bound(2, p);
      CHECK(v.value_bits == 0.0);
      CHECK(v.is_exact);
    }
  }

  SUBCASE("continuity at the branch point") {
    for (int d : {2, 3, 5}) {
      double p0 = 1.0 / (d + 1.0);
      double lo = erasure_bs_bound(d, p0 - 1e-12).value_bits;
      double hi = erasure_bs_bound(d, p0 + 1e-12).value_bits;
      CHECK(std::abs(lo - hi) < 1e-9);
    }
  }

  SUBCASE("rejects parameters outside the unit interval") {
    CHECK_THROWS_AS(erasure_bs_bound(2, -0.1), quantum::InvalidProbability);
    CHECK_THROWS_AS(erasure_bs_bound(2, 1.1), quantum::InvalidProbability);
  }
}

TEST_CASE("erasure variable-order bound") {
  SUBCASE("identity endpoint for every order") {
    for (double alpha : {0.2, 0.5, 0.99, 1.5, 2.0}) {
      CHECK(erasure_alpha_bound(2, 0.0, alpha).value_bits ==
            doctest::Approx(1.0).epsilon(1e-9));
      CHECK(erasure_alpha_bound(3, 0.0, alpha).value_bits ==
            doctest::Approx(std::log2(3.0)).epsilon(1e-9));
    }
  }

  SUBCASE("symmetric point vanishes for every order") {
    for (double alpha : {0.1, 0.5, 0.9, 1.3, 2.0}) {
      CHECK(std::abs(erasure_alpha_bound(2, 0.5, alpha).value_bits) < 1e-12);
    }
  }

  SUBCASE("order-one limit matches the order-one bound") {
    double target = erasure_bs_bound(2, 0.4).value_bits;
    double lo = erasure_alpha_bound(2, 0.4, 1.0 - 1e-4).value_bits;
    double hi = erasure_alpha_bound(2, 0.4, 1.0 + 1e-4).value_bits;
    CHECK(std::abs(0.5 * (lo + hi) - target) < 1e-6);
    CHECK(std::abs(lo - target) < 1e-4);
    CHECK(std::abs(hi - target) < 1e-4);

    target = erasure_bs_bound(2, 0.2).value_bits;
    lo = erasure_alpha_bound(2, 0.2, 1.0 - 1e-4).value_bits;
    hi = erasure_alpha_bound(2, 0.2, 1.0 + 1e-4).value_bits;
    CHECK(std::abs(0.5 * (lo + hi) - target) < 1e-6);
  }

  SUBCASE("small order drives the bound to zero") {
    OracleValue v = erasure_alpha_bound(2, 0.3, 1e-3);
    CHECK(v.value_bits > 0.0);
    CHECK(v.value_bits < 1e-3);
    CHECK(erasure_alpha_bound(2, 0.3, 1e-6).value_bits < 1e-6);
  }

  SUBCASE("nondecreasing in the order") {
    const std::vector<double> grid = {0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9,
                                      0.99, 1.01, 1.2, 1.5, 1.8, 2.0};
    for (int d : {2, 3}) {
      for (double p : {0.05, 0.2, 0.3, 0.45, 0.5}) {
        double prev = -1.0;
        for (double alpha : grid) {
          double cur = erasure_alpha_bound(d, p, alpha).value_bits;
          CHECK(cur >= prev - 1e-9);
          CHECK(cur >= 0.0);
          prev = cur;
        }
      }
    }
  }

  SUBCASE("domain checks") {
    CHECK_THROWS_AS(erasure_alpha_bound(2, 0.6, 0.5), quantum::InvalidProbability);
    CHECK_THROWS_AS(erasure_alpha_bound(2, 0.3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(erasure_alpha_bound(2, 0.3, 2.5), std::invalid_argument);
  }
}

TEST_CASE("depolarizing closed form") {
  SUBCASE("frozen values") {
    CHECK(depolarizing_bs(2, 0.0).value_bits == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(depolarizing_bs(3, 0.0).value_bits ==
          doctest::Approx(std::log2(3.0)).epsilon(1e-12));
    CHECK(depolarizing_bs(2, 0.1).value_bits == doctest::Approx(0.289053).epsilon(1e-4));
  }

  SUBCASE("zero from the two-extendibility threshold onward") {
    for (double p : {1.0 / 3, 0.4, 0.9, 4.0 / 3}) {
      OracleValue v = depolarizing_bs(2, p);
      CHECK(v.value_bits == 0.0);
      CHECK(v.is_exact);
    }
    CHECK(depolarizing_bs(3, 3.0 / 8).value_bits == 0.0);
  }

  SUBCASE("continuous at the threshold and on a grid") {
    double thr = 2.0 / 6.0;
    CHECK(depolarizing_bs(2, thr - 1e-9).value_bits < 1e-7);
    for (double p = 0.01; p < 0.32; p += 0.01) {
      double left = depolarizing_bs(2, p - 1e-7).value_bits;
      double right = depolarizing_bs(2, p + 1e-7).value_bits;
      CHECK(std::abs(left - right) < 1e-5);
    }
  }

  SUBCASE("audit variant freezes the alternative pairing") {
    // The alternative max-pairing collapses to zero at p=0, which is the
    // inconsistency that motivates the default min-pairing.
    CHECK(depolarizing_bs(2, 0.0, true).value_bits == 0.0);
    CHECK(depolarizing_bs(2, 0.0, false).value_bits == doctest::Approx(1.0));
  }

  SUBCASE("domain checks") {
    CHECK_THROWS_AS(depolarizing_bs(2, 1.35), quantum::InvalidProbability);
    CHECK_THROWS_AS(depolarizing_bs(2, -0.01), quantum::InvalidProbability);
  }
}

TEST_CASE("one-sided erasure on a bipartite channel") {
  CHECK(semicausal_erasure_bs(2, 0.0).value_bits == doctest::Approx(1.0));
  CHECK(semicausal_erasure_bs(2, 1.0).value_bits == 0.0);
  CHECK(semicausal_erasure_bs(2, 0.25).value_bits == doctest::Approx(0.75));
  CHECK(semicausal_erasure_bs(3, 0.5).value_bits ==
        doctest::Approx(0.5 * std::log2(3.0)));
  CHECK(semicausal_erasure_bs(2, 0.25).is_exact);
}

TEST_CASE("bounds equal half the divergence against the matched erasure partner") {
  // Above the branch point the optimal extension marginal is the erasure
  // channel with flipped probability, so the bound is exactly half the
  // channel divergence of that pair.
  for (double p : {0.35, 0.4, 0.45}) {
    quantum::ChoiChannel n = quantum::make_erasure(2, p);
    quantum::ChoiChannel partner = quantum::make_erasure(2, 1.0 - p);
    double half_bs = 0.5 * divergence::bs_entropy_channel(n, partner).value;
    CHECK(erasure_bs_bound(2, p).value_bits == doctest::Approx(half_bs).epsilon(1e-9));
  }
  for (double p : {0.25, 0.35, 0.45}) {
    quantum::ChoiChannel n = quantum::make_erasure(2, p);
    quantum::ChoiChannel partner = quantum::make_erasure(2, 1.0 - p);
    double half = 0.5 * divergence::geo_entropy_channel_sub1(n, partner, 0.5).value;
    CHECK(erasure_alpha_bound(2, p, 0.5).value_bits ==
          doctest::Approx(half).epsilon(1e-9));
  }
}

TEST_CASE("full-rank order-zero rule") {
  CHECK(full_rank_min_geo(quantum::make_depolarizing(2, 0.2)).value_bits == 0.0);
  CHECK(full_rank_min_geo(quantum::make_depolarizing(3, 0.01)).value_bits == 0.0);
  CHECK(full_rank_min_geo(quantum::make_depolarizing(2, 0.2)).is_exact);
  CHECK_THROWS_AS(full_rank_min_geo(quantum::make_erasure(2, 0.3)), NotApplicable);
  CHECK_THROWS_AS(full_rank_min_geo(quantum::make_identity(3)), NotApplicable);
}
