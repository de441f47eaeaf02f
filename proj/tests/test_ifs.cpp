#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gaussifs/ifs.hpp"

using namespace gaussifs;

namespace {

Word make_word(std::initializer_list<long> syms) {
  Word w;
  w.syms = syms;
  return w;
}

Rational exact_lo(const IntervalX& iv) {
  REQUIRE(iv.lo_exact.has_value());
  return *iv.lo_exact;
}

Rational exact_hi(const IntervalX& iv) {
  REQUIRE(iv.hi_exact.has_value());
  return *iv.hi_exact;
}

}  // namespace

TEST_CASE("branch endpoints and slopes") {
  CHECK(branch_right(1) == 1.0);
  CHECK(branch_left(1) == 0.5);
  CHECK(branch_right(4) == 0.25);
  CHECK(branch_left(4) == 0.2);
  CHECK(linear_slope(1) == 0.5);
  CHECK(linear_slope(3) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));

  // both families map [0,1] onto [b_{k+1}, b_k]; the maps are decreasing
  for (long k : {1L, 2L, 5L, 17L}) {
    for (SystemKind kind : {SystemKind::Gauss, SystemKind::LinearGauss}) {
      Rational at0 = apply_branch(kind, k, Rational(0));
      Rational at1 = apply_branch(kind, k, Rational(1));
      CHECK(at0 == Rational(1, k));
      CHECK(at1 == Rational(1, k + 1));
    }
  }

  // slopes telescope: sum of branch lengths fills [b_{n+1}, 1] exactly
  Rational total = 0;
  for (long k = 1; k <= 40; ++k) total += Rational(1, k * (k + 1));
  CHECK(total == 1 - Rational(1, 41));
}

TEST_CASE("branch derivatives") {
  // contraction factors |g_k'(x)|: constant a_k for the affine family
  Rational dl = branch_derivative(SystemKind::LinearGauss, 3, Rational(2, 7));
  CHECK(dl == Rational(1, 12));
  // 1/(x+k)^2 for the nonlinear family
  Rational dg = branch_derivative(SystemKind::Gauss, 2, Rational(0));
  CHECK(dg == Rational(1, 4));
  double dgd = branch_derivative(SystemKind::Gauss, 1, 1.0);
  CHECK(dgd == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("domain guards") {
  CHECK_THROWS_AS(apply_branch(SystemKind::Gauss, 0, 0.5), std::domain_error);
  CHECK_THROWS_AS(apply_branch(SystemKind::Gauss, -3, 0.5), std::domain_error);
  CHECK_THROWS_AS(apply_branch(SystemKind::LinearGauss, 1, 1.5), std::domain_error);
  CHECK_THROWS_AS(apply_branch(SystemKind::LinearGauss, 1, -0.1), std::domain_error);

  // word-local alphabet bound is enforced
  Word w = make_word({3});
  w.bound = 2;
  CHECK_THROWS_AS(apply_word(SystemKind::Gauss, w, 0.5), std::domain_error);
}

TEST_CASE("word application composes right-to-left") {
  Word w = make_word({2, 3});
  // g_2(g_3(x)) exactly, for both families
  Rational x(1, 4);
  Rational lin = apply_word(SystemKind::LinearGauss, w, x);
  Rational expect_lin = apply_branch(SystemKind::LinearGauss, 2,
                                     apply_branch(SystemKind::LinearGauss, 3, x));
  CHECK(lin == expect_lin);

  Rational gau = apply_word(SystemKind::Gauss, w, x);
  // g_3(1/4) = 4/13, g_2(4/13) = 13/30
  CHECK(gau == Rational(13, 30));

  // chain rule: derivative of the composition is the product of slopes
  Rational dlin = word_derivative(SystemKind::LinearGauss, w, x);
  CHECK(dlin == Rational(1, 72));  // (-1/6)(-1/12)
  double dgau = word_derivative(SystemKind::Gauss, w, 0.25);
  CHECK(dgau == doctest::Approx(4.0 / 225.0).epsilon(1e-14));
}

TEST_CASE("exact charts invert their own images") {
  for (SystemKind kind : {SystemKind::Gauss, SystemKind::LinearGauss}) {
    ExactChart chart(kind);
    chart.extend(2);
    chart.extend(1);
    CHECK(chart.depth() == 2);
    // chart(x) = g_2(g_1(x)); endpoints of the image of [0,1]
    CHECK(chart.apply(Rational(0)) == Rational(1, 3));
    Rational at1 = chart.apply(Rational(1));
    if (kind == SystemKind::LinearGauss)
      CHECK(at1 == Rational(5, 12));
    else
      CHECK(at1 == Rational(2, 5));
    Rational x(3, 7);
    CHECK(chart.invert(chart.apply(x)) == x);
  }
}

TEST_CASE("cylinder intervals are exact and nested") {
  IntervalX c1 = cylinder_interval(SystemKind::LinearGauss, make_word({1}));
  CHECK(exact_lo(c1) == Rational(1, 2));
  CHECK(exact_hi(c1) == Rational(1));
  CHECK(c1.prov == Provenance::CylinderImage);

  IntervalX c2 = cylinder_interval(SystemKind::LinearGauss, make_word({2}));
  CHECK(exact_lo(c2) == Rational(1, 3));
  CHECK(exact_hi(c2) == Rational(1, 2));

  IntervalX c21 = cylinder_interval(SystemKind::LinearGauss, make_word({2, 1}));
  CHECK(exact_lo(c21) == Rational(1, 3));
  CHECK(exact_hi(c21) == Rational(5, 12));

  IntervalX g21 = cylinder_interval(SystemKind::Gauss, make_word({2, 1}));
  CHECK(exact_lo(g21) == Rational(1, 3));
  CHECK(exact_hi(g21) == Rational(2, 5));

  // nesting: the depth-2 cylinder sits inside its depth-1 parent
  CHECK(exact_lo(c21) >= exact_lo(c2));
  CHECK(exact_hi(c21) <= exact_hi(c2));

  // depth-1 cylinders tile [b_{n+1}, 1] contiguously (descending in k)
  for (SystemKind kind : {SystemKind::Gauss, SystemKind::LinearGauss}) {
    for (long k = 1; k <= 5; ++k) {
      IntervalX a = cylinder_interval(kind, make_word({k}));
      IntervalX b = cylinder_interval(kind, make_word({k + 1}));
      CHECK(exact_lo(a) == exact_hi(b));
    }
  }

  // recomputation is bitwise stable
  IntervalX again = cylinder_interval(SystemKind::Gauss, make_word({2, 1}));
  CHECK(again.lo == g21.lo);
  CHECK(again.hi == g21.hi);
}

TEST_CASE("expansion coding") {
  // pinned digits for a representative point
  CodingResult lin = cf_encode(SystemKind::LinearGauss, 0.3, 5);
  CHECK_FALSE(lin.endpoint_hit);
  CHECK(lin.word.syms == std::vector<long>{3, 2, 1, 1, 2});

  // the doubled golden mean has the all-ones expansion
  CodingResult phi = cf_encode(SystemKind::Gauss, 0.6180339887498949, 10);
  CHECK(phi.word.length() == 10);
  for (long s : phi.word.syms) CHECK(s == 1);

  // an exact cylinder endpoint stops the orbit with the short prefix
  for (SystemKind kind : {SystemKind::Gauss, SystemKind::LinearGauss}) {
    CodingResult half = cf_encode(kind, 0.5, 5);
    CHECK(half.endpoint_hit);
    CHECK(half.word.syms == std::vector<long>{2});
  }
}

TEST_CASE("coding locates points in their cylinders") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(1e-6, 1.0 - 1e-6);
  for (SystemKind kind : {SystemKind::Gauss, SystemKind::LinearGauss}) {
    for (int trial = 0; trial < 25; ++trial) {
      double x = unif(rng);
      CodingResult c = cf_encode(kind, x, 8);
      IntervalX cyl = cylinder_interval(kind, c.word);
      CHECK(cyl.lo <= x);
      CHECK(x <= cyl.hi);
      if (!c.endpoint_hit) {
        // deeper coding extends the shallower one
        CodingResult deeper = cf_encode(kind, x, 12);
        REQUIRE(deeper.word.length() >= c.word.length());
        for (int i = 0; i < c.word.length(); ++i)
          CHECK(deeper.word.syms[i] == c.word.syms[i]);
      }
    }
  }
}

TEST_CASE("prefix decomposition of [0, 0.4], depth-limited") {
  PrefixDecomposition d = decompose_prefix(SystemKind::LinearGauss, 0.4, 2);
  REQUIRE(d.pieces.size() == 2);
  // gap below the surviving branches: [0, b_3]
  CHECK(exact_lo(d.pieces[0]) == Rational(0));
  CHECK(exact_hi(d.pieces[0]) == Rational(1, 3));
  // the complete-run piece is empty here (no full branch image fits)
  CHECK(exact_lo(d.pieces[1]) == Rational(1, 3));
  CHECK(exact_hi(d.pieces[1]) == Rational(1, 3));
  CHECK(d.pieces[1].degenerate());
  // the unresolved tail is the full straddling cylinder g_2(g_1([0,1]))
  REQUIRE(d.remainder.has_value());
  REQUIRE(d.remainder_word.has_value());
  CHECK(exact_lo(*d.remainder) == Rational(1, 3));
  CHECK(exact_hi(*d.remainder) == Rational(5, 12));
  CHECK(d.remainder_word->syms == std::vector<long>{2, 1});
  CHECK(d.remainder->lo <= 0.4);
  CHECK(0.4 <= d.remainder->hi);
}

TEST_CASE("prefix decomposition structure at depth") {
  PrefixDecomposition d = decompose_prefix(SystemKind::LinearGauss, 0.4, 40);
  REQUIRE(d.pieces.size() == 40);
  CHECK(exact_hi(d.pieces[2]) == Rational(3, 8));
  CHECK(exact_hi(d.pieces[3]) == Rational(19, 48));
  // pieces are contiguous from 0 and stay below r
  Rational r = rational_from_double(0.4);
  Rational cursor = 0;
  for (const IntervalX& piece : d.pieces) {
    CHECK(exact_lo(piece) == cursor);
    cursor = exact_hi(piece);
    CHECK(cursor <= r);
  }
  REQUIRE(d.remainder.has_value());
  REQUIRE(d.remainder_word.has_value());
  // the remainder is exactly the cylinder of its word and straddles r
  IntervalX cyl = cylinder_interval(SystemKind::LinearGauss, *d.remainder_word);
  CHECK(exact_lo(*d.remainder) == exact_lo(cyl));
  CHECK(exact_hi(*d.remainder) == exact_hi(cyl));
  CHECK(exact_lo(*d.remainder) <= r);
  CHECK(r <= exact_hi(*d.remainder));
  CHECK(exact_lo(*d.remainder) == cursor);
}

TEST_CASE("rational prefix terminates without remainder") {
  // 0.4 rounds to a rational whose expansion under the nonlinear family is
  // finite, so the decomposition bottoms out with a piece ending at r
  PrefixDecomposition d = decompose_prefix(SystemKind::Gauss, 0.4, 6);
  CHECK_FALSE(d.remainder.has_value());
  REQUIRE(!d.pieces.empty());
  CHECK(exact_hi(d.pieces.back()) == rational_from_double(0.4));
  CHECK(exact_hi(d.pieces[1]) == Rational(2, 5));
}

TEST_CASE("piece lengths alternate and halve") {
  // even pieces never exceed the odd piece before them; odd pieces shrink by
  // a factor 4 every two steps
  for (double r : {0.37, 0.55, 0.71, 0.93}) {
    PrefixDecomposition d = decompose_prefix(SystemKind::LinearGauss, r, 30);
    std::vector<Rational> len;
    for (const IntervalX& piece : d.pieces)
      len.push_back(exact_hi(piece) - exact_lo(piece));
    for (std::size_t m = 0; m < len.size(); ++m) {
      if (m % 2 == 0) {
        CHECK(len[m] > 0);  // gaps are genuinely positive
        if (m + 2 < len.size()) CHECK(4 * len[m + 2] <= len[m]);
      } else {
        CHECK(len[m] <= len[m - 1]);
      }
    }
  }
}

TEST_CASE("rational helpers") {
  CHECK(rational_from_double(0.4) == Rational(3602879701896397, 9007199254740992));
  CHECK(rational_from_double(0.5) == Rational(1, 2));
  CHECK(to_double(Rational(1, 3)) == doctest::Approx(1.0 / 3.0).epsilon(1e-16));
  CHECK(rfloor(Rational(7, 2)) == 3);
  CHECK(rceil(Rational(7, 2)) == 4);
  CHECK(rfloor(Rational(5)) == 5);
  CHECK(rceil(Rational(5)) == 5);
}

TEST_CASE("interval basics") {
  IntervalX iv;
  iv.lo = 0.25;
  iv.hi = 0.75;
  CHECK(iv.diam() == 0.5);
  CHECK_FALSE(iv.degenerate());
  iv.hi = iv.lo;
  CHECK(iv.degenerate());
  Word w;
  CHECK(w.length() == 0);
  CHECK(w.bound == kUnboundedAlphabet);
}
