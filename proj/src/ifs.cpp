#include "gaussifs/ifs.hpp"

#include <algorithm>
#include <limits>

namespace gaussifs {

namespace {

// b_j as an exact rational, with b_0 treated as +∞ by callers.
Rational rb(long j) { return Rational(1, j); }

IntervalX interval_from_exact(Rational e0, Rational e1, Provenance prov) {
  if (e0 > e1) std::swap(e0, e1);
  IntervalX iv;
  iv.lo = to_double(e0);
  iv.hi = to_double(e1);
  iv.prov = prov;
  iv.lo_exact = std::move(e0);
  iv.hi_exact = std::move(e1);
  return iv;
}

long to_long_checked(const BigInt& v, const char* what) {
  static const BigInt kMax = std::numeric_limits<long>::max() / 4;
  if (v > kMax || v < 1) throw std::overflow_error(std::string(what) + ": index out of range");
  return v.convert_to<long>();
}

}  // namespace

IntervalX cylinder_interval(SystemKind kind, const Word& w) {
  ExactChart chart(kind);
  for (long k : w.syms) {
    detail::check_symbol(k, w.bound);
    chart.extend(k);
  }
  return interval_from_exact(chart.apply(Rational(0)), chart.apply(Rational(1)),
                             Provenance::CylinderImage);
}

CodingResult cf_encode(SystemKind kind, double x, int depth) {
  if (!(x > 0.0 && x <= 1.0)) throw std::domain_error("cf_encode: x must lie in (0,1]");
  if (depth < 1) throw std::domain_error("cf_encode: depth must be positive");

  CodingResult res;
  res.word.bound = kUnboundedAlphabet;
  Rational orbit = rational_from_double(x);
  for (int d = 0; d < depth; ++d) {
    // digit k: the branch whose image Δ_k = [b_{k+1}, b_k] holds the point;
    // at a shared endpoint b_k the convention floor(1/x) picks Δ_k, whose
    // right endpoint the point is — the next step then lands exactly on 0.
    BigInt kq = rfloor(Rational(denominator(orbit), numerator(orbit)));
    long k = to_long_checked(kq, "cf_encode");
    res.word.syms.push_back(k);
    if (kind == SystemKind::Gauss) {
      // forward Gauss step 1/x − k, exact
      orbit = Rational(denominator(orbit) - kq * numerator(orbit), numerator(orbit));
    } else {
      // inverse of the affine branch: (1/k − x)·k(k+1) = k + 1 − k(k+1)x
      orbit = Rational(k + 1) - Rational(k) * Rational(k + 1) * orbit;
    }
    if (orbit == 0) {
      // the point is g_ω(0) for the digits emitted so far
      res.endpoint_hit = true;
      return res;
    }
  }
  return res;
}

namespace {

// Largest j with g_k(b_j) ≤ r, scanning from a closed-form seed. g_k(b_j) is
// increasing in j and g_k(b_1) = b_{k+1} < r is guaranteed by the caller, so
// the result is ≥ 1.
long straddle_child(SystemKind kind, long k, const Rational& r) {
  Rational seed;
  if (kind == SystemKind::Gauss) {
    // g_k(1/j) = j/(1+kj) ≤ r  ⟺  j ≤ r/(1 − rk)
    seed = r / (Rational(1) - r * k);
  } else {
    // g_k(1/j) = 1/k − 1/(j·k(k+1)) ≤ r  ⟺  j ≤ 1/(k(k+1)(b_k − r))
    seed = Rational(1) / (Rational(k) * (k + 1) * (rb(k) - r));
  }
  long j = to_long_checked(rfloor(seed) < 1 ? BigInt(1) : rfloor(seed), "decompose_prefix");
  auto gk_b = [&](long jj) { return apply_branch(kind, k, rb(jj)); };
  while (gk_b(j + 1) <= r) ++j;
  while (j > 1 && gk_b(j) > r) --j;
  return j;
}

}  // namespace

PrefixDecomposition decompose_prefix(SystemKind kind, const Rational& r, int max_depth) {
  if (!(r > 0 && r <= 1)) throw std::domain_error("decompose_prefix: r must lie in (0,1]");
  if (max_depth < 1) throw std::domain_error("decompose_prefix: max_depth must be positive");

  PrefixDecomposition out;
  ExactChart chart(kind);  // g_ω for the word built so far; |ω| stays even
  Word word;
  Rational r_cur = r;

  auto emit = [&](const Rational& a, const Rational& b) {
    out.pieces.push_back(
        interval_from_exact(chart.apply(a), chart.apply(b), Provenance::PrefixPiece));
  };
  auto set_remainder = [&](std::initializer_list<long> extra) {
    Word wr = word;
    for (long k : extra) wr.syms.push_back(k);
    out.remainder = cylinder_interval(kind, wr);
    out.remainder_word = std::move(wr);
  };

  while (true) {
    // k: the branch image [b_{k+1}, b_k] that straddles r_cur (k = 0 means
    // r_cur = 1 and the run below covers the whole chart interval).
    long k = to_long_checked(rceil(Rational(1) / r_cur), "decompose_prefix") - 1;

    // Odd piece: [0, b_{k+1}] — the exact union of every whole branch image
    // that fits under r_cur (branches j ≥ k+1, plus the point 0). Never
    // degenerate.
    emit(Rational(0), rb(k + 1));
    if (rb(k + 1) == r_cur) break;  // construction ends exactly at r
    if (static_cast<int>(out.pieces.size()) >= max_depth) {
      set_remainder({k});
      break;
    }

    // Even piece: the complete run of second-level images inside branch k,
    // [b_{k+1}, g_k(b_{j0})] with j0 maximal; degenerate exactly when j0 = 1.
    long j0 = straddle_child(kind, k, r_cur);
    Rational top = apply_branch(kind, k, rb(j0));
    emit(rb(k + 1), top);
    if (top == r_cur) break;
    if (static_cast<int>(out.pieces.size()) >= max_depth) {
      set_remainder({k, j0});
      break;
    }

    // Descend into the straddling cylinder (k, j0) and pull r back through
    // both branches; the word keeps even length, preserving orientation.
    word.syms.push_back(k);
    word.syms.push_back(j0);
    Rational y = kind == SystemKind::Gauss
                     ? Rational(1) / r_cur - k
                     : Rational(k + 1) - Rational(k) * (k + 1) * r_cur;
    r_cur = kind == SystemKind::Gauss ? Rational(1) / y - j0
                                      : Rational(j0 + 1) - Rational(j0) * (j0 + 1) * y;
    chart.extend(k);
    chart.extend(j0);
  }
  return out;
}

PrefixDecomposition decompose_prefix(SystemKind kind, double r, int max_depth) {
  return decompose_prefix(kind, rational_from_double(r), max_depth);
}

}  // namespace gaussifs
