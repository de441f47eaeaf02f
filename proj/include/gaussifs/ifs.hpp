#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gaussifs/rational.hpp"

namespace gaussifs {

/// The two one-parameter families under study. Both use the full inverse-branch
/// family {g_k : k >= 1} of a piecewise expanding map of [0,1]; truncation to the
/// first n branches is a per-call parameter, not part of the kind.
///
///   Gauss:       g_k(x) = 1/(x+k)                     (inverse branches of x -> 1/x mod 1)
///   LinearGauss: g_k(x) = 1/k - x/(k(k+1))            (affine, same endpoint lattice b_k = 1/k)
///
/// g_k maps [0,1] onto [b_{k+1}, b_k] with b_k = 1/k; the branch images tile
/// (0,1] with disjoint interiors for both kinds.
enum class SystemKind { LinearGauss, Gauss };

/// Symbol sequence ω = (ω_1, ..., ω_m); g_ω = g_{ω_1} ∘ ... ∘ g_{ω_m}
/// (rightmost symbol acts first). `bound` is the alphabet cutoff n, or
/// kUnboundedAlphabet for the full system.
inline constexpr long kUnboundedAlphabet = std::numeric_limits<long>::max();

struct Word {
  std::vector<long> syms;
  long bound = kUnboundedAlphabet;

  int length() const { return static_cast<int>(syms.size()); }
};

/// Where an interval came from; downstream search/bracket code keys a few
/// fast paths off this.
enum class Provenance { Raw, CylinderImage, BlockEndpoints, PrefixPiece };

/// Closed subinterval [lo, hi] of [0,1]. Exact endpoints travel along when the
/// construction was exact (always for LinearGauss cylinders and decomposition
/// pieces); `lo`/`hi` are their correctly rounded doubles.
struct IntervalX {
  double lo = 0.0;
  double hi = 0.0;
  Provenance prov = Provenance::Raw;
  std::optional<Rational> lo_exact;
  std::optional<Rational> hi_exact;

  double diam() const { return hi - lo; }
  bool degenerate() const { return !(lo < hi); }
};

inline double branch_left(long k) { return 1.0 / static_cast<double>(k + 1); }   // b_{k+1}
inline double branch_right(long k) { return 1.0 / static_cast<double>(k); }      // b_k

/// Contraction factor of the k-th linear branch: a_k = 1/(k(k+1)) = b_k - b_{k+1}.
inline double linear_slope(long k) {
  return 1.0 / (static_cast<double>(k) * static_cast<double>(k + 1));
}

namespace detail {
inline void check_symbol(long k, long bound) {
  if (k < 1) throw std::domain_error("branch index must be >= 1");
  if (k > bound) throw std::domain_error("branch index exceeds alphabet bound");
}
template <typename S>
inline void check_unit(const S& x) {
  if (x < S(0) || x > S(1)) throw std::domain_error("point outside [0,1]");
}
}  // namespace detail

/// g_k(x). Works for double and Rational alike; exact in the rational case.
template <typename S>
S apply_branch(SystemKind kind, long k, const S& x) {
  detail::check_symbol(k, kUnboundedAlphabet);
  detail::check_unit(x);
  if (kind == SystemKind::Gauss) return S(1) / (x + S(k));
  // 1/k - x/(k(k+1)), evaluated as (k+1 - x) / (k(k+1)) to keep one division
  return (S(k + 1) - x) / (S(k) * S(k + 1));
}

/// |g_k'(x)|: (x+k)^{-2} for Gauss, the constant a_k for LinearGauss.
template <typename S>
S branch_derivative(SystemKind kind, long k, const S& x) {
  detail::check_symbol(k, kUnboundedAlphabet);
  detail::check_unit(x);
  if (kind == SystemKind::Gauss) {
    S d = x + S(k);
    return S(1) / (d * d);
  }
  return S(1) / (S(k) * S(k + 1));
}

/// g_ω(x), rightmost symbol applied first.
template <typename S>
S apply_word(SystemKind kind, const Word& w, const S& x) {
  detail::check_unit(x);
  S y = x;
  for (auto it = w.syms.rbegin(); it != w.syms.rend(); ++it) {
    detail::check_symbol(*it, w.bound);
    y = apply_branch(kind, *it, y);
  }
  return y;
}

/// |g_ω'(x)| by the chain rule along the orbit. Evaluated as a running product
/// of branch derivatives; never forms the (overflowing) coefficient integers
/// of the composed Möbius map.
template <typename S>
S word_derivative(SystemKind kind, const Word& w, const S& x) {
  detail::check_unit(x);
  S y = x;
  S d = S(1);
  for (auto it = w.syms.rbegin(); it != w.syms.rend(); ++it) {
    detail::check_symbol(*it, w.bound);
    d *= branch_derivative(kind, *it, y);
    y = apply_branch(kind, *it, y);
  }
  return d;
}

/// Exact composed chart for g_ω, extended one right-hand symbol at a time.
/// LinearGauss keeps the affine form x -> A + Bx (B signed: sign tracks
/// orientation); Gauss keeps the integer Möbius form x -> (px+q)/(rx+s).
class ExactChart {
 public:
  explicit ExactChart(SystemKind kind) : kind_(kind) {}

  SystemKind kind() const { return kind_; }
  int depth() const { return depth_; }

  /// Compose with g_k on the right: chart <- chart ∘ g_k.
  void extend(long k) {
    detail::check_symbol(k, kUnboundedAlphabet);
    if (kind_ == SystemKind::LinearGauss) {
      // A + B*(1/k - x/(k(k+1)))
      A_ += B_ / k;
      B_ = -B_ / (Rational(k) * (k + 1));
    } else {
      // right-multiply the Möbius matrix by [[0,1],[1,k]]
      BigInt p = q_, q = p_ + BigInt(k) * q_;
      BigInt r = s_, s = r_ + BigInt(k) * s_;
      p_ = p; q_ = q; r_ = r; s_ = s;
    }
    ++depth_;
  }

  Rational apply(const Rational& x) const {
    if (kind_ == SystemKind::LinearGauss) return A_ + B_ * x;
    return Rational(p_ * numerator(x) + q_ * denominator(x),
                    r_ * numerator(x) + s_ * denominator(x));
  }

  /// Pull a point back through the chart (exact inverse of apply).
  Rational invert(const Rational& y) const {
    if (kind_ == SystemKind::LinearGauss) return (y - A_) / B_;
    // x = (s y - q) / (p - r y)
    Rational num = Rational(s_) * y - Rational(q_);
    Rational den = Rational(p_) - Rational(r_) * y;
    return num / den;
  }

 private:
  SystemKind kind_;
  int depth_ = 0;
  Rational A_ = 0, B_ = 1;
  BigInt p_ = 1, q_ = 0, r_ = 0, s_ = 1;
};

/// g_ω([0,1]) with endpoints ordered lo <= hi. Exact for both kinds (the chart
/// is rational); doubles are the rounded exact values, so identical words give
/// bitwise identical endpoints wherever they are recomputed.
IntervalX cylinder_interval(SystemKind kind, const Word& w);

/// Expansion-coding of a point: digits k_i = floor(1/x_i) along the exact
/// rational orbit x_{i+1} = (inverse branch k_i applied forward). The orbit of
/// any representable double is exact, so the coding never misclassifies a
/// point near a cylinder boundary. `endpoint_hit` reports that the orbit
/// reached 0 exactly — x is an endpoint g_ω(0) of the cylinder of the digits
/// emitted so far — and the word returned is that (possibly short) prefix.
struct CodingResult {
  Word word;
  bool endpoint_hit = false;
};
CodingResult cf_encode(SystemKind kind, double x, int depth);

/// Structure of a prefix [0, r]: alternating gap/cylinder-run pieces.
///
/// Every [0, r] splits as I_1 ∪ I_2 ∪ ... ∪ remainder where the odd pieces are
/// the gaps g_ω([0, b_{k+1}]) below the surviving branch images and the even
/// pieces are complete runs of branch images g_ω([b_{k+1}, g_k(b_{j})]);
/// the remainder (absent when some piece ends exactly at r) is a single
/// cylinder g_{ω'}([0,1]) containing the unresolved tail. All endpoints exact.
struct PrefixDecomposition {
  std::vector<IntervalX> pieces;          // I_1, I_2, ... in increasing position
  std::optional<IntervalX> remainder;     // cylinder still straddling r
  std::optional<Word> remainder_word;
};
PrefixDecomposition decompose_prefix(SystemKind kind, double r, int max_depth);
PrefixDecomposition decompose_prefix(SystemKind kind, const Rational& r, int max_depth);

}  // namespace gaussifs
