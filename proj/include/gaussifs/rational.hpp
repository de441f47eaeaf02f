#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>

namespace gaussifs {

/// Arbitrary-precision rational. Cylinder endpoints and prefix decompositions
/// are computed exactly; denominators overflow any fixed-width integer within
/// ~20 refinement levels.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }

/// Exact conversion: every finite double is a dyadic rational.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::domain_error("rational_from_double: non-finite input");
  return Rational(x);
}

/// floor(n/d) for a rational n/d, correct for either sign.
inline BigInt rfloor(const Rational& r) {
  BigInt q = numerator(r) / denominator(r);
  if (r < 0 && q * denominator(r) != numerator(r)) --q;
  return q;
}

inline BigInt rceil(const Rational& r) {
  BigInt q = numerator(r) / denominator(r);
  if (r > 0 && q * denominator(r) != numerator(r)) ++q;
  return q;
}

}  // namespace gaussifs
