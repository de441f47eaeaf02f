#include "gaussifs/density.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "gaussifs/detail/compensated.hpp"

namespace gaussifs {

namespace {

using Kahan = detail::CompensatedSum;

IntervalX exact_interval(Rational e0, Rational e1, Provenance prov) {
  if (e1 < e0) std::swap(e0, e1);
  IntervalX iv;
  iv.lo = to_double(e0);
  iv.hi = to_double(e1);
  iv.prov = prov;
  iv.lo_exact = std::move(e0);
  iv.hi_exact = std::move(e1);
  return iv;
}

// [b_{l+1}, b_k]
IntervalX block_interval(long k, long l) {
  return exact_interval(Rational(1, l + 1), Rational(1, k), Provenance::BlockEndpoints);
}

struct FamilySet {
  bool a = false, b = false, c = false, d = false;
  std::string canonical;
};

FamilySet parse_families(std::string_view families, long n, const std::vector<double>& eps_list,
                         int depth_D) {
  FamilySet fs;
  for (char ch : families) {
    switch (ch) {
      case 'a': fs.a = true; break;
      case 'b': fs.b = true; break;
      case 'c': fs.c = true; break;
      case 'd': fs.d = true; break;
      default: throw std::domain_error(std::string("unknown candidate family '") + ch + "'");
    }
  }
  if (fs.c) {
    for (double eps : eps_list)
      if (!(eps > 0.0 && eps < 1.0))
        throw std::domain_error("family c: eps must lie in (0,1)");
  }
  if (fs.d) {
    if (n > 8) throw std::domain_error("family d is exhaustive; limited to n <= 8");
    if (depth_D < 1 || depth_D > 3)
      throw std::domain_error("family d: endpoint depth must lie in 1..3");
  }
  if (fs.a) fs.canonical += 'a';
  if (fs.b) fs.canonical += 'b';
  if (fs.c) fs.canonical += 'c';
  if (fs.d) fs.canonical += 'd';
  return fs;
}

// Deduplicated push alphabet {1, 2, n-1, n} ∩ [1, n], ascending.
std::vector<long> push_symbols(long n) {
  std::set<long> s;
  for (long v : {1L, 2L, n - 1, n})
    if (v >= 1 && v <= n) s.insert(v);
  return {s.begin(), s.end()};
}

// Words of length 1..3 over push_symbols(n): depth-major, lexicographic within
// each depth. Fixed order makes candidate counts and tie-breaking reproducible.
std::vector<Word> push_words(long n) {
  const auto syms = push_symbols(n);
  std::vector<Word> words;
  for (long a : syms) words.push_back(Word{{a}, n});
  for (long a : syms)
    for (long b : syms) words.push_back(Word{{a, b}, n});
  for (long a : syms)
    for (long b : syms)
      for (long c : syms) words.push_back(Word{{a, b, c}, n});
  return words;
}

long window_kappa(long n, double eps) {
  const long kappa =
      static_cast<long>(std::floor(static_cast<double>(n) -
                                   std::pow(static_cast<double>(n), 1.0 - eps))) + 1;
  return std::clamp(kappa, 1L, n);
}

// Distinct values among g_ω(0), g_ω(1) over all words of length 1..D.
std::vector<Rational> cylinder_endpoints(SystemKind kind, long n, int depth_D) {
  std::set<Rational> pts;
  auto walk = [&](auto&& self, const ExactChart& chart) -> void {
    pts.insert(chart.apply(Rational(0)));
    pts.insert(chart.apply(Rational(1)));
    if (chart.depth() == depth_D) return;
    for (long j = 1; j <= n; ++j) {
      ExactChart next = chart;
      next.extend(j);
      self(self, next);
    }
  };
  for (long j = 1; j <= n; ++j) {
    ExactChart chart(kind);
    chart.extend(j);
    walk(walk, chart);
  }
  return {pts.begin(), pts.end()};
}

}  // namespace

double density_ratio(const ConformalMeasure& m, const IntervalX& F, int depth) {
  if (F.degenerate()) throw DegenerateInterval("density_ratio: degenerate interval");
  const MassBracket mb = m.interval_mass(F, depth);
  const double diam =
      (F.lo_exact && F.hi_exact) ? to_double(*F.hi_exact - *F.lo_exact) : F.diam();
  return mb.upper / std::pow(diam, m.h());
}

std::vector<Candidate> candidate_families(SystemKind kind, long n, std::string_view families,
                                          const std::vector<double>& eps_list, int depth_D,
                                          std::uint64_t budget) {
  if (n < 2) throw std::domain_error("candidate_families: need n >= 2");
  const FamilySet fs = parse_families(families, n, eps_list, depth_D);

  std::vector<Candidate> out;
  std::uint64_t total = 0;
  auto charge = [&](std::uint64_t count, const char* family) {
    total += count;
    if (total > budget)
      throw BudgetExceeded(std::string("candidate enumeration over budget at family ") + family);
  };

  if (fs.a) {
    charge(static_cast<std::uint64_t>(n) * (n + 1) / 2, "a");
    for (long k = 1; k <= n; ++k)
      for (long l = k; l <= n; ++l) {
        Candidate c;
        c.iv = block_interval(k, l);
        c.family = 'a';
        c.k = static_cast<int>(k);
        c.l = static_cast<int>(l);
        out.push_back(std::move(c));
      }
  }
  if (fs.b) {
    const auto words = push_words(n);
    charge(words.size() * static_cast<std::uint64_t>(n), "b");
    for (const Word& w : words) {
      ExactChart chart(kind);
      for (long s : w.syms) chart.extend(s);
      const Rational deep = chart.apply(Rational(1, n + 1));
      for (long k = 1; k <= n; ++k) {
        Candidate c;
        c.iv = exact_interval(deep, chart.apply(Rational(1, k)), Provenance::CylinderImage);
        c.family = 'b';
        c.push = w;
        c.k = static_cast<int>(k);
        c.l = static_cast<int>(n);
        out.push_back(std::move(c));
      }
    }
  }
  if (fs.c) {
    charge(eps_list.size(), "c");
    for (double eps : eps_list) {
      const long kappa = window_kappa(n, eps);
      Candidate c;
      c.iv = block_interval(kappa, n);
      c.family = 'c';
      c.k = static_cast<int>(kappa);
      c.l = static_cast<int>(n);
      out.push_back(std::move(c));
    }
  }
  if (fs.d) {
    const auto pts = cylinder_endpoints(kind, n, depth_D);
    const std::uint64_t count = pts.size();
    charge(count * (count - 1) / 2, "d");
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        Candidate c;
        c.iv = exact_interval(pts[i], pts[j], Provenance::Raw);
        c.family = 'd';
        c.k = static_cast<int>(i);
        c.l = static_cast<int>(j);
        out.push_back(std::move(c));
      }
  }
  return out;
}

MeasureEstimate sup_ratio_search(const ConformalMeasure& m, std::string_view families,
                                 const std::vector<double>& eps_list, int depth_D,
                                 std::uint64_t budget) {
  const SystemKind kind = m.kind();
  const long n = m.n();
  const double h = m.h();
  const FamilySet fs = parse_families(families, n, eps_list, depth_D);

  // Branch-mass suffix sums S[k] = Σ_{j=k..n} m(Δ_j). Every block [b_{l+1}, b_k]
  // is a union of whole branch images, so its mass is S[k] − S[l+1] with no
  // cylinder refinement; the backward order accumulates smallest terms first.
  std::vector<double> suffix(static_cast<std::size_t>(n) + 2, 0.0);
  {
    Kahan acc;
    for (long j = n; j >= 1; --j) {
      acc.add(m.branch_mass(j));
      suffix[j] = acc.sum;
    }
  }
  auto block_ratio = [&](long k, long l) {
    const double mass = suffix[k] - suffix[l + 1];
    const double diam = static_cast<double>(l + 1 - k) /
                        (static_cast<double>(k) * (static_cast<double>(l) + 1.0));
    return mass / std::pow(diam, h);
  };

  struct BestHit {
    double ratio = -std::numeric_limits<double>::infinity();
    char family = '-';
    double lo = 0.0, hi = 0.0;
    long k = 0, l = 0;
    std::ptrdiff_t word = -1;
    std::size_t ei = 0, ej = 0;
  } best;

  // Strict improvement, with ties resolved toward the lexicographically
  // smallest (family, lo, hi) so the result is independent of evaluation order.
  auto improves = [&best](double ratio, char family, double lo, double hi) {
    if (ratio != best.ratio) return ratio > best.ratio;
    if (family != best.family) return family < best.family;
    if (lo != best.lo) return lo < best.lo;
    return hi < best.hi;
  };

  std::uint64_t evaluated = 0;
  std::uint64_t total = 0;
  auto charge = [&](std::uint64_t count, const char* family) {
    total += count;
    if (total > budget)
      throw BudgetExceeded(std::string("candidate enumeration over budget at family ") + family);
  };

  // Fallback candidate: the full support block [b_{n+1}, 1]. Always evaluated,
  // so sup_ratio ≥ 1 up to quadrature error and H_upper ≤ 1.
  best.ratio = block_ratio(1, n);
  best.lo = 1.0 / (static_cast<double>(n) + 1.0);
  best.hi = 1.0;
  best.k = 1;
  best.l = n;
  ++evaluated;

  std::vector<Word> words;         // kept for re-materializing a family-b winner
  std::vector<Rational> endpoints; // likewise for family d

  if (fs.a) {
    charge(static_cast<std::uint64_t>(n) * (n + 1) / 2, "a");
    for (long k = 1; k <= n; ++k) {
      const double hi = 1.0 / static_cast<double>(k);
      for (long l = k; l <= n; ++l) {
        const double ratio = block_ratio(k, l);
        ++evaluated;
        if (improves(ratio, 'a', 1.0 / (static_cast<double>(l) + 1.0), hi)) {
          best.ratio = ratio;
          best.family = 'a';
          best.lo = 1.0 / (static_cast<double>(l) + 1.0);
          best.hi = hi;
          best.k = k;
          best.l = l;
        }
      }
    }
  }
  if (fs.b) {
    words = push_words(n);
    charge(words.size() * static_cast<std::uint64_t>(n), "b");
    std::vector<double> wsuffix(static_cast<std::size_t>(n) + 2, 0.0);
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
      const Word& w = words[wi];
      // g_ω([b_{n+1}, b_k]) = ∪_{j=k..n} g_{ω j}([0,1]): child-mass suffix sums.
      Word child = w;
      child.syms.push_back(0);
      {
        Kahan acc;
        for (long j = n; j >= 1; --j) {
          child.syms.back() = j;
          acc.add(m.cylinder_mass(child));
          wsuffix[j] = acc.sum;
        }
      }
      ExactChart chart(kind);
      for (long s : w.syms) chart.extend(s);
      const Rational deep = chart.apply(Rational(1, n + 1));
      const double deep_d = to_double(deep);
      for (long k = 1; k <= n; ++k) {
        const Rational other = chart.apply(Rational(1, k));
        const Rational width = other >= deep ? other - deep : deep - other;
        const double ratio = wsuffix[k] / std::pow(to_double(width), h);
        ++evaluated;
        double lo = deep_d, hi = to_double(other);
        if (hi < lo) std::swap(lo, hi);
        if (improves(ratio, 'b', lo, hi)) {
          best.ratio = ratio;
          best.family = 'b';
          best.lo = lo;
          best.hi = hi;
          best.k = k;
          best.l = n;
          best.word = static_cast<std::ptrdiff_t>(wi);
        }
      }
    }
  }
  if (fs.c) {
    charge(eps_list.size(), "c");
    for (double eps : eps_list) {
      const long kappa = window_kappa(n, eps);
      const double ratio = block_ratio(kappa, n);
      ++evaluated;
      const double lo = 1.0 / (static_cast<double>(n) + 1.0);
      const double hi = 1.0 / static_cast<double>(kappa);
      if (improves(ratio, 'c', lo, hi)) {
        best.ratio = ratio;
        best.family = 'c';
        best.lo = lo;
        best.hi = hi;
        best.k = kappa;
        best.l = n;
      }
    }
  }
  if (fs.d) {
    endpoints = cylinder_endpoints(kind, n, depth_D);
    const std::uint64_t count = endpoints.size();
    charge(count * (count - 1) / 2, "d");
    std::vector<double> pd(endpoints.size());
    for (std::size_t i = 0; i < endpoints.size(); ++i) pd[i] = to_double(endpoints[i]);
    for (std::size_t i = 0; i + 1 < endpoints.size(); ++i)
      for (std::size_t j = i + 1; j < endpoints.size(); ++j) {
        const IntervalX F = exact_interval(endpoints[i], endpoints[j], Provenance::Raw);
        const MassBracket mb = m.interval_mass(F, depth_D);
        const double ratio = mb.upper / std::pow(to_double(endpoints[j] - endpoints[i]), h);
        ++evaluated;
        if (improves(ratio, 'd', pd[i], pd[j])) {
          best.ratio = ratio;
          best.family = 'd';
          best.lo = pd[i];
          best.hi = pd[j];
          best.ei = i;
          best.ej = j;
        }
      }
  }

  MeasureEstimate est;
  est.kind = kind;
  est.n = n;
  est.h = h;
  est.families = fs.canonical;
  est.candidates = evaluated;
  est.sup_ratio = best.ratio;
  est.H_upper = 1.0 / best.ratio;
  est.cap = density_sup_cap(n, h);
  est.H_lower = 1.0 / est.cap;
  est.best_family = best.family;
  switch (best.family) {
    case 'b': {
      const Word& w = words[static_cast<std::size_t>(best.word)];
      est.best_push = w;
      ExactChart chart(kind);
      for (long s : w.syms) chart.extend(s);
      est.best = exact_interval(chart.apply(Rational(1, n + 1)),
                                chart.apply(Rational(1, best.k)), Provenance::CylinderImage);
      break;
    }
    case 'd':
      est.best = exact_interval(endpoints[best.ei], endpoints[best.ej], Provenance::Raw);
      break;
    default:  // '-', 'a', 'c' are all blocks
      est.best = block_interval(best.k, best.l);
      break;
  }
  return est;
}

double density_sup_cap(long n, double h, const BoundConstants& c) {
  if (n < 2) throw std::domain_error("density_sup_cap: need n >= 2");
  if (!(h > 0.0 && h <= 1.0)) throw std::domain_error("density_sup_cap: h must lie in (0,1]");
  const double ln_n = std::log(static_cast<double>(n));
  const double lnln = std::max(0.0, std::log(ln_n));
  const double gap = 1.0 - h;
  return 1.0 + gap * ln_n + c.C * gap * gap * ln_n * ln_n + c.C3 * lnln / static_cast<double>(n);
}

PartitionEntropy entropy_partition(int k, int l) {
  if (k < 1 || l < k) throw std::domain_error("entropy_partition: need 1 <= k <= l");
  PartitionEntropy out;
  out.k = k;
  out.l = l;
  out.weights.resize(static_cast<std::size_t>(l) - k + 1);
  // w_j = a_j / (b_k − b_{l+1}) = k(l+1) / ((l+1−k) · j(j+1)); the division-free
  // form of the normalizer avoids cancellation for k close to l.
  const double scale = static_cast<double>(k) * (static_cast<double>(l) + 1.0) /
                       (static_cast<double>(l) + 1.0 - static_cast<double>(k));
  Kahan hsum;
  for (int j = k; j <= l; ++j) {
    const double w = scale / (static_cast<double>(j) * (static_cast<double>(j) + 1.0));
    out.weights[static_cast<std::size_t>(j - k)] = w;
    hsum.add(-w * std::log(w));
  }
  out.entropy = hsum.sum;
  return out;
}

PowerSumCheck power_sum_check(const std::vector<double>& u, double t) {
  if (!(t > 0.0 && t < 1.0)) throw std::domain_error("power_sum_check: t must lie in (0,1)");
  if (u.empty()) throw std::domain_error("power_sum_check: empty weight vector");
  Kahan total;
  for (double w : u) {
    if (!(w >= 0.0 && w <= 1.0))
      throw std::domain_error("power_sum_check: weights must lie in [0,1]");
    total.add(w);
  }
  if (std::abs(total.sum - 1.0) > 1e-12)
    throw std::domain_error("power_sum_check: weights must sum to 1");

  Kahan powers;
  for (double w : u) powers.add(std::pow(w, t));
  PowerSumCheck out;
  out.lhs = (powers.sum - 1.0) / (1.0 - t);
  if (u.size() >= 2) {
    const double ln_n = std::log(static_cast<double>(u.size()));
    out.empirical_C = std::max(0.0, (out.lhs - ln_n) / ((1.0 - t) * ln_n * ln_n));
  }
  return out;
}

SAlphaResult s_alpha_max(double alpha, double h, int samples, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("s_alpha_max: alpha must lie in (0,1)");
  if (!(h > 0.0 && h < 1.0)) throw std::domain_error("s_alpha_max: h must lie in (0,1)");
  if (samples < 0) throw std::domain_error("s_alpha_max: samples must be >= 0");

  SAlphaResult out;
  const double ah = std::pow(alpha, h);
  const double gh = std::pow(1.0 - alpha, h);
  out.closed_form = gh / (1.0 - ah);

  // The geometric sequence x_j = (1−α)α^{j−1}, summed smallest term first with
  // its analytic tail, must land back on the closed form.
  const int terms = std::clamp(
      static_cast<int>(std::ceil(-18.0 * std::log(10.0) / (h * std::log(alpha)))), 1, 100000);
  Kahan geo;
  geo.add(gh * std::pow(ah, terms) / (1.0 - ah));
  for (int j = terms; j >= 1; --j) geo.add(gh * std::pow(alpha, h * (j - 1.0)));
  out.geometric_value = geo.sum;
  if (std::abs(out.geometric_value - out.closed_form) > 1e-12 * std::max(1.0, out.closed_form))
    throw std::logic_error("s_alpha_max: geometric sequence misses its closed form");

  // Random feasible sequences: ratios r_j = α u^{1/4} ≤ α keep the decay
  // constraint; truncation at 64 terms is exact feasibility (zero-padding).
  std::mt19937_64 gen(seed);
  const auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  constexpr int kLen = 64;
  std::array<double, kLen> x{};
  double sampled = 0.0;
  for (int s = 0; s < samples; ++s) {
    x[0] = 1.0;
    for (int j = 1; j < kLen; ++j) x[j] = x[j - 1] * alpha * std::pow(uniform(), 0.25);
    double mass = 0.0;
    for (int j = kLen - 1; j >= 0; --j) mass += x[j];
    double value = 0.0;
    for (int j = kLen - 1; j >= 0; --j) value += std::pow(x[j] / mass, h);
    sampled = std::max(sampled, value);
  }
  out.sampled_max = sampled;
  if (out.sampled_max > out.closed_form + 1e-9)
    throw std::logic_error("s_alpha_max: a sampled sequence beats the closed form");
  return out;
}

RnBound rn_bound_check(double r, double h, int max_depth) {
  if (!(r > 0.0 && r < 1.0)) throw std::domain_error("rn_bound_check: r must lie in (0,1)");
  if (!(h > 0.0 && h < 1.0)) throw std::domain_error("rn_bound_check: h must lie in (0,1)");
  if (max_depth < 1) throw std::domain_error("rn_bound_check: max_depth must be >= 1");

  const Rational rq = rational_from_double(r);
  const auto dec = decompose_prefix(SystemKind::LinearGauss, rq, max_depth);
  Kahan weight_sum;
  for (const IntervalX& piece : dec.pieces) {
    const Rational w = (*piece.hi_exact - *piece.lo_exact) / rq;
    if (w > 0) weight_sum.add(std::pow(to_double(w), h));
  }
  RnBound out;
  out.R = weight_sum.sum;
  out.bound = std::pow(2.0, 1.0 - h) / (std::pow(2.0, h) - 1.0);
  out.pieces = static_cast<int>(dec.pieces.size());
  if (out.R > out.bound + 1e-12)
    throw std::logic_error("rn_bound_check: weight sum exceeds the halving bound");
  return out;
}

WitnessResult lower_bound_witness(const ConformalMeasure& m, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("lower_bound_witness: eps must lie in (0,1)");
  const long n = m.n();
  const long kappa = window_kappa(n, eps);

  WitnessResult wr;
  if (m.kind() == SystemKind::LinearGauss) {
    wr.F = block_interval(kappa, n);
  } else {
    // The window pushed into the deepest branch; its children are exactly the
    // cylinders (n, j), j = κ..n, so the mass bracket closes at depth 2.
    ExactChart chart(SystemKind::Gauss);
    chart.extend(n);
    wr.F = exact_interval(chart.apply(Rational(1, n + 1)), chart.apply(Rational(1, kappa)),
                          Provenance::CylinderImage);
  }
  wr.ratio = density_ratio(m, wr.F, 4);
  wr.normalized = (wr.ratio - 1.0) / ((1.0 - m.h()) * std::log(static_cast<double>(n)));
  return wr;
}

}  // namespace gaussifs
