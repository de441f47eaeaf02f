#include "gaussifs/conformal.hpp"

#include <algorithm>
#include <cmath>

namespace gaussifs {

struct ConformalMeasure::Memo {
  std::mutex mutex;
  std::map<std::vector<long>, double> table;
};

ConformalMeasure::ConformalMeasure(SystemKind kind, long n, double h, int depth_cap,
                                   std::shared_ptr<CollocationGrid> grid, Eigen::VectorXd dual)
    : kind_(kind),
      n_(n),
      h_(h),
      backend_(kind == SystemKind::LinearGauss ? MeasureBackend::ExactProduct
                                               : MeasureBackend::DualQuadrature),
      depth_cap_(depth_cap),
      grid_(std::move(grid)),
      dual_(std::move(dual)),
      memo_(std::make_shared<Memo>()) {}

ConformalMeasure ConformalMeasure::make(SystemKind kind, long n, double h, int grid_M,
                                        int depth_cap) {
  if (n < 2) throw std::domain_error("ConformalMeasure: need n >= 2");
  if (!(h > 0.0 && h < 1.0)) throw std::domain_error("ConformalMeasure: h must lie in (0,1)");
  if (depth_cap < 1) throw std::domain_error("ConformalMeasure: depth cap must be positive");

  if (kind == SystemKind::LinearGauss) {
    // the measure exists exactly at the Moran root; refuse anything stale
    double sum = 0.0, comp = 0.0;
    for (long k = 1; k <= n; ++k) {
      const double term = std::exp(-h * std::log(static_cast<double>(k) * (k + 1)));
      const double y = term - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    if (std::abs(sum - 1.0) > 1e-10)
      throw StaleDimension("ConformalMeasure: Moran sum differs from 1 at the given exponent");
    return ConformalMeasure(kind, n, h, depth_cap, nullptr, Eigen::VectorXd());
  }

  auto grid = std::make_shared<CollocationGrid>(grid_M);
  const SpectralData data = leading_eigen(assemble_operator(kind, h, n, *grid));
  if (std::abs(data.lambda - 1.0) > 1e-10)
    throw StaleDimension("ConformalMeasure: operator eigenvalue differs from 1 at the given exponent");
  return ConformalMeasure(kind, n, h, depth_cap, std::move(grid), data.dual_weights);
}

double ConformalMeasure::cylinder_mass(const Word& w) const {
  if (w.length() == 0) return 1.0;
  if (w.length() > depth_cap_) throw DepthOverflow("cylinder_mass: word deeper than the cap");
  for (long k : w.syms)
    if (k < 1 || k > n_) throw std::domain_error("cylinder_mass: symbol outside alphabet");

  {
    std::lock_guard<std::mutex> lock(memo_->mutex);
    auto it = memo_->table.find(w.syms);
    if (it != memo_->table.end()) return it->second;
  }

  double mass = 0.0;
  if (backend_ == MeasureBackend::ExactProduct) {
    double logsum = 0.0;
    for (long k : w.syms) logsum += std::log(static_cast<double>(k) * (k + 1));
    mass = std::exp(-h_ * logsum);
  } else {
    // m(g_ω([0,1])) = ∫ |g_ω'|^h dm, quadratured against the dual weights;
    // the derivative is accumulated along the orbit, which stays stable at
    // any depth the cap allows
    for (int i = 0; i < grid_->size(); ++i)
      mass += dual_[i] * std::pow(word_derivative(kind_, w, grid_->nodes()[i]), h_);
  }

  std::lock_guard<std::mutex> lock(memo_->mutex);
  memo_->table.emplace(w.syms, mass);
  return mass;
}

double ConformalMeasure::branch_mass(long k) const {
  Word w;
  w.syms.push_back(k);
  w.bound = n_;
  return cylinder_mass(w);
}

const CollocationGrid& ConformalMeasure::grid() const {
  if (!grid_) throw std::logic_error("grid(): linear backend has no collocation grid");
  return *grid_;
}

const Eigen::VectorXd& ConformalMeasure::dual_weights() const {
  if (!grid_) throw std::logic_error("dual_weights(): linear backend has no quadrature");
  return dual_;
}

namespace {

Rational exact_lo(const IntervalX& iv) {
  return iv.lo_exact ? *iv.lo_exact : rational_from_double(iv.lo);
}
Rational exact_hi(const IntervalX& iv) {
  return iv.hi_exact ? *iv.hi_exact : rational_from_double(iv.hi);
}

}  // namespace

MassBracket ConformalMeasure::interval_mass(const IntervalX& F, int depth) const {
  if (depth < 1) throw std::domain_error("interval_mass: depth must be positive");
  if (depth > depth_cap_) throw DepthOverflow("interval_mass: depth beyond the cap");
  if (!(F.lo >= 0.0 && F.hi <= 1.0) || F.lo > F.hi)
    throw std::domain_error("interval_mass: interval must sit inside [0,1]");

  MassBracket out;
  if (F.degenerate()) return out;  // non-atomic: points carry no mass

  const Rational flo = exact_lo(F);
  const Rational fhi = exact_hi(F);
  if (flo >= fhi) return out;

  // Depth-first over the cylinder tree in exact arithmetic. An interval meets
  // at most two same-depth cylinders partially, so the walk stays narrow: the
  // fully-contained children are credited and closed, the ≤2 straddlers
  // recurse until the depth budget moves them to the upper side.
  Word scratch;
  scratch.bound = n_;
  auto walk = [&](auto&& self, const ExactChart& chart, int level) -> void {
    for (long j = 1; j <= n_; ++j) {
      ExactChart child = chart;
      child.extend(j);
      Rational e0 = child.apply(Rational(0));
      Rational e1 = child.apply(Rational(1));
      if (e0 > e1) std::swap(e0, e1);
      if (e1 <= flo || e0 >= fhi) continue;  // grazing a point carries no mass
      scratch.syms.push_back(j);
      if (e0 >= flo && e1 <= fhi) {
        out.lower += cylinder_mass(scratch);
      } else if (level == depth) {
        out.upper += cylinder_mass(scratch);  // straddler at the budget
      } else {
        self(self, child, level + 1);
      }
      scratch.syms.pop_back();
    }
  };
  walk(walk, ExactChart(kind_), 1);
  out.upper += out.lower;
  return out;
}

double distortion_constant(SystemKind kind, const Word& w,
                           const std::vector<std::pair<double, double>>& pairs) {
  if (w.length() == 0 || kind == SystemKind::LinearGauss) return 0.0;
  double best = 0.0;
  for (const auto& [z, x] : pairs) {
    if (z == x) continue;
    const double dz = word_derivative(kind, w, z);
    const double dx = word_derivative(kind, w, x);
    const double big = std::max(dz, dx), small = std::min(dz, dx);
    best = std::max(best, (big / small - 1.0) / std::abs(z - x));
  }
  return best;
}

double max_distortion_ratio(SystemKind kind, const std::vector<Word>& words,
                            const IntervalX& domain, int npts) {
  if (npts < 2) throw std::domain_error("max_distortion_ratio: need at least two sample points");
  if (domain.degenerate()) return 0.0;
  double worst = 0.0;
  for (const Word& w : words) {
    if (w.length() == 0) continue;
    double dmin = 0.0, dmax = 0.0;
    for (int i = 0; i < npts; ++i) {
      const double y = domain.lo + (domain.hi - domain.lo) * i / (npts - 1);
      const double d = word_derivative(kind, w, y);
      dmin = i == 0 ? d : std::min(dmin, d);
      dmax = i == 0 ? d : std::max(dmax, d);
    }
    worst = std::max(worst, dmax / dmin - 1.0);
  }
  return worst;
}

IntervalX second_iterate_window(SystemKind kind, long n) {
  if (n < 1) throw std::domain_error("second_iterate_window: n must be positive");
  ExactChart chart(kind);
  chart.extend(n);
  chart.extend(n);
  Rational e0 = chart.apply(Rational(1, n + 1));
  Rational e1 = chart.apply(Rational(1));
  if (e0 > e1) std::swap(e0, e1);
  IntervalX out;
  out.lo = to_double(e0);
  out.hi = to_double(e1);
  out.prov = Provenance::Raw;
  out.lo_exact = std::move(e0);
  out.hi_exact = std::move(e1);
  return out;
}

}  // namespace gaussifs
