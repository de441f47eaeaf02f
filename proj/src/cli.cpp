#include "gaussifs/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gaussifs/conformal.hpp"
#include "gaussifs/density.hpp"
#include "gaussifs/detail/compensated.hpp"
#include "gaussifs/dimension.hpp"
#include "gaussifs/grid.hpp"
#include "gaussifs/ifs.hpp"
#include "gaussifs/rational.hpp"
#include "gaussifs/spectral.hpp"

namespace gaussifs {
namespace {

using Kahan = detail::CompensatedSum;

// Numeric encoding of the winning-candidate family for the table rows:
// 0 = full-support fallback, 1..4 = families a..d.
double family_code(char f) {
  switch (f) {
    case 'a': return 1.0;
    case 'b': return 2.0;
    case 'c': return 3.0;
    case 'd': return 4.0;
    default: return 0.0;
  }
}

std::string family_name(char f) {
  return f == '-' ? std::string("fallback") : std::string("family ") + f;
}

std::string interval_text(const IntervalX& iv) {
  return "[" + format_double(iv.lo) + ", " + format_double(iv.hi) + "]";
}

/// Index-parallel map with deterministic output slots: worker i writes only
/// slot i, so results are identical for any thread count. The first worker
/// exception is rethrown on the calling thread.
void parallel_rows(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  int width = std::clamp(jobs, 1, 16);
  if (width > static_cast<int>(count)) width = static_cast<int>(count);
  if (width <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(width));
  for (int j = 0; j < width; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<long> resolve_ns(const RunConfig& cfg, bool allow_infinite) {
  std::vector<long> ns = cfg.ns;
  if (ns.empty() && !cfg.n_spec.empty()) ns = parse_n_spec(cfg.n_spec, cfg.geometric);
  if (ns.empty()) throw std::invalid_argument("this command needs --n (e.g. --n 2..64)");
  if (!allow_infinite) {
    for (long n : ns)
      if (n == kUnboundedAlphabet)
        throw std::invalid_argument("n = inf only makes sense for the operator command");
  }
  return ns;
}

DimensionResult dimension_for(SystemKind kind, long n, int grid_M, double tol) {
  return kind == SystemKind::Gauss ? gauss_dimension(n, grid_M, tol) : moran_dimension(n, tol);
}

}  // namespace

ResultTable cmd_dim(const RunConfig& cfg) {
  const std::vector<long> ns = resolve_ns(cfg, false);
  const double tol = cfg.tolerance("dim_solver", 1e-12);
  const SweepResult sweep = dim_sweep(cfg.kind, ns, cfg.grid_M, tol);

  ResultTable t;
  echo_config(t, cfg);
  t.columns = {"n", "h", "residual", "scaled", "extrapolation"};
  bool any_degenerate = false;
  constexpr std::size_t kWindow = 6;  // trailing rows feeding the running fit
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const SweepRow& r = sweep.rows[i];
    const std::size_t lo = i + 1 > kWindow ? i + 1 - kWindow : 0;
    std::vector<SweepRow> window(sweep.rows.begin() + static_cast<std::ptrdiff_t>(lo),
                                 sweep.rows.begin() + static_cast<std::ptrdiff_t>(i + 1));
    double L = r.scaled, c = 0.0;
    if (window.size() >= 2) fit_scaled_limit(window, L, c);
    if (r.n == 1) any_degenerate = true;
    t.rows.push_back({static_cast<double>(r.n), r.h, r.residual, r.scaled, L});
  }
  if (any_degenerate)
    t.notes.push_back(
        "n = 1 is degenerate: a single contraction has a one-point limit set, h = 0 by "
        "convention");
  if (cfg.explain) {
    t.notes.push_back(
        "scaled = n(1-h); extrapolation = limit L of the fit scaled = L + c*ln(n)/n over the "
        "trailing " +
        std::to_string(kWindow) + " rows");
    t.notes.push_back("full-range fit: L = " + format_double(sweep.limit) +
                      ", c = " + format_double(sweep.slope));
  }
  return t;
}

ResultTable cmd_measure(const RunConfig& cfg) {
  const std::vector<long> ns = resolve_ns(cfg, false);
  const double tol = cfg.tolerance("dim_solver", 1e-12);
  // Families a/b/c never look past depth 3; the exhaustive family follows the
  // configured depth.
  const int depth_D = cfg.families.find('d') != std::string::npos ? cfg.depth : 3;

  struct RowData {
    DimensionResult dim;
    MeasureEstimate est;
    std::vector<std::string> notes;
  };
  std::vector<RowData> rows(ns.size());
  parallel_rows(ns.size(), cfg.jobs, [&](std::size_t i) {
    const long n = ns[i];
    RowData& row = rows[i];
    row.dim = dimension_for(cfg.kind, n, cfg.grid_M, tol);
    const ConformalMeasure m = ConformalMeasure::make(cfg.kind, n, row.dim.h, cfg.grid_M);
    row.est = sup_ratio_search(m, cfg.families, cfg.eps, depth_D);
    if (cfg.explain) {
      row.notes.push_back("n=" + std::to_string(n) + " best: " + family_name(row.est.best_family) +
                          " on " + interval_text(row.est.best) + ", ratio " +
                          format_double(row.est.sup_ratio) + " (" +
                          std::to_string(row.est.candidates) + " candidates)");
      for (char fam : row.est.families) {
        const MeasureEstimate one = sup_ratio_search(m, std::string(1, fam), cfg.eps, depth_D);
        row.notes.push_back("n=" + std::to_string(n) + " family " + fam + " best ratio " +
                            format_double(one.sup_ratio) + " on " + interval_text(one.best));
      }
    }
  });

  ResultTable t;
  echo_config(t, cfg);
  t.columns = {"n", "h", "H_lower", "H_upper", "normalized", "witness_family"};
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const RowData& row = rows[i];
    const double n = static_cast<double>(ns[i]);
    const double gap = 1.0 - row.dim.h;
    const double normalized = (1.0 - row.est.H_upper) / (gap * std::log(n));
    t.rows.push_back({n, row.dim.h, row.est.H_lower, row.est.H_upper, normalized,
                      family_code(row.est.best_family)});
  }
  t.notes.push_back(
      "witness_family: 0 = full-support fallback, 1 = blocks, 2 = pushed blocks, 3 = "
      "eps-windows, 4 = exhaustive cylinders");
  if (cfg.explain)
    t.notes.push_back("normalized = (1 - H_upper) / ((1 - h) ln n); the trend statistic");
  for (const RowData& row : rows)
    for (const std::string& note : row.notes) t.notes.push_back(note);
  return t;
}

ResultTable cmd_operator(const RunConfig& cfg) {
  const std::vector<long> ns = resolve_ns(cfg, true);
  if (cfg.ts.empty()) throw std::invalid_argument("operator needs at least one exponent in --t");

  struct Cell {
    double t;
    long n;
  };
  std::vector<Cell> cells;
  for (double tv : cfg.ts)
    for (long n : ns) cells.push_back({tv, n});

  const CollocationGrid grid(cfg.grid_M);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(cfg.grid_M);
  const double power_tol = cfg.tolerance("power_tol", 1e-13);

  struct OpRow {
    double lambda = 0.0, dlambda = 0.0, probe = 0.0, bound = 0.0;
  };
  std::vector<OpRow> rows(cells.size());
  parallel_rows(cells.size(), cfg.jobs, [&](std::size_t i) {
    const Cell cell = cells[i];
    const bool infinite = cell.n == kUnboundedAlphabet;
    const OperatorMatrix op =
        assemble_operator(cfg.kind, cell.t, infinite ? kInfiniteTruncation : cell.n, grid);
    const SpectralData sd = leading_eigen(op, power_tol);
    OpRow& r = rows[i];
    r.lambda = sd.lambda;
    r.dlambda = std::abs(sd.lambda - 1.0);
    // The truncation probe compares against the full-alphabet operator, which
    // exists for the reciprocal family at t > 3/4 only; elsewhere the probe
    // and bound columns stay at zero.
    if (cfg.kind == SystemKind::Gauss && !infinite && cell.t > 0.75) {
      r.probe = perturbation_probe(cell.t, cell.n, ones, grid);
      r.bound = 8.0 * std::abs(cell.t) * std::pow(static_cast<double>(cell.n), 1.0 - 2.0 * cell.t);
    }
  });

  ResultTable t;
  echo_config(t, cfg);
  t.columns = {"t", "n", "lambda", "dlambda", "probe", "bound"};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double ncol = cells[i].n == kUnboundedAlphabet
                            ? std::numeric_limits<double>::infinity()
                            : static_cast<double>(cells[i].n);
    t.rows.push_back(
        {cells[i].t, ncol, rows[i].lambda, rows[i].dlambda, rows[i].probe, rows[i].bound});
  }
  if (cfg.explain) {
    t.notes.push_back(
        "probe = sup-node norm of the truncation difference applied to f = 1; bound = "
        "8|t| n^(1-2t)");
    t.notes.push_back(
        "probe and bound are 0 where no comparison operator exists (infinite rows, the "
        "affine kind, t <= 3/4)");
  }
  return t;
}

ResultTable cmd_sweep(const RunConfig& cfg) {
  const std::vector<long> ns = resolve_ns(cfg, false);
  const double tol = cfg.tolerance("dim_solver", 1e-12);
  const SweepResult dims = dim_sweep(cfg.kind, ns, cfg.grid_M, tol);
  const int depth_D = cfg.families.find('d') != std::string::npos ? cfg.depth : 3;

  struct RowData {
    MeasureEstimate est;
  };
  std::vector<RowData> rows(ns.size());
  parallel_rows(ns.size(), cfg.jobs, [&](std::size_t i) {
    const ConformalMeasure m =
        ConformalMeasure::make(cfg.kind, ns[i], dims.rows[i].h, cfg.grid_M);
    rows[i].est = sup_ratio_search(m, cfg.families, cfg.eps, depth_D);
  });

  ResultTable t;
  echo_config(t, cfg);
  t.columns = {"n", "h", "residual", "scaled",
               "H_lower", "H_upper", "normalized", "witness_family"};
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const SweepRow& d = dims.rows[i];
    const MeasureEstimate& est = rows[i].est;
    const double normalized =
        (1.0 - est.H_upper) / ((1.0 - d.h) * std::log(static_cast<double>(d.n)));
    t.rows.push_back({static_cast<double>(d.n), d.h, d.residual, d.scaled, est.H_lower,
                      est.H_upper, normalized, family_code(est.best_family)});
  }
  t.notes.push_back("scaled = n(1-h); normalized = (1 - H_upper) / ((1 - h) ln n)");
  if (cfg.explain) {
    t.notes.push_back("scaled-gap fit: L = " + format_double(dims.limit) +
                      ", c = " + format_double(dims.slope));
    for (std::size_t i = 0; i < ns.size(); ++i)
      t.notes.push_back("n=" + std::to_string(ns[i]) + " best: " +
                        family_name(rows[i].est.best_family) + " on " +
                        interval_text(rows[i].est.best));
  }
  return t;
}

// ---------------------------------------------------------------------------
// verify: named invariant suites
// ---------------------------------------------------------------------------

namespace {

class Checker {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && ++failures_ == 1) first_ = what;
  }
  void close(double got, double want, double tol, const std::string& what) {
    check(std::isfinite(got) && std::abs(got - want) <= tol,
          what + ": got " + format_double(got) + ", want " + format_double(want) + " +/- " +
              format_double(tol));
  }
  void at_most(double got, double cap, const std::string& what) {
    check(std::isfinite(got) && got <= cap,
          what + ": " + format_double(got) + " > " + format_double(cap));
  }
  void in_range(double got, double lo, double hi, const std::string& what) {
    check(std::isfinite(got) && got >= lo && got <= hi,
          what + ": " + format_double(got) + " outside [" + format_double(lo) + ", " +
              format_double(hi) + "]");
  }
  int checks() const { return checks_; }
  int failures() const { return failures_; }
  const std::string& first() const { return first_; }

 private:
  int checks_ = 0;
  int failures_ = 0;
  std::string first_;
};

/// Dimension feed for the measure-backed suites. The wrong-h injection goes
/// through here, so every suite that constructs a measure trips the staleness
/// guard when the injection flag is set.
double suite_dimension(const RunConfig& cfg, SystemKind kind, long n) {
  const double h = dimension_for(kind, n, cfg.grid_M, 1e-12).h;
  return cfg.inject_wrong_h ? h + 1e-3 : h;
}

ConformalMeasure suite_measure(const RunConfig& cfg, SystemKind kind, long n) {
  return ConformalMeasure::make(kind, n, suite_dimension(cfg, kind, n), cfg.grid_M);
}

constexpr SystemKind kBothKinds[] = {SystemKind::LinearGauss, SystemKind::Gauss};

const char* kind_tag(SystemKind k) { return k == SystemKind::Gauss ? "gauss" : "linear"; }

Rational exact_lo(const IntervalX& iv) {
  return iv.lo_exact ? *iv.lo_exact : rational_from_double(iv.lo);
}
Rational exact_hi(const IntervalX& iv) {
  return iv.hi_exact ? *iv.hi_exact : rational_from_double(iv.hi);
}

void suite_branch_geometry(const RunConfig&, Checker& c) {
  for (long k = 1; k <= 200; ++k) {
    const Rational bk(1, k), bk1(1, k + 1);
    c.check(bk > bk1, "b_k not decreasing at k=" + std::to_string(k));
    c.check(bk - bk1 == Rational(1, k * (k + 1)),
            "branch interval length at k=" + std::to_string(k));
  }
  Rational total = 0;
  for (long k = 1; k <= 64; ++k) total += Rational(1, k * (k + 1));
  c.check(total == Rational(1) - Rational(1, 65), "branch lengths tile [b_65, 1]");
  for (SystemKind kind : kBothKinds) {
    for (long k = 1; k <= 50; ++k) {
      c.check(apply_branch(kind, k, Rational(0)) == Rational(1, k),
              std::string(kind_tag(kind)) + " branch image of 0 at k=" + std::to_string(k));
      c.check(apply_branch(kind, k, Rational(1)) == Rational(1, k + 1),
              std::string(kind_tag(kind)) + " branch image of 1 at k=" + std::to_string(k));
    }
  }
  for (long k = 1; k <= 20; ++k) {
    c.close(std::abs(branch_derivative(SystemKind::LinearGauss, k, 0.37)),
            1.0 / (static_cast<double>(k) * (k + 1)), 1e-15, "affine slope at k=" + std::to_string(k));
    c.close(std::abs(branch_derivative(SystemKind::Gauss, k, 0.0)),
            1.0 / (static_cast<double>(k) * k), 1e-15,
            "reciprocal derivative at 0, k=" + std::to_string(k));
  }
}

void suite_cylinder_geometry(const RunConfig&, Checker& c) {
  const long n = 5;
  for (SystemKind kind : kBothKinds) {
    const std::string tag = kind_tag(kind);
    Word parent;
    parent.syms = {2};
    parent.bound = n;
    const IntervalX piv = cylinder_interval(kind, parent);
    std::vector<IntervalX> children;
    for (long j = 1; j <= n; ++j) {
      Word w;
      w.syms = {2, j};
      w.bound = n;
      children.push_back(cylinder_interval(kind, w));
    }
    for (const IntervalX& ch : children) {
      c.check(exact_lo(ch) >= exact_lo(piv) && exact_hi(ch) <= exact_hi(piv),
              tag + " child cylinder escapes its parent");
      c.check(exact_lo(ch) < exact_hi(ch), tag + " child cylinder degenerate");
    }
    std::sort(children.begin(), children.end(),
              [](const IntervalX& a, const IntervalX& b) { return exact_lo(a) < exact_lo(b); });
    for (std::size_t i = 0; i + 1 < children.size(); ++i)
      c.check(exact_hi(children[i]) == exact_lo(children[i + 1]),
              tag + " depth-2 children do not tile contiguously");
    // The child union is the image of [b_{n+1}, 1] under the branch map.
    const Rational lo_img = apply_branch(kind, 2, Rational(1));
    const Rational hi_img = apply_branch(kind, 2, Rational(1, n + 1));
    c.check(exact_lo(children.front()) == std::min(lo_img, hi_img) &&
                exact_hi(children.back()) == std::max(lo_img, hi_img),
            tag + " child union misses the truncated image");

    Word w1, w12, w123;
    w1.syms = {1};
    w12.syms = {1, 2};
    w123.syms = {1, 2, 3};
    const IntervalX c1 = cylinder_interval(kind, w1);
    const IntervalX c12 = cylinder_interval(kind, w12);
    const IntervalX c123 = cylinder_interval(kind, w123);
    c.check(exact_lo(c12) >= exact_lo(c1) && exact_hi(c12) <= exact_hi(c1),
            tag + " (1,2) not in (1)");
    c.check(exact_lo(c123) >= exact_lo(c12) && exact_hi(c123) <= exact_hi(c12),
            tag + " (1,2,3) not in (1,2)");
  }
}

void suite_coding_roundtrip(const RunConfig&, Checker& c) {
  const double xs[] = {0.30103, 0.634, 0.97, 0.3183098861837907};
  for (SystemKind kind : kBothKinds) {
    const std::string tag = kind_tag(kind);
    for (double x : xs) {
      const CodingResult cr = cf_encode(kind, x, 12);
      c.check(cr.word.length() >= 1, tag + " empty coding for x=" + format_double(x));
      const IntervalX iv = cylinder_interval(kind, cr.word);
      const Rational xq = rational_from_double(x);
      c.check(exact_lo(iv) <= xq && xq <= exact_hi(iv),
              tag + " coding cylinder misses x=" + format_double(x));
    }
    const CodingResult half = cf_encode(kind, 0.5, 8);
    c.check(half.endpoint_hit, tag + " x=1/2 should hit an endpoint");
    c.check(half.word.syms == std::vector<long>{2}, tag + " x=1/2 should code as (2)");
  }
}

void suite_prefix_pieces(const RunConfig& cfg, Checker& c) {
  std::mt19937_64 rng(cfg.seed);
  for (SystemKind kind : kBothKinds) {
    const std::string tag = kind_tag(kind);
    for (int trial = 0; trial < 40; ++trial) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const Rational r = rational_from_double(0.02 + 0.96 * u);
      const PrefixDecomposition dec = decompose_prefix(kind, r, 40);
      Rational covered = 0;
      Rational prev_hi = 0;
      bool ordered = true, inside = true;
      for (const IntervalX& p : dec.pieces) {
        if (exact_lo(p) < prev_hi) ordered = false;
        if (exact_lo(p) < 0 || exact_hi(p) > r) inside = false;
        covered += exact_hi(p) - exact_lo(p);
        prev_hi = exact_hi(p);
      }
      c.check(ordered, tag + " pieces out of order");
      c.check(inside, tag + " piece escapes [0, r]");
      if (dec.remainder) {
        // The remainder is the whole cylinder still straddling r, not a piece
        // clipped at r.
        c.check(exact_lo(*dec.remainder) <= r && r <= exact_hi(*dec.remainder),
                tag + " remainder must straddle r");
        c.check(exact_lo(*dec.remainder) >= prev_hi, tag + " remainder overlaps a piece");
        c.check(bool(dec.remainder_word), tag + " remainder without its word");
        if (dec.remainder_word) {
          const IntervalX cyl = cylinder_interval(kind, *dec.remainder_word);
          c.check(exact_lo(cyl) == exact_lo(*dec.remainder) &&
                      exact_hi(cyl) == exact_hi(*dec.remainder),
                  tag + " remainder must be its own cylinder");
        }
      }
      // Pieces never cross r, and the gaps between them lie outside the limit
      // set, so the piece lengths alone never exceed r.
      c.check(covered <= r, tag + " covered length exceeds r");
      c.check(dec.pieces.size() >= 1 || dec.remainder, tag + " empty decomposition");
    }
  }
}

void suite_halving_lemmas(const RunConfig& cfg, Checker& c) {
  std::mt19937_64 rng(cfg.seed + 1);
  for (int trial = 0; trial < 100; ++trial) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const Rational r = rational_from_double(0.05 + 0.9 * u);
    const PrefixDecomposition dec = decompose_prefix(SystemKind::LinearGauss, r, 60);
    std::vector<Rational> len;
    for (const IntervalX& p : dec.pieces) len.push_back(exact_hi(p) - exact_lo(p));
    // 1-indexed pieces: even-position piece never exceeds its predecessor,
    // odd-position pieces shrink by at least a factor 4 every other step.
    for (std::size_t m = 2; m <= len.size(); m += 2)
      c.check(len[m - 1] <= len[m - 2], "even piece " + std::to_string(m) + " too long");
    for (std::size_t m = 1; m + 2 <= len.size(); m += 2)
      c.check(4 * len[m + 1] <= len[m - 1],
              "odd piece " + std::to_string(m + 2) + " shrinks slower than 1/4");
    for (std::size_t m = 1; m <= len.size(); m += 2)
      c.check(len[m - 1] > 0, "odd piece " + std::to_string(m) + " degenerate");
  }
}

void suite_grid_interpolation(const RunConfig&, Checker& c) {
  const CollocationGrid g(24);
  const Eigen::VectorXd& x = g.nodes();
  c.check(g.size() == 24 && x.size() == 24, "grid size mismatch");
  c.check(x[0] == 0.0 && x[23] == 1.0, "grid endpoints must be exact");
  bool ascending = true;
  for (int i = 0; i + 1 < 24; ++i)
    if (x[i] >= x[i + 1]) ascending = false;
  c.check(ascending, "grid nodes not ascending");
  for (int j : {0, 7, 23}) {
    const Eigen::VectorXd row = g.interp_row(x[j]);
    double err = 0.0;
    for (int i = 0; i < 24; ++i) err = std::max(err, std::abs(row[i] - (i == j ? 1.0 : 0.0)));
    c.at_most(err, 1e-14, "indicator row at node " + std::to_string(j));
  }
  Eigen::VectorXd f(24);
  for (int i = 0; i < 24; ++i) f[i] = std::pow(x[i], 5);
  for (double y : {0.13, 0.55, 0.92})
    c.close(g.interp_row(y).dot(f), std::pow(y, 5), 1e-12,
            "degree-5 reproduction at y=" + format_double(y));
}

void suite_differentiation(const RunConfig& cfg, Checker& c) {
  const CollocationGrid g(24);
  const Eigen::VectorXd& x = g.nodes();
  Eigen::VectorXd f(24);
  for (int i = 0; i < 24; ++i) f[i] = x[i] * x[i] * x[i];
  const Eigen::VectorXd df = g.diff_matrix() * f;
  double err = 0.0;
  for (int i = 0; i < 24; ++i) err = std::max(err, std::abs(df[i] - 3.0 * x[i] * x[i]));
  c.at_most(err, cfg.tolerance("diff_accuracy", 1e-10), "cubic differentiation error");
}

void suite_hurwitz_tail(const RunConfig&, Checker& c) {
  const std::pair<double, double> args[] = {{2.0, 2000.0}, {2.5, 4096.0}, {1.9, 800.0}, {3.0, 500.0}};
  for (const auto& [s, a] : args) {
    const int N = 200000;
    Kahan partial;
    for (int j = N - 1; j >= 0; --j) partial.add(std::pow(a + j, -s));
    const double integral = std::pow(a + N, 1.0 - s) / (s - 1.0);
    const double first = std::pow(a + N, -s);
    const double z = hurwitz_zeta(s, a);
    const std::string what =
        "zeta(" + format_double(s) + ", " + format_double(a) + ") vs bracketed direct sum";
    c.check(z >= partial.sum + integral - 1e-12 * z && z <= partial.sum + integral + first + 1e-12 * z,
            what + ": got " + format_double(z));
  }
}

void suite_operator_rows(const RunConfig&, Checker& c) {
  const CollocationGrid grid(32);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(32);
  {
    const OperatorMatrix op = assemble_operator(SystemKind::Gauss, 1.0, 50, grid);
    const Eigen::VectorXd img = op.A * ones;
    double err = 0.0;
    for (int i = 0; i < 32; ++i) {
      Kahan want;
      for (long k = 50; k >= 1; --k) {
        const double d = grid.nodes()[i] + static_cast<double>(k);
        want.add(1.0 / (d * d));
      }
      err = std::max(err, std::abs(img[i] - want.sum));
    }
    c.at_most(err, 1e-13, "reciprocal operator row sums vs direct series");
    c.check(!op.below_convergence_region, "t=1 flagged below the convergence region");
  }
  {
    const OperatorMatrix op = assemble_operator(SystemKind::LinearGauss, 0.8, 50, grid);
    const Eigen::VectorXd img = op.A * ones;
    Kahan want;
    for (long k = 50; k >= 1; --k) want.add(std::pow(1.0 / (static_cast<double>(k) * (k + 1)), 0.8));
    double err = 0.0;
    for (int i = 0; i < 32; ++i) err = std::max(err, std::abs(img[i] - want.sum));
    c.at_most(err, 1e-13, "affine operator applied to 1 must be constant");
  }
  c.check(assemble_operator(SystemKind::Gauss, 0.6, 10, grid).below_convergence_region,
          "t=0.6 must be flagged below the convergence region");
}

void suite_eigen_identity(const RunConfig& cfg, Checker& c) {
  const CollocationGrid grid(cfg.grid_M);
  const OperatorMatrix op = assemble_operator(SystemKind::Gauss, 1.0, kInfiniteTruncation, grid);
  const double ln2 = std::log(2.0);
  Eigen::VectorXd rho(cfg.grid_M);
  for (int i = 0; i < cfg.grid_M; ++i) rho[i] = 1.0 / ((1.0 + grid.nodes()[i]) * ln2);
  const Eigen::VectorXd img = op.A * rho;
  double err = 0.0;
  for (int i = 0; i < cfg.grid_M; ++i) err = std::max(err, std::abs(img[i] - rho[i]));
  c.at_most(err, cfg.tolerance("eigen_identity", 1e-12),
            "fixed-point identity for the analytic eigenfunction");
}

void suite_dual_structure(const RunConfig& cfg, Checker& c) {
  const CollocationGrid grid(cfg.grid_M);
  const OperatorMatrix op = assemble_operator(SystemKind::Gauss, 1.0, kInfiniteTruncation, grid);
  const SpectralData sd = leading_eigen(op);
  c.close(sd.lambda, 1.0, cfg.tolerance("lambda_unit", 1e-10), "leading eigenvalue at t=1");
  c.at_most(sd.residual, 1e-12, "power-iteration residual");
  Kahan total;
  double dual_min = std::numeric_limits<double>::infinity();
  for (int i = cfg.grid_M - 1; i >= 0; --i) {
    total.add(sd.dual_weights[i]);
    dual_min = std::min(dual_min, sd.dual_weights[i]);
  }
  c.close(total.sum, 1.0, 1e-12, "dual weights must sum to 1");
  c.check(dual_min > 0.0, "full-alphabet dual weights must be positive, min " +
                              format_double(dual_min));
  c.close(sd.dual_weights.dot(sd.rho), 1.0, cfg.tolerance("pairing", 1e-10),
          "dual/eigenfunction pairing");
  double rho_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.grid_M; ++i) rho_min = std::min(rho_min, sd.rho[i]);
  c.check(rho_min > 0.0, "eigenfunction must be positive");
}

void suite_moran_residuals(const RunConfig& cfg, Checker& c) {
  const std::vector<DimensionResult> sweep = moran_dimension_sweep(10000);
  const double tol = cfg.tolerance("moran_residual", 1e-12);
  double worst = 0.0;
  bool increasing = true;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    worst = std::max(worst, std::abs(sweep[i].residual));
    if (i > 0 && sweep[i].h <= sweep[i - 1].h) increasing = false;
  }
  c.at_most(worst, tol, "worst power-sum residual over n <= 10^4");
  c.check(increasing, "h_n must increase strictly in n");
  c.close(sweep.front().h, 0.6009668516136755, 1e-12, "two-map dimension");
  c.close(sweep.back().h, moran_dimension(10000).h, 1e-12, "sweep vs direct root at n = 10^4");
  const DimensionResult one = moran_dimension(1);
  c.check(one.degenerate && one.h == 0.0, "n = 1 must be the degenerate single-map case");
}

void suite_gauss_pressure(const RunConfig& cfg, Checker& c) {
  double prev = 0.0;
  for (long n : {4L, 16L, 64L}) {
    const DimensionResult r = gauss_dimension(n, cfg.grid_M);
    const std::string tag = "n=" + std::to_string(n);
    c.at_most(std::abs(r.lambda_residual), cfg.tolerance("pressure_residual", 1e-12),
              tag + " eigenvalue residual at the root");
    c.at_most(std::abs(r.residual), cfg.tolerance("grid_agreement", 1e-8),
              tag + " two-grid disagreement");
    c.in_range(r.h, 0.5, 1.0, tag + " dimension out of range");
    c.check(r.h > prev, tag + " dimension must increase with n");
    prev = r.h;
  }
  c.close(gauss_dimension(64, cfg.grid_M).h, 0.989933210754, 1e-9, "reciprocal dimension at n=64");
  const DimensionResult two = gauss_dimension(2, cfg.grid_M);
  c.close(two.h, 0.5312805062771805, 1e-10, "reciprocal dimension at n=2");
  c.check(two.below_convergence_region, "n=2 root lies below the convergence region");
}

void suite_chi_constant(const RunConfig& cfg, Checker& c) {
  const LyapunovConstant L = lyapunov_chi(1e-9);
  c.check(L.lo <= L.chi && L.chi <= L.hi, "midpoint outside its own bracket");
  c.at_most(L.hi - L.lo, cfg.tolerance("chi_bracket", 1e-6), "bracket width");
  c.in_range(2.04627745285588, L.lo - 1e-12, L.hi + 1e-12, "known digits escape the bracket");
  c.check(L.terms >= 1000, "suspiciously few series terms");
  c.check(L.tail_bound >= 0.0, "negative tail bound");
}

void suite_linear_crosscheck(const RunConfig& cfg, Checker& c) {
  const CollocationGrid grid(32);
  const double h64 = moran_dimension(64).h;
  const SpectralData sd = leading_eigen(assemble_operator(SystemKind::LinearGauss, h64, 64, grid));
  c.close(sd.lambda, 1.0, cfg.tolerance("operator_crosscheck", 1e-9),
          "affine operator eigenvalue at the root exponent");
  const SpectralData lin2 = leading_eigen(assemble_operator(SystemKind::LinearGauss, 1.0, 2, grid));
  c.close(lin2.lambda, 2.0 / 3.0, 1e-13, "affine two-map eigenvalue at t=1 is the length sum");
  const SpectralData rec2 = leading_eigen(assemble_operator(SystemKind::Gauss, 1.0, 2, grid));
  c.close(rec2.lambda, 0.561326919954431, 1e-9, "reciprocal two-map eigenvalue at t=1");
}

void suite_scaled_limits(const RunConfig& cfg, Checker& c) {
  const double chi = lyapunov_chi(1e-9).chi;
  const double h4096 = moran_dimension(4096).h;
  c.in_range(4096.0 * (1.0 - h4096) * chi, 0.98, 1.02, "affine scaled gap times chi at n=4096");
  const double h64 = gauss_dimension(64, cfg.grid_M).h;
  c.in_range(64.0 * (1.0 - h64), 0.55, 0.75, "reciprocal scaled gap at n=64");
  const double h256 = gauss_dimension(256, cfg.grid_M).h;
  c.in_range(256.0 * (1.0 - h256), 0.58, 0.66, "reciprocal scaled gap at n=256");
  c.check(256.0 * (1.0 - h256) < 64.0 * (1.0 - h64), "scaled gap must decrease toward its limit");
}

void suite_measure_totals(const RunConfig& cfg, Checker& c) {
  for (SystemKind kind : kBothKinds) {
    for (long n : {2L, 16L}) {
      const ConformalMeasure m = suite_measure(cfg, kind, n);
      const std::string tag = std::string(kind_tag(kind)) + " n=" + std::to_string(n);
      Kahan total;
      double least = std::numeric_limits<double>::infinity();
      for (long k = n; k >= 1; --k) {
        const double mk = m.branch_mass(k);
        total.add(mk);
        least = std::min(least, mk);
      }
      c.close(total.sum, 1.0, cfg.tolerance("mass_total", 1e-10), tag + " branch masses");
      c.check(least >= 0.0, tag + " negative branch mass " + format_double(least));
      c.close(m.cylinder_mass(Word{}), 1.0, 1e-15, tag + " empty-word mass");
    }
  }
}

void suite_measure_additivity(const RunConfig& cfg, Checker& c) {
  const long n = 8;
  for (SystemKind kind : kBothKinds) {
    const ConformalMeasure m = suite_measure(cfg, kind, n);
    const double tol = kind == SystemKind::Gauss ? cfg.tolerance("additivity_gauss", 1e-8)
                                                 : cfg.tolerance("additivity_linear", 1e-12);
    for (std::vector<long> stem : {std::vector<long>{1}, {2}, {3, 1}}) {
      Word w;
      w.syms = stem;
      w.bound = n;
      Kahan children;
      for (long j = n; j >= 1; --j) {
        Word wj = w;
        wj.syms.push_back(j);
        children.add(m.cylinder_mass(wj));
      }
      c.close(children.sum, m.cylinder_mass(w), tol,
              std::string(kind_tag(kind)) + " additivity under word of length " +
                  std::to_string(w.length()));
    }
  }
}

void suite_interval_brackets(const RunConfig& cfg, Checker& c) {
  const long n = 16;
  for (SystemKind kind : kBothKinds) {
    const ConformalMeasure m = suite_measure(cfg, kind, n);
    const std::string tag = kind_tag(kind);
    IntervalX F;
    F.lo = 0.3;
    F.hi = 0.6;
    const auto b4 = m.interval_mass(F, 4);
    const auto b8 = m.interval_mass(F, 8);
    c.check(b4.lower <= b4.upper + 1e-15, tag + " depth-4 bracket inverted");
    c.check(b8.lower >= b4.lower - 1e-15 && b8.upper <= b4.upper + 1e-15,
            tag + " refinement must nest the bracket");
    c.at_most(b8.width(), b4.width() + 1e-15, tag + " refinement must narrow the bracket");

    IntervalX full;
    full.lo = 1.0 / static_cast<double>(n + 1);
    full.hi = 1.0;
    full.lo_exact = Rational(1, n + 1);
    full.hi_exact = Rational(1);
    const auto fb = m.interval_mass(full, 4);
    c.close(fb.lower, 1.0, 1e-10, tag + " full-support lower mass");
    c.close(fb.upper, 1.0, 1e-10, tag + " full-support upper mass");

    IntervalX hole;
    hole.lo = 0.0;
    hole.hi = 0.4 / static_cast<double>(n + 1);
    const auto hb = m.interval_mass(hole, 4);
    c.check(hb.upper == 0.0, tag + " mass below the support must vanish, upper " +
                                 format_double(hb.upper));
  }
}

void suite_stale_guard(const RunConfig& cfg, Checker& c) {
  for (SystemKind kind : kBothKinds) {
    const double h = dimension_for(kind, 8, cfg.grid_M, 1e-12).h;
    bool threw = false;
    try {
      ConformalMeasure::make(kind, 8, h + 1e-3, cfg.grid_M);
    } catch (const StaleDimension&) {
      threw = true;
    }
    c.check(threw, std::string(kind_tag(kind)) + " stale exponent must be rejected");
    bool clean = true;
    try {
      ConformalMeasure::make(kind, 8, h, cfg.grid_M);
    } catch (const StaleDimension&) {
      clean = false;
    }
    c.check(clean, std::string(kind_tag(kind)) + " correct exponent must be accepted");
  }
}

void suite_density_duality(const RunConfig& cfg, Checker& c) {
  const long n = 16;
  const ConformalMeasure m = suite_measure(cfg, SystemKind::LinearGauss, n);
  const MeasureEstimate est = sup_ratio_search(m, "ac", cfg.eps, 3);
  c.close(est.H_upper * est.sup_ratio, 1.0, 1e-15, "H_upper must invert the supremum");
  const std::vector<Candidate> cands =
      candidate_families(SystemKind::LinearGauss, n, "ac", cfg.eps, 3);
  c.check(cands.size() >= 10, "candidate enumeration too small");
  double best = 0.0;
  for (const Candidate& cand : cands) {
    const double r = density_ratio(m, cand.iv, 10);
    best = std::max(best, r);
    c.at_most(r, est.sup_ratio * (1.0 + cfg.tolerance("duality", 1e-10)),
              "independent ratio beats the search supremum");
  }
  c.close(best, est.sup_ratio, est.sup_ratio * cfg.tolerance("duality", 1e-10),
          "supremum must be attained by an enumerated candidate");
}

void suite_density_bounds(const RunConfig& cfg, Checker& c) {
  for (SystemKind kind : kBothKinds) {
    for (long n : {2L, 16L, 64L}) {
      const ConformalMeasure m = suite_measure(cfg, kind, n);
      const MeasureEstimate est = sup_ratio_search(m, "abc", cfg.eps, 3);
      const std::string tag = std::string(kind_tag(kind)) + " n=" + std::to_string(n);
      c.check(est.sup_ratio >= 1.0 - 1e-12, tag + " fallback keeps the supremum >= 1");
      c.at_most(est.H_upper, 1.0 + cfg.tolerance("upper_slack", 1e-9), tag + " H_upper above 1");
      c.at_most(est.H_lower, est.H_upper + 1e-12, tag + " analytic lower above certified upper");
      c.check(est.H_lower > 0.0 && est.cap >= 1.0, tag + " degenerate lower bound");
      c.check(est.families == "abc", tag + " canonical family echo");
      c.check(est.candidates >= 4, tag + " too few candidates");
      if (kind == SystemKind::Gauss) {
        const double sharp = std::pow(1.0 - 1.0 / (3.0 * static_cast<double>(n) * n), est.h);
        c.at_most(est.H_upper, sharp + cfg.tolerance("upper_slack", 1e-9),
                  tag + " sharp small-n ceiling");
      }
    }
  }
  const ConformalMeasure lin64 = suite_measure(cfg, SystemKind::LinearGauss, 64);
  c.close(sup_ratio_search(lin64, "abc", cfg.eps, 3).H_upper, 0.9715759652, 1e-6,
          "pinned affine H_upper at n=64");
  const ConformalMeasure g16 = suite_measure(cfg, SystemKind::Gauss, 16);
  c.close(sup_ratio_search(g16, "abc", cfg.eps, 3).H_upper, 0.9041334288, 1e-6,
          "pinned reciprocal H_upper at n=16");
}

void suite_witness_checks(const RunConfig& cfg, Checker& c) {
  {
    const ConformalMeasure m = suite_measure(cfg, SystemKind::LinearGauss, 1024);
    const WitnessResult w = lower_bound_witness(m, 0.3);
    c.check(w.ratio > 1.0, "affine witness ratio must exceed 1");
    c.in_range(w.normalized, 0.5, 1.05, "affine witness normalized gap at n=1024");
    const WitnessResult tiny = lower_bound_witness(m, 0.999);
    c.check(tiny.normalized < w.normalized,
            "a thinner window must certify a smaller normalized gap");
    c.check(exact_lo(w.F) < exact_hi(w.F), "degenerate witness window");
  }
  {
    const ConformalMeasure m = suite_measure(cfg, SystemKind::Gauss, 64);
    const WitnessResult w = lower_bound_witness(m, 0.3);
    c.check(w.ratio > 1.0, "reciprocal witness ratio must exceed 1");
    c.in_range(w.normalized, 0.3, 1.05, "reciprocal witness normalized gap at n=64");
  }
}

void suite_entropy_partition(const RunConfig&, Checker& c) {
  const PartitionEntropy e = entropy_partition(2, 3);
  c.check(e.weights.size() == 2, "partition (2,3) must have two blocks");
  if (e.weights.size() == 2) {
    c.close(e.weights[0], 2.0 / 3.0, 1e-15, "weight of the k=2 block");
    c.close(e.weights[1], 1.0 / 3.0, 1e-15, "weight of the k=3 block");
  }
  c.close(e.entropy, 0.6365141682948128, 1e-12, "entropy of the (2,3) partition");

  const PartitionEntropy wide = entropy_partition(9, 99);
  Kahan total;
  for (auto it = wide.weights.rbegin(); it != wide.weights.rend(); ++it) total.add(*it);
  c.close(total.sum, 1.0, 1e-12, "partition weights must sum to 1");
  c.check(entropy_partition(1, 1).entropy == 0.0, "single-block partition entropy");

  auto window_stat = [](long n) {
    const long k = static_cast<long>(std::floor(static_cast<double>(n) -
                                                std::pow(static_cast<double>(n), 0.7))) + 1;
    return entropy_partition(static_cast<int>(k), static_cast<int>(n - 1)).entropy /
           std::log(static_cast<double>(n));
  };
  const double s3 = window_stat(1000), s4 = window_stat(10000);
  c.check(s4 >= 0.65, "window entropy ratio at n=10^4: " + format_double(s4));
  c.check(s4 > s3, "window entropy ratio must increase with n");
}

void suite_power_sums(const RunConfig&, Checker& c) {
  {
    std::vector<double> u(1000, 1e-3);
    const PowerSumCheck p = power_sum_check(u, 0.9);
    c.close(p.lhs, (std::pow(1000.0, 0.1) - 1.0) / 0.1, 1e-9, "uniform power sum");
    c.in_range(p.empirical_C, 0.0, 1.0, "uniform empirical constant");
  }
  c.close(power_sum_check({0.5, 0.5}, 0.9).lhs, 0.7177346253629314, 1e-12,
          "two-block power sum at t=0.9");
  c.check(power_sum_check({1.0}, 0.5).lhs == 0.0, "trivial partition must give 0");
  bool threw = false;
  try {
    power_sum_check({0.5, 0.4}, 0.9);
  } catch (const std::domain_error&) {
    threw = true;
  }
  c.check(threw, "non-probability weights must be rejected");
}

void suite_s_alpha(const RunConfig& cfg, Checker& c) {
  const SAlphaResult r = s_alpha_max(0.5, 0.5, 2000, cfg.seed);
  c.close(r.closed_form, 2.414213562373095, 1e-12, "closed form at alpha=h=1/2");
  c.close(r.geometric_value, r.closed_form, 1e-12, "geometric sequence must attain the maximum");
  c.at_most(r.sampled_max, r.closed_form + cfg.tolerance("salpha_slack", 1e-9),
            "sampled sequence beats the closed form");
  c.check(r.sampled_max >= 0.8 * r.closed_form, "sampler suspiciously far from the maximum");
  const SAlphaResult r2 = s_alpha_max(0.7, 0.3, 500, cfg.seed + 7);
  c.at_most(r2.sampled_max, r2.closed_form + cfg.tolerance("salpha_slack", 1e-9),
            "sampled sequence beats the closed form at alpha=0.7");
}

void suite_rn_weights(const RunConfig& cfg, Checker& c) {
  const double h64 = moran_dimension(64).h;
  const double bound = std::pow(2.0, 1.0 - h64) / (std::pow(2.0, h64) - 1.0);
  std::mt19937_64 rng(cfg.seed + 2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const RnBound rb = rn_bound_check(0.05 + 0.9 * u, h64, 80);
    worst = std::max(worst, rb.R);
    c.at_most(rb.R, rb.bound + cfg.tolerance("rn_slack", 1e-12), "piece-weight sum over bound");
    c.check(rb.pieces >= 1 && rb.R > 0.0, "degenerate decomposition in the weight check");
  }
  c.at_most(worst, bound + 1e-12, "worst sampled piece-weight sum");
  const RnBound fixed = rn_bound_check(0.3, 0.9, 80);
  c.close(fixed.R, 1.060053574048, 1e-9, "pinned piece-weight sum at r=0.3, h=0.9");
  c.check(fixed.pieces == 50, "pinned piece count at r=0.3, got " + std::to_string(fixed.pieces));
}

void suite_distortion_scaling(const RunConfig&, Checker& c) {
  std::vector<Word> words;
  for (long a = 1; a <= 2; ++a)
    for (long b = 0; b <= 2; ++b)
      for (long cc = 0; cc <= 2; ++cc) {
        Word w;
        w.syms = {a};
        if (b) w.syms.push_back(b);
        if (b && cc) w.syms.push_back(cc);
        words.push_back(w);
      }
  std::vector<double> lnn, lnr;
  for (long n : {4L, 8L, 16L, 32L}) {
    const IntervalX win = second_iterate_window(SystemKind::Gauss, n);
    const double r = max_distortion_ratio(SystemKind::Gauss, words, win, 9);
    c.check(r > 0.0, "distortion ratio must be positive at n=" + std::to_string(n));
    lnn.push_back(std::log(static_cast<double>(n)));
    lnr.push_back(std::log(r));
    c.check(max_distortion_ratio(SystemKind::LinearGauss, words, win, 9) == 0.0,
            "affine maps must have zero distortion");
  }
  c.close(std::exp(lnr[0]), 3.466202e-3, 1e-8, "pinned distortion ratio at n=4");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lnn.size(); ++i) {
    sx += lnn[i];
    sy += lnr[i];
    sxx += lnn[i] * lnn[i];
    sxy += lnn[i] * lnr[i];
  }
  const double m = static_cast<double>(lnn.size());
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  c.in_range(slope, -4.5, -3.5, "log-log decay rate of the distortion ratio");
}

void suite_probe_bounds(const RunConfig& cfg, Checker& c) {
  const CollocationGrid grid(cfg.grid_M);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(cfg.grid_M);
  const double p100 = perturbation_probe(1.0, 100, ones, grid);
  c.close(p100, 9.950167e-3, 1e-6, "pinned truncation probe at t=1, n=100");
  c.at_most(p100, 8.0 / 100.0, "probe must respect the tail bound at t=1");
  c.at_most(perturbation_probe(0.9, 100, ones, grid), 8.0 * 0.9 * std::pow(100.0, -0.8),
            "probe must respect the tail bound at t=0.9");
  std::vector<double> dl;
  for (long n : {50L, 100L, 200L}) {
    const EigenCloseness ec = eigen_closeness_probe(1.0, n, grid);
    dl.push_back(ec.dlambda);
    c.at_most(ec.dlambda, 8.0 / static_cast<double>(n),
              "eigenvalue shift over tail bound at n=" + std::to_string(n));
  }
  c.in_range(dl[0] / dl[1], 1.7, 2.3, "eigenvalue shift halving 50 -> 100");
  c.in_range(dl[1] / dl[2], 1.7, 2.3, "eigenvalue shift halving 100 -> 200");
}

void suite_table_roundtrip(const RunConfig& cfg, Checker& c) {
  RunConfig probe = cfg;
  probe.n_spec = "2,4,8";
  probe.ns.clear();
  probe.eps = {0.25};
  probe.ts = {0.9, 1.1};
  probe.tol["eigen_identity"] = 1e-13;
  ResultTable t;
  echo_config(t, probe);
  const RunConfig back = config_from_metadata(t);
  ResultTable t2;
  echo_config(t2, back);
  c.check(t.metadata == t2.metadata, "configuration echo must round-trip");

  for (double v : {0.1, 1.0 / 3.0, 0.6079271018540267, 1e300, 5.0}) {
    const std::string s = format_double(v);
    c.check(std::strtod(s.c_str(), nullptr) == v, "format_double must round-trip " + s);
  }
  c.check(format_double(std::numeric_limits<double>::infinity()) == "inf" &&
              format_double(std::nan("")) == "nan",
          "non-finite formatting");

  c.check(parse_n_spec("2..16", true) == std::vector<long>({2, 4, 8, 16}),
          "geometric range expansion");
  c.check(parse_n_spec("inf", false) == std::vector<long>({kUnboundedAlphabet}),
          "inf token expansion");
  c.check(parse_n_spec("3,1", false) == std::vector<long>({3, 1}), "order must be preserved");

  t.columns = {"a", "b"};
  t.rows = {{1.0, 2.0}};
  const std::string csv = to_csv(t);
  c.check(csv.rfind("# version=", 0) == 0, "CSV must open with the version echo");
  c.check(csv.find("a,b\n") != std::string::npos, "CSV header row missing");
  const std::string json = to_json(t);
  c.check(json.find("\"columns\"") != std::string::npos, "JSON must carry the column list");
}

void suite_cli_determinism(const RunConfig& cfg, Checker& c) {
  RunConfig small = cfg;
  small.kind = SystemKind::Gauss;
  small.ns.clear();
  small.n_spec = "4,8";
  small.format = "csv";
  small.out.clear();
  small.explain = false;
  c.check(to_csv(cmd_dim(small)) == to_csv(cmd_dim(small)),
          "dim output must be byte-deterministic");
  small.n_spec = "4";
  const std::string once = to_csv(cmd_measure(small));
  c.check(once == to_csv(cmd_measure(small)), "measure output must be byte-deterministic");
  RunConfig wide = small;
  wide.jobs = 4;
  // jobs echoes into the metadata, so compare data rows only.
  const std::string body = once.substr(once.find("\nn,"));
  const std::string wide_csv = to_csv(cmd_measure(wide));
  c.check(wide_csv.substr(wide_csv.find("\nn,")) == body,
          "measure rows must not depend on the worker count");
}

struct SuiteEntry {
  const char* name;
  void (*run)(const RunConfig&, Checker&);
};

constexpr SuiteEntry kSuites[] = {
    {"branch_geometry", suite_branch_geometry},
    {"cylinder_geometry", suite_cylinder_geometry},
    {"coding_roundtrip", suite_coding_roundtrip},
    {"prefix_pieces", suite_prefix_pieces},
    {"halving_lemmas", suite_halving_lemmas},
    {"grid_interpolation", suite_grid_interpolation},
    {"differentiation", suite_differentiation},
    {"hurwitz_tail", suite_hurwitz_tail},
    {"operator_rows", suite_operator_rows},
    {"eigen_identity", suite_eigen_identity},
    {"dual_structure", suite_dual_structure},
    {"moran_residuals", suite_moran_residuals},
    {"gauss_pressure", suite_gauss_pressure},
    {"chi_constant", suite_chi_constant},
    {"linear_crosscheck", suite_linear_crosscheck},
    {"scaled_limits", suite_scaled_limits},
    {"measure_totals", suite_measure_totals},
    {"measure_additivity", suite_measure_additivity},
    {"interval_brackets", suite_interval_brackets},
    {"stale_guard", suite_stale_guard},
    {"density_duality", suite_density_duality},
    {"density_bounds", suite_density_bounds},
    {"witness_checks", suite_witness_checks},
    {"entropy_partition", suite_entropy_partition},
    {"power_sums", suite_power_sums},
    {"s_alpha", suite_s_alpha},
    {"rn_weights", suite_rn_weights},
    {"distortion_scaling", suite_distortion_scaling},
    {"probe_bounds", suite_probe_bounds},
    {"table_roundtrip", suite_table_roundtrip},
    {"cli_determinism", suite_cli_determinism},
};

}  // namespace

int cmd_verify(const RunConfig& cfg, std::string& report) {
  std::ostringstream out;
  int suites_run = 0, total_checks = 0, total_failures = 0;
  bool matched = false;
  for (const SuiteEntry& s : kSuites) {
    if (!cfg.suite.empty() && cfg.suite != s.name) continue;
    matched = true;
    Checker c;
    try {
      s.run(cfg, c);
    } catch (const StaleDimension& e) {
      c.check(false, std::string("StaleDimension: ") + e.what());
    } catch (const NonConvergence& e) {
      c.check(false, std::string("NonConvergence: ") + e.what());
    } catch (const BracketFailure& e) {
      c.check(false, std::string("BracketFailure: ") + e.what());
    } catch (const std::exception& e) {
      c.check(false, std::string("unexpected exception: ") + e.what());
    }
    ++suites_run;
    total_checks += c.checks();
    total_failures += c.failures();
    out << s.name << ": ";
    if (c.failures() == 0) {
      out << "PASS (" << c.checks() << " checks)\n";
    } else {
      out << "FAIL (" << c.failures() << " of " << c.checks() << " failed) first: " << c.first()
          << "\n";
    }
  }
  if (!matched) {
    std::string names;
    for (const SuiteEntry& s : kSuites) names += std::string(names.empty() ? "" : ", ") + s.name;
    throw std::invalid_argument("unknown verify suite '" + cfg.suite + "'; available: " + names);
  }
  out << "verify: " << suites_run << " suites, " << total_checks << " checks, " << total_failures
      << " failures\n";
  report = out.str();
  return total_failures;
}

// ---------------------------------------------------------------------------
// argument parsing
// ---------------------------------------------------------------------------

namespace {

struct FlagValues {
  std::string config, kind, n, grid, depth, eps, t, families, format, out, seed, jobs, suite;
  std::vector<std::string> tols;
  bool geometric = false, explain = false, inject = false;
};

void add_common_flags(CLI::App* sub, FlagValues& fv) {
  sub->add_option("--config", fv.config, "key=value configuration file; flags override it");
  sub->add_option("--kind", fv.kind, "system family: linear | gauss");
  sub->add_option("--n", fv.n, "alphabet sizes: N, A,B,C, A..B, or inf (operator only)");
  sub->add_flag("--geometric", fv.geometric, "expand A..B by doubling instead of stepping by 1");
  sub->add_option("--grid", fv.grid, "collocation nodes for spectral solves (default 48)");
  sub->add_option("--depth", fv.depth, "cylinder depth for refinement and exhaustive candidates");
  sub->add_option("--eps", fv.eps, "window exponents for the eps-window family, comma separated");
  sub->add_option("--families", fv.families,
                  "candidate families, a subset of abcd (default abc; empty = fallback only)");
  sub->add_option("--format", fv.format, "output format: csv | json");
  sub->add_option("--out", fv.out, "write the table to this path instead of stdout");
  sub->add_option("--seed", fv.seed, "seed for the randomized checks");
  sub->add_option("--jobs", fv.jobs, "worker threads for independent rows (results identical)");
  sub->add_flag("--explain", fv.explain, "append commentary notes to the table");
  sub->add_option("--tol", fv.tols, "named tolerance override, name=value (repeatable)")
      ->expected(1)
      ->allow_extra_args(false);
}

void merge_flags(RunConfig& cfg, CLI::App* sub, const FlagValues& fv) {
  // Only flags actually given on the command line override the config file;
  // not every subcommand carries every flag, hence the no-throw lookup.
  auto given = [sub](const char* name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  const struct {
    const char* flag;
    const char* key;
    const std::string* value;
  } options[] = {
      {"--kind", "kind", &fv.kind},             {"--n", "n", &fv.n},
      {"--grid", "grid", &fv.grid},             {"--depth", "depth", &fv.depth},
      {"--eps", "eps", &fv.eps},                {"--t", "t", &fv.t},
      {"--families", "families", &fv.families}, {"--format", "format", &fv.format},
      {"--out", "out", &fv.out},                {"--seed", "seed", &fv.seed},
      {"--jobs", "jobs", &fv.jobs},             {"--suite", "suite", &fv.suite},
  };
  for (const auto& o : options)
    if (given(o.flag)) apply_config_entry(cfg, o.key, *o.value);
  if (given("--geometric")) apply_config_entry(cfg, "geometric", "true");
  if (given("--explain")) apply_config_entry(cfg, "explain", "true");
  if (given("--inject-wrong-h")) apply_config_entry(cfg, "inject_wrong_h", "true");
  for (const std::string& spec : fv.tols) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("--tol expects name=value, got '" + spec + "'");
    apply_config_entry(cfg, "tol." + spec.substr(0, eq), spec.substr(eq + 1));
  }
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"dimension and measure laboratory for truncated continued-fraction systems"};
  app.require_subcommand(1);
  FlagValues fv;

  CLI::App* dim = app.add_subcommand(
      "dim", "limit-set dimension per n with the scaled gap n(1-h) and its extrapolated limit");
  CLI::App* measure = app.add_subcommand(
      "measure", "certified upper and analytic lower bounds for the measure at the exponent h");
  CLI::App* op = app.add_subcommand(
      "operator", "transfer-operator eigenvalues and truncation-error probes");
  CLI::App* sweep = app.add_subcommand("sweep", "combined dimension and measure table");
  CLI::App* verify = app.add_subcommand("verify", "run the invariant suites and report per-suite");

  for (CLI::App* sub : {dim, measure, op, sweep, verify}) add_common_flags(sub, fv);
  op->add_option("--t", fv.t, "operator exponents, comma separated (default 1.0)");
  verify->add_option("--suite", fv.suite, "run a single named suite");
  verify->add_flag("--inject-wrong-h", fv.inject,
                   "sabotage the dimension feed to demonstrate the staleness guard");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    RunConfig cfg;
    if (sub->count("--config") > 0) cfg = parse_config_file(fv.config);
    merge_flags(cfg, sub, fv);

    if (sub == verify) {
      std::string report;
      const int failures = cmd_verify(cfg, report);
      std::fwrite(report.data(), 1, report.size(), stdout);
      return failures == 0 ? kExitOk : kExitAssertion;
    }
    ResultTable table;
    if (sub == dim) {
      table = cmd_dim(cfg);
    } else if (sub == measure) {
      table = cmd_measure(cfg);
    } else if (sub == op) {
      table = cmd_operator(cfg);
    } else {
      table = cmd_sweep(cfg);
    }
    emit(table, cfg);
    return kExitOk;
  } catch (const StaleDimension& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitAssertion;
  } catch (const NonConvergence& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNonConvergence;
  } catch (const BracketFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNonConvergence;
  } catch (const BudgetExceeded& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const DepthOverflow& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitAssertion;
  }
}

}  // namespace gaussifs
