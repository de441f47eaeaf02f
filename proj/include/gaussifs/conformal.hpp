#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "gaussifs/dimension.hpp"
#include "gaussifs/grid.hpp"
#include "gaussifs/ifs.hpp"
#include "gaussifs/spectral.hpp"

namespace gaussifs {

/// The measure only exists at the conformal exponent; construction re-checks
/// the defining identity (Moran sum = 1, or λ_{h,n} = 1) and refuses h that
/// fails it beyond 1e-10.
class StaleDimension : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DepthOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MeasureBackend { ExactProduct, DualQuadrature };

struct MassBracket {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
};

/// The h_n-conformal probability measure m_n on the limit set of the
/// truncated system: m_n(g_k(A)) = ∫_A |g_k'|^{h_n} dm_n, total mass 1.
///
/// Linear backend: cylinder masses are the exact products Π a_{ω_i}^{h}.
/// Gauss backend: the dual eigenvector of the collocated operator at t = h_n
/// acts as a quadrature rule m_n(f) ≈ Σ_i u_i f(x_i) against smooth
/// integrands, so m_n(g_ω([0,1])) = Σ_i u_i |g_ω'(x_i)|^{h}. Quadrature is
/// never applied to indicators (they are not in the analytic class); interval
/// masses go through cylinder refinement instead.
class ConformalMeasure {
 public:
  static ConformalMeasure make(SystemKind kind, long n, double h, int grid_M = 48,
                               int depth_cap = 64);

  SystemKind kind() const { return kind_; }
  long n() const { return n_; }
  double h() const { return h_; }
  MeasureBackend backend() const { return backend_; }
  int depth_cap() const { return depth_cap_; }

  /// m_n(g_ω([0,1])). Empty word gives 1 exactly. Thread-safe memo.
  double cylinder_mass(const Word& w) const;

  /// Depth-1 fast path: m_n(Δ_k).
  double branch_mass(long k) const;

  /// Two-sided bracket for m_n(F): lower sums the cylinders of depth ≤ depth
  /// contained in F, upper adds the ≤2 partially overlapping boundary
  /// cylinders per level. Collapses to a point when F's endpoints are
  /// cylinder endpoints of depth ≤ depth. Degenerate F has mass 0 (the
  /// measure is non-atomic).
  MassBracket interval_mass(const IntervalX& F, int depth) const;

  /// Gauss backend internals (exposed for probes and searches).
  const CollocationGrid& grid() const;
  const Eigen::VectorXd& dual_weights() const;

 private:
  ConformalMeasure(SystemKind kind, long n, double h, int depth_cap,
                   std::shared_ptr<CollocationGrid> grid, Eigen::VectorXd dual);

  SystemKind kind_;
  long n_;
  double h_;
  MeasureBackend backend_;
  int depth_cap_;

  // Gauss backend state
  std::shared_ptr<CollocationGrid> grid_;
  Eigen::VectorXd dual_;

  // shared so copies reuse work; guarded internally for concurrent queries
  struct Memo;
  std::shared_ptr<Memo> memo_;
};

/// Fitted one-sided distortion constant: max over pairs of
/// (|g_ω'(z)/g_ω'(w)| − 1)/|z − w|. Zero for the empty word and for the
/// linear family (constant branch derivatives).
double distortion_constant(SystemKind kind, const Word& w,
                           const std::vector<std::pair<double, double>>& pairs);

/// max |g_ω'(z)/g_ω'(w)| − 1 over all point pairs of a uniform npts-grid on
/// the interval, maximized over the given words. On the second-iterate window
/// g_n²([b_{n+1},1]) this decays like the window diameter ~ n^{-4}.
double max_distortion_ratio(SystemKind kind, const std::vector<Word>& words,
                            const IntervalX& domain, int npts = 9);

/// g_n(g_n([b_{n+1}, 1])): the deepest two-fold n-branch window, diameter
/// n/((n²+n+1)(n³+n²+2n+1))-ish ~ n^{-4}.
IntervalX second_iterate_window(SystemKind kind, long n);

}  // namespace gaussifs
