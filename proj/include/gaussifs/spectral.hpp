#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "gaussifs/grid.hpp"
#include "gaussifs/ifs.hpp"

namespace gaussifs {

/// Thrown when power iteration fails to reach the requested residual.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sentinel for the untruncated operator (all branches, analytic tail).
inline constexpr long kInfiniteTruncation = -1;

/// Collocated transfer operator
///   (L_{t,n} f)(x) = Σ_{k=1..n} f(g_k(x)) |g_k'(x)|^t,
/// as an M×M matrix acting on nodal samples. For n = ∞ (Gauss only) the sum
/// runs directly to K = 2000 and the remaining tail is applied analytically:
/// a cubic Taylor expansion of the interpolant at 0 integrated against the
/// Hurwitz-zeta moments Σ_{k>K} (x+k)^{-2t-p} = ζ(2t+p, x+K+1). The certified
/// truncation error max|f''''|/4! · ζ(2t+4, K+1) is below 1e-13 in sup norm
/// throughout t ∈ [3/4, 4].
struct OperatorMatrix {
  SystemKind kind;
  double t;
  long n;  // kInfiniteTruncation for the full system
  Eigen::MatrixXd A;
  bool below_convergence_region;  // finite truncation assembled at t <= 3/4
};

/// Assemble L_{t,n} on the grid. The infinite series needs t > 3/4; finite
/// sums converge for any positive t, so truncated operators accept the wider
/// range (0.35, 4] needed by the dimension solver at small n, with the flag
/// recording an exponent below the convergence region of the full operator.
OperatorMatrix assemble_operator(SystemKind kind, double t, long n, const CollocationGrid& grid);

struct SpectralData {
  double lambda = 0.0;
  Eigen::VectorXd rho;  // leading eigenfunction, pairing-normalized
  /// Discrete eigenmeasure, sums to 1. Entries at nodes inside the system's
  /// support are positive; a truncated system leaves nodes below b_{n+1}
  /// outside the support, where small negative entries are genuine (the
  /// vector represents a functional on smooth integrands, not a pointwise
  /// density) and must not be clamped.
  Eigen::VectorXd dual_weights;
  int iterations = 0;
  double residual = 0.0;  // final ‖Aρ − λρ‖∞ / (λ‖ρ‖∞)
};

/// Leading eigen-triple by power iteration from the all-ones vector, with a
/// transpose iteration for the dual weights. Normalization order: dual first
/// (total mass 1), then rho scaled so the pairing dual·rho equals 1.
SpectralData leading_eigen(const OperatorMatrix& op, double tol = 1e-13, int max_iter = 20000);

/// sup-node norm of (L_{t,∞} − L_{t,n}) f for nodal samples f — the quantity
/// the tail bound 8|t| n^{1-2t} ‖f‖_BV controls. Gauss kind only.
double perturbation_probe(double t, long n, const Eigen::VectorXd& f_samples,
                          const CollocationGrid& grid);

struct EigenCloseness {
  double dlambda;   // |λ_{t,n} − 1|
  double drho_sup;  // ‖ρ_{t,n} − ρ_{1,∞}‖∞, both pairing-normalized
};

/// Distance of the (t, n) eigen-pair from the exact fixed point of L_{1,∞},
/// whose eigenfunction is 1/((1+x) ln 2) with Lebesgue as eigenmeasure.
EigenCloseness eigen_closeness_probe(double t, long n, const CollocationGrid& grid);

/// Hurwitz zeta ζ(s, a) by the Euler–Maclaurin asymptotic series; requires
/// a ≥ 500 (the tail assembly calls it with a ≥ 2001), where the first
/// omitted term is below 1e-25 relative.
double hurwitz_zeta(double s, double a);

}  // namespace gaussifs
