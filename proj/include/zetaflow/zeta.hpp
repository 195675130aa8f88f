#ifndef ZETAFLOW_ZETA_HPP
#define ZETAFLOW_ZETA_HPP

// Weighted periodic-point sums Z_n, the zeta log-derivative eta(s) in series
// and resolvent form, residue extraction at s = 1, zero-free-strip scans and
// growth scans.  The resolvent trace formula
//     eta(s) = trace(K_M(s) (I - M(s))^{-1})
// is the canonical analytic continuation for locally constant data.

#include <complex>
#include <vector>

#include "zetaflow/suspension.hpp"

namespace zf {

using Complex = std::complex<double>;

// Cached depth-one matrices for one (system, observable) pair.
class EdgeOperators {
 public:
  EdgeOperators(const SuspensionSystem& sys, const CylinderFunction* k);

  Eigen::MatrixXcd weight(Complex s) const;      // M(s)
  Eigen::MatrixXcd k_weight(Complex s) const;    // K_M(s); requires an observable
  Eigen::MatrixXd real_weight(double sigma) const;
  double c() const { return c_; }
  bool has_observable() const { return es_.k.has_value(); }
  const EdgeSystem& edges() const { return es_; }

 private:
  EdgeSystem es_;
  double c_;
};

struct EtaEvaluation {
  Complex s;
  Complex value;
  enum class Method { series, resolvent } method = Method::resolvent;
  int truncation = 0;     // series only
  double tail_bound = 0;  // series only
  double condition = 0;   // resolvent only: condition estimate of (I - M(s))
};

// Z_n by explicit sum over cyclically admissible base words (Birkhoff sums,
// exponent-shifted accumulation).
Complex Zn_direct(const SuspensionSystem& sys, const CylinderFunction& k, Complex s, int n);
// Z_n = n * trace(K_M(s) M(s)^{n-1}) on the depth-one presentation.
Complex Zn_trace(const SuspensionSystem& sys, const CylinderFunction& k, Complex s, int n);

// Partial sums of sum_n Z_n / n with a certified geometric tail bound.
// Requires Re(s) > 1; use eta_resolvent elsewhere.
EtaEvaluation eta_series(const SuspensionSystem& sys, const CylinderFunction& k, Complex s,
                         double tol, int max_terms = 100000);

// Meromorphic continuation; refuses pole-proximal points (condition > 1e12).
EtaEvaluation eta_resolvent(const SuspensionSystem& sys, const CylinderFunction& k, Complex s);
EtaEvaluation eta_resolvent(const EdgeOperators& ops, Complex s);

constexpr double kPoleConditionThreshold = 1e12;

struct ResidueResult {
  double residue = 0;
  std::array<double, 3> samples{};  // eps * eta(1 + eps) at 1e-3, 5e-4, 2.5e-4
  bool stable = false;
};

// lim_{s->1} (s-1) eta(s) by Richardson extrapolation.
ResidueResult residue_at_one(const SuspensionSystem& sys, const CylinderFunction& k);

// log zeta(s): series accumulator sum (1/n) trace(M^n) next to the exact
// -log det(I - M(s)).
Complex log_zeta_series(const SuspensionSystem& sys, Complex s, double tol);
Complex log_zeta_resolvent(const SuspensionSystem& sys, Complex s);

struct ScanPoint {
  double sigma = 0, t = 0;
  Complex value;       // eta value (growth scan) or leading eigenvalue (zero scan)
  double modulus = 0;
  int flag = 0;        // 1 = skipped/pole-proximal, 2 = coarse-jump warning
};

struct Crossing {
  double sigma_lo = 0, sigma_hi = 0, t = 0;
};

struct ScanReport {
  std::vector<ScanPoint> grid;       // fixed row-major order (t outer, sigma inner)
  std::vector<Crossing> crossings;   // modulus-1 crossings along sigma rows
  bool coarse = false;               // adjacent-cell modulus jump > 0.2 somewhere
  // growth-scan fit
  bool fit_valid = false;
  bool all_zero = false;
  double alpha_hat = 0, fit_intercept = 0, fit_residual = 0;
};

// Modulus of the leading eigenvalue of M(sigma + i t) over a grid; cells where
// it crosses 1 are candidate zeros/poles of the continuation.
ScanReport zero_scan(const SuspensionSystem& sys, double sigma_lo, double sigma_hi,
                     double t_lo, double t_hi, int grid_steps_per_unit, int workers = 1);

// |eta(sigma + i t)| on a t-list with a log-log least-squares exponent fit.
ScanReport growth_scan(const SuspensionSystem& sys, const CylinderFunction& k, double sigma,
                       const std::vector<double>& t_list);

}  // namespace zf

#endif
