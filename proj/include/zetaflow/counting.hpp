#ifndef ZETAFLOW_COUNTING_HPP
#define ZETAFLOW_COUNTING_HPP

// Orbit enumeration under roof-length budgets, the counting functions
// Phi_{K,l}, weighted orbit measures and window measures, equidistribution
// error curves, rate fitting, and the smoothing/unsmoothing bracket.
//
// Two countings are first-class everywhere:
//   prime_only        sums prime orbits once (the discrete-measure picture);
//   with_repetitions  weights the instance (tau, m) by 1/n-style bookkeeping,
//                     matching the eta / contour calculus term by term.

#include <functional>

#include "zetaflow/zeta.hpp"

namespace zf {

enum class CountMode { prime_only, with_repetitions };

const char* to_string(CountMode m);

struct OrbitInstance {
  double ell = 0;    // prime orbit roof length
  double psi = 0;    // prime orbit potential sum
  double k = 0;      // prime orbit observable sum
  int period = 0;    // prime orbit word length
  int multiplicity = 1;
  double total_length = 0;  // multiplicity * ell
};

struct BudgetOptions {
  double max_instances = 2e8;
  int workers = 1;
};

// Every (tau, m) with m * ell_tau <= L, exactly once, sorted by
// (total_length, period-order) deterministically.
std::vector<OrbitInstance> enumerate_by_budget(const SuspensionSystem& sys,
                                               const CylinderFunction& k, double L,
                                               const BudgetOptions& opt = {});

// Precomputed, length-sorted instances for repeated counting queries.
class OrbitEnsemble {
 public:
  OrbitEnsemble(const SuspensionSystem& sys, const CylinderFunction& k, double L,
                const BudgetOptions& opt = {});

  double budget() const { return budget_; }
  double c() const { return c_; }
  size_t instance_count() const { return instances_.size(); }
  const std::vector<OrbitInstance>& instances() const { return instances_; }

  // Phi_{K,l}(T) = sum over counted entries with e^{c len} <= T of
  //   k e^{psi-weight} (T - e^{c len})^l.
  double phi(double T, int ell_order, CountMode mode) const;
  // Z on the length scale: sum of e^{psi_tau} ell_tau (prime) or the
  // repetition variant.
  double Z_T(double T_len, CountMode mode) const;
  // Orbit-measure integral at length budget T_len (k-average).
  double mu_T(double T_len, CountMode mode) const;
  // Window (T-eps, T] variant; eps = T reduces to mu_T exactly.
  double window(double T_len, double eps, CountMode mode) const;

 private:
  double budget_ = 0, c_ = 0;
  std::vector<OrbitInstance> instances_;  // sorted by total_length
};

struct CountingCurve {
  std::vector<double> T;      // length scale, strictly increasing
  std::vector<double> value;  // mu_T integrals
  double reference = 0;       // flow average
  CountMode mode = CountMode::prime_only;
  bool lattice = false;
  double c = 0;

  std::vector<double> abs_errors() const;
};

// |mu_T(K) - flow_average| per grid point; uses one enumeration at max T.
CountingCurve error_curve(const SuspensionSystem& sys, const FlowObservable& K,
                          const std::vector<double>& T_grid, CountMode mode,
                          const BudgetOptions& opt = {});

struct RateFit {
  enum class Model { exponential, polynomial } model = Model::exponential;
  enum class Points { raw, envelope } points = Points::raw;
  double delta_hat = 0;
  double intercept = 0;
  double residual = 0;
  int n_points = 0;
  int n_excluded = 0;  // zero errors dropped from the fit
};

// exponential: log err ~ a - delta c T;  polynomial: log err ~ a - delta log T.
// Signed errors oscillate through zero while the rate statement bounds their
// envelope; Points::envelope therefore fits block maxima of |err| over
// envelope_blocks equal-width T windows instead of every sample.
RateFit fit_rate(const CountingCurve& curve, RateFit::Model model,
                 RateFit::Points points = RateFit::Points::raw, int envelope_blocks = 4);

struct UnsmoothBracket {
  double lower = 0, upper = 0;
  double delta_T = 0;  // the smoothing width Delta(T) = T^{1-delta}
};

// Monotonicity bracket for Phi0(T) from a Phi1 evaluator (K >= 0 required):
//   [Phi1(T) - Phi1(T - D)] / D  <=  Phi0(T)  <=  [Phi1(T + D) - Phi1(T)] / D.
UnsmoothBracket unsmooth(const std::function<double(double)>& phi1, double T,
                         double delta_exponent, double grid_resolution = 0.0);

}  // namespace zf

#endif
