#ifndef ZETAFLOW_INTERVAL_HPP
#define ZETAFLOW_INTERVAL_HPP

// Piecewise-affine expanding Markov interval maps, Chebyshev-collocation
// C^1 machinery, the |t|-adapted norm, the complex transfer operator, and
// the Dolgopyat / telescoping probes.  Branches are affine so inverse
// branches and periodic points are closed-form.

#include <complex>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "zetaflow/symbolic.hpp"

namespace zf {

using Complex = std::complex<double>;

struct IntervalSpec {
  double a = 0, b = 0;
  double length() const { return b - a; }
  double mid() const { return 0.5 * (a + b); }
  bool contains(double x, double tol = 1e-12) const { return x >= a - tol && x <= b + tol; }
};

struct BranchSpec {
  double slope = 0, offset = 0;  // f(x) = slope * x + offset on its interval
};

struct AffineMap {
  double slope = 1, offset = 0;
  double operator()(double x) const { return slope * x + offset; }
  AffineMap inverse() const { return {1.0 / slope, -offset / slope}; }
  // this after other: x -> this(other(x))
  AffineMap after(const AffineMap& other) const {
    return {slope * other.slope, slope * other.offset + offset};
  }
};

class ExpandingMarkovMap {
 public:
  // Validates disjoint ordered intervals, expansion |slope| > 1, and the
  // Markov property (branch images align with interval endpoints to 1e-14).
  ExpandingMarkovMap(std::vector<IntervalSpec> intervals, std::vector<BranchSpec> branches);

  int branch_count() const { return static_cast<int>(intervals_.size()); }
  const IntervalSpec& interval(int i) const { return intervals_[static_cast<size_t>(i)]; }
  const BranchSpec& branch(int i) const { return branches_[static_cast<size_t>(i)]; }
  bool edge(int i, int j) const { return incidence_[static_cast<size_t>(i) * intervals_.size() + j] != 0; }
  double gamma() const { return gamma_; }  // max contraction of inverse branches

  double apply_forward(int branch, double x) const;
  int locate(double x) const;  // interval index containing x (tolerant at ends)

  // Composed inverse branch for an admissible word (i_0 ... i_{m-1}); maps a
  // point with itinerary starting at i_{m-1}'s successor back through the word.
  AffineMap inverse_branch(std::span<const int> word) const;
  // Unique fixed point of the composed inverse branch of a cyclically
  // admissible word; lies in interval word[0].
  double periodic_point(std::span<const int> word) const;

  bool word_admissible(std::span<const int> word) const;
  bool word_cyclically_admissible(std::span<const int> word) const;
  Subshift incidence_shift() const;

 private:
  std::vector<IntervalSpec> intervals_;
  std::vector<BranchSpec> branches_;
  std::vector<uint8_t> incidence_;
  double gamma_ = 0;
};

// Per-interval polynomials (degree <= 6) for roofs and potentials.
struct PiecewisePoly {
  std::vector<std::vector<double>> coeffs;  // ascending powers, one row per interval

  double eval(int interval, double x) const;
  double derivative(int interval, double x) const;
  // Exact min over each interval (endpoints + real critical points).
  double min_on(const ExpandingMarkovMap& map) const;
  double max_abs_on(const ExpandingMarkovMap& map) const;
  static PiecewisePoly constant(int n_intervals, double value);
  bool is_constant(double* value = nullptr) const;
};

// Shared Chebyshev-Gauss-Lobatto collocation data.
struct CollocationGrid {
  std::vector<IntervalSpec> intervals;
  int order = 32;              // polynomial degree; order+1 nodes per interval
  std::vector<double> xi;      // CGL nodes on [-1, 1]
  std::vector<double> bary;    // barycentric weights
  Eigen::MatrixXd diff;        // differentiation matrix on [-1, 1]

  CollocationGrid(std::vector<IntervalSpec> iv, int ord);
  int nodes_per_interval() const { return order + 1; }
  double node(int interval, int j) const;
  size_t stacked_size() const { return intervals.size() * static_cast<size_t>(order + 1); }
  // Barycentric interpolation coefficients of a point inside one interval.
  void interp_row(int interval, double x, Eigen::RowVectorXd& out) const;
};

class GridFunction {
 public:
  GridFunction(std::shared_ptr<const CollocationGrid> grid);
  static GridFunction from_callable(std::shared_ptr<const CollocationGrid> grid,
                                    const std::function<Complex(int, double)>& f);

  const CollocationGrid& grid() const { return *grid_; }
  std::shared_ptr<const CollocationGrid> grid_ptr() const { return grid_; }
  Eigen::VectorXcd& values(int interval) { return vals_[static_cast<size_t>(interval)]; }
  const Eigen::VectorXcd& values(int interval) const { return vals_[static_cast<size_t>(interval)]; }

  Complex eval(int interval, double x) const;   // barycentric
  GridFunction derivative() const;              // spectral differentiation
  GridFunction resampled(int new_order) const;  // exact for the stored polynomial
  double sup_abs() const;                       // dense sampling + local refinement

  Eigen::VectorXcd stacked() const;
  void set_stacked(const Eigen::VectorXcd& v);

 private:
  std::shared_ptr<const CollocationGrid> grid_;
  std::vector<Eigen::VectorXcd> vals_;
};

// max(||w||_C0, ||w'||_C0 / |t|) for |t| > 1; max(||w||_C0, ||w'||_C0) else.
double norm_1t(const GridFunction& w, double t);

// Round-trip / spectral-derivative self checks used by the test-suite.
double spectral_roundtrip_error(const CollocationGrid& grid);

class TransferOperator {
 public:
  TransferOperator(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                   const PiecewisePoly& roof, double c, Complex s,
                   std::shared_ptr<const CollocationGrid> grid);

  const Eigen::MatrixXcd& matrix() const { return m_; }
  std::shared_ptr<const CollocationGrid> grid() const { return grid_; }

  // Applies the operator and verifies the result is resolved on the grid
  // (off-node direct evaluation vs interpolation, relative 1e-10).  Throws
  // RefusalError asking for a higher order when under-resolved.
  GridFunction apply(const GridFunction& w) const;
  GridFunction apply_unchecked(const GridFunction& w) const;

  Complex leading_eigenvalue() const;

  double interpolation_residual(const GridFunction& w) const;
  // Same check against an already-computed image of w.
  double interpolation_residual(const GridFunction& w, const GridFunction& lw) const;

 private:
  const ExpandingMarkovMap* map_;
  const PiecewisePoly* psi_;
  const PiecewisePoly* roof_;
  double c_;
  Complex s_;
  std::shared_ptr<const CollocationGrid> grid_;
  Eigen::MatrixXcd m_;
};

// Builds the operator at the default order, doubling (up to max_order) until
// the residual check passes on probe data.
TransferOperator build_transfer_operator(const ExpandingMarkovMap& map,
                                         const PiecewisePoly& psi, const PiecewisePoly& roof,
                                         double c, Complex s, int order = 32,
                                         int max_order = 256);

// log of the leading eigenvalue modulus of L_{psi - u r} at real u.
double interval_pressure(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                         const PiecewisePoly& roof, double u, int order = 32);

// c with interval_pressure(psi - c r) = 0; bisection + secant polish.
double solve_interval_normalization(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                                    const PiecewisePoly& roof, int order = 32);

struct OpNormSequence {
  std::vector<double> norms;  // ||L^n w||_{1,t} maxima over the trial set, n = 1..n_max
  int order_used = 0;
  int trials = 0;
};

// Lower-bound estimates of ||L^n||_{1,t} by trial maximization over a seeded
// set (the constant function plus random Chebyshev series, normalized).
OpNormSequence op_norm_estimate(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                                const PiecewisePoly& roof, double c, Complex s, int n_max,
                                int trials, uint64_t seed, int order = 32);

struct DolgopyatProbeResult {
  double sigma = 0, t = 0;
  int block_len = 0;  // floor(log |t|)
  std::vector<double> norms;
  double rho_hat = 0;        // per-application decay e^{fit slope}
  double rho_hat_block = 0;  // per-block decay rho_hat^{block_len}
  double C_hat = 0;
  double fit_residual = 0;
  bool lattice_warning = false;
};

DolgopyatProbeResult dolgopyat_probe(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                                     const PiecewisePoly& roof, double c, double sigma,
                                     double t, int n_max, int trials, uint64_t seed,
                                     int order = 32);

enum class PointRule { fixed_point, midpoint };

// | Z_n - sum_i L^n(chi_{I_i} k)(x_i) | with Z_n the exact periodic-point sum.
double telescoping_residual(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                            const PiecewisePoly& roof, double c, int n, Complex s,
                            const GridFunction& k, PointRule rule);

}  // namespace zf

#endif
