#ifndef ZETAFLOW_THERMO_HPP
#define ZETAFLOW_THERMO_HPP

// Weighted transfer matrices, topological pressure, Ruelle-Perron-Frobenius
// eigendata, the flow normalization P(psi - c r) = 0, and equilibrium-state
// averages.  Data must be at depth <= 2 (recode_depth_one first); pressure
// and flow_average recode internally when handed deeper functions.

#include <complex>

#include <Eigen/Dense>

#include "zetaflow/symbolic.hpp"

namespace zf {

struct WeightMatrix {
  Eigen::MatrixXcd entries;   // zero pattern = transition matrix
  std::complex<double> s;
  double c = 0;
};

// M(s)[i][j] = A[i][j] * exp(psi(i,j) - s*c*r(i,j)).  Depth-1 data attaches
// to the arriving symbol j, which makes the Perron eigenfunction of a
// Bernoulli potential constant; depth-2 data is read on the edge word (i,j).
WeightMatrix build_weight_matrix(const Subshift& shift, const CylinderFunction& psi,
                                 const CylinderFunction& roof, double c,
                                 std::complex<double> s);

// A[i][j] * exp(phi(i,j)) for real phi of depth <= 2, same conventions.
Eigen::MatrixXd real_weight_matrix(const Subshift& shift, const CylinderFunction& phi);

struct PerronPair {
  double eigenvalue = 0;
  Eigen::VectorXd right;  // positive
  Eigen::VectorXd left;   // positive
  double right_residual = 0, left_residual = 0;
  int iterations = 0;
};

// Dominant eigendata of a nonnegative mixing matrix; power iteration with a
// dense-solver fallback.  Throws RefusalError on non-convergence.
PerronPair perron_eigendata(const Eigen::MatrixXd& m, int max_iter = 20000,
                            double tol = 1e-14);

struct GibbsData {
  explicit GibbsData(Subshift s) : shift(std::move(s)) {}

  Subshift shift;
  double eigenvalue = 0;   // Perron root; exp(pressure)
  Eigen::VectorXd h;       // right eigenfunction, max-norm 1
  Eigen::VectorXd nu;      // left eigenmeasure, scaled so nu . h = 1
  Eigen::VectorXd pi;      // stationary law, pi_i = nu_i h_i
  Eigen::MatrixXd P;       // row-stochastic kernel A e^{phi} h_j / (lambda h_i)
  double right_residual = 0, left_residual = 0, stationary_residual = 0;

  double pressure() const { return std::log(eigenvalue); }
  // Markov measure of the cylinder [w0..w_{d-1}].
  double cylinder_measure(const Word& w) const;
};

// log of the Perron root of the weight matrix of phi (any depth; deeper data
// is recoded internally).  Shift must be mixing.
double pressure(const Subshift& shift, const CylinderFunction& phi);

// Full RPF data for real phi of depth <= 2.
GibbsData rpf(const Subshift& shift, const CylinderFunction& phi);

// Integral of phi against the Gibbs measure: sum over admissible depth-d
// words of phi(w) * mu([w]).
double gibbs_integral(const GibbsData& g, const CylinderFunction& phi);

struct NormalizationResult {
  double c = 0;
  double bracket_lo = 0, bracket_hi = 0;
  double residual = 0;       // |P(psi - c r)|
  double dP_dc = 0;          // centered finite difference at the root
  double gibbs_dP_dc = 0;    // -\int r dmu_{psi - c r}
};

// Root of c |-> P(psi - c r), bisection + one secant polish.  Requires
// P(psi) > 0; otherwise RefusalError (no positive root to bracket).
NormalizationResult solve_flow_pressure(const Subshift& shift, const CylinderFunction& psi,
                                        const CylinderFunction& roof);

// Abramov ratio  \int k dmu_sigma / \int r dmu_sigma  at sigma = psi - c r.
double flow_average(const Subshift& shift, const CylinderFunction& psi,
                    const CylinderFunction& roof, const CylinderFunction& k, double c);

}  // namespace zf

#endif
