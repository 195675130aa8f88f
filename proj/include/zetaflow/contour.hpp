#ifndef ZETAFLOW_CONTOUR_HPP
#define ZETAFLOW_CONTOUR_HPP

// Mellin/Perron kernels and contour-integral evaluation of the smoothed
// counting functions, including the shifted-contour split into residue main
// term plus remainder.  All eta evaluations on contours use the resolvent
// form; the 1/(2 pi i) prefactor is always included.

#include "zetaflow/counting.hpp"

namespace zf {

struct ContourConfig {
  double d = 0;          // abscissa; 0 -> 1 + 1/log T
  double R = 0;          // truncation height; 0 -> (log T)^{eps_exp}
  int ell = 1;
  double sigma_left = 0;  // shifted contours only
  double eps_exp = 2.0;   // R(T) = (log T)^{eps_exp}
  double rho_reg = 1.0;   // C(R) = 1 - 1/(h^{rho+1} R^{rho})
  bool shift_disabled = false;
  double quad_tol = 1e-10;
  int max_depth = 15;

  double abscissa(double T) const;
  double height(double T) const;
};

// (1/2 pi i) int_{d-iR}^{d+iR} y^s / (s (s+1) ... (s+ell)) ds.
// Closed form as R -> infinity: 0 for y < 1, (1/ell!) (1 - 1/y)^ell for y > 1.
// When the caller requests a tolerance and the truncation estimate exceeds
// it, the evaluation refuses (R too small).
double mellin_kernel(double y, double d, double R, int ell, double* trunc_est = nullptr,
                     double* quad_est = nullptr,
                     double tol = std::numeric_limits<double>::infinity());

// The y^{s+1}/(s(s+1)) variant: 0 for y < 1, y - 1 for y > 1.
double mellin_kernel_phi1(double y, double d, double R, double* trunc_est = nullptr,
                          double* quad_est = nullptr,
                          double tol = std::numeric_limits<double>::infinity());

struct PerronResult {
  double value = 0;       // always main_term + remainder, exactly
  double main_term = 0;   // residue contribution (0 on unshifted contours)
  double remainder = 0;
  double quad_error = 0;  // accumulated quadrature error estimate
  double trunc_error = 0; // |t| > R tail bound via the Dirichlet majorant of eta
};

// Phi1(T) via the truncated d-line integral of eta(s) T^{s+1}/(s(s+1)).
PerronResult perron_phi1(const SuspensionSystem& sys, const CylinderFunction& k, double T,
                         const ContourConfig& cfg);

// Residue main term + rectangle legs through sigma_left.  The left abscissa
// must be certified pole-free (except s=1) by a prior zero_scan.
PerronResult shifted_contour_phi1(const SuspensionSystem& sys, const CylinderFunction& k,
                                  double T, double sigma_left, double R,
                                  const ScanReport& certification,
                                  const ContourConfig& cfg = {});

// psi_{K,ell}(T) = (1/2 pi i) int eta(s) T^{s+ell}/(s...(s+ell)) ds with the
// truncation R(T) = (log T)^{eps} and optional shift to C(R).  Defined only
// for psi = 0 configurations (refuses weighted ones).  The direct comparison
// value is phi(T, ell, with_repetitions) / ell!.
PerronResult psi_ell_contour(const SuspensionSystem& sys, const CylinderFunction& k, double T,
                             int ell, const ContourConfig& cfg,
                             const ScanReport* certification = nullptr);

// Rigorous majorant of |eta(d + it)| over t: the |k|-weighted resolvent trace
// at the real point d.
double eta_abs_bound(const SuspensionSystem& sys, const CylinderFunction& k, double d);

// Throws RefusalError unless the scan covers [sigma_left, 1] x [0, R] and
// its only modulus-1 crossings sit at s = 1.
void require_zero_free(const ScanReport& scan, double sigma_left, double R);

}  // namespace zf

#endif
