#include "zetaflow/contour.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace zf {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

struct QuadAcc {
  double error = 0;
  template <typename F>
  Complex integrate(F f, double a, double b, double tol, int depth) {
    double err = 0;
    Complex v = GK::integrate(f, a, b, static_cast<unsigned>(depth), tol, &err);
    error += err;
    return v;
  }
};

Complex poly_kernel(Complex s, int ell) {
  Complex p = s;
  for (int j = 1; j <= ell; ++j) p *= s + static_cast<double>(j);
  return p;
}

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

double ContourConfig::abscissa(double T) const {
  if (d > 0) {
    if (!(d > 1)) throw SchemaError("contour abscissa must exceed 1");
    return d;
  }
  if (!(T > std::exp(1.0))) throw SchemaError("T too small for the default abscissa");
  return 1.0 + 1.0 / std::log(T);
}

double ContourConfig::height(double T) const {
  if (R > 0) return R;
  if (!(T > 1)) throw SchemaError("T too small for the default height");
  return std::pow(std::log(T), eps_exp);
}

double mellin_kernel(double y, double d, double R, int ell, double* trunc_est,
                     double* quad_est, double tol) {
  if (!(y > 0)) throw SchemaError("mellin kernel needs y > 0");
  if (y == 1.0) throw SchemaError("mellin kernel is discontinuous at y = 1");
  if (!(d > 1)) throw SchemaError("mellin kernel needs d > 1");
  if (ell < 1) throw SchemaError("mellin kernel needs ell >= 1 for absolute convergence");
  if (!(R > 0)) throw SchemaError("mellin kernel needs R > 0");
  {
    double tail = std::pow(y, d) / (M_PI * ell * std::pow(R, ell));
    if (tail > tol)
      throw RefusalError("mellin kernel truncation estimate " + std::to_string(tail) +
                         " exceeds the requested tolerance; R too small");
  }

  const double ln_y = std::log(y);
  QuadAcc acc;
  auto f = [&](double t) {
    Complex s(d, t);
    return std::exp(s * ln_y) / poly_kernel(s, ell);
  };
  // conjugate symmetry: the full integral is 2 Re of the upper half
  Complex upper = acc.integrate(f, 0.0, R, 1e-12, 15);
  double value = upper.real() / M_PI;

  double tail = std::pow(y, d) / (M_PI * ell * std::pow(R, ell));
  if (trunc_est) *trunc_est = tail;
  if (quad_est) *quad_est = acc.error / M_PI;
  return value;
}

double mellin_kernel_phi1(double y, double d, double R, double* trunc_est, double* quad_est,
                          double tol) {
  double t_est = 0, q_est = 0;
  double v = y * mellin_kernel(y, d, R, 1, &t_est, &q_est, tol / y);
  if (trunc_est) *trunc_est = y * t_est;
  if (quad_est) *quad_est = y * q_est;
  return v;
}

double eta_abs_bound(const SuspensionSystem& sys, const CylinderFunction& k, double d) {
  if (!(d > 1)) throw SchemaError("the eta majorant needs a real point d > 1");
  EdgeSystem es = edge_presentation(sys, &k);
  const Subshift& sh = es.shift;
  const int n = sh.alphabet_size();
  auto edge_val = [&](const CylinderFunction& f, int i, int j) {
    if (f.depth() == 2) {
      const int w[2] = {i, j};
      return f.value(std::span<const int>(w, 2));
    }
    const int w[1] = {j};
    return f.value(std::span<const int>(w, 1));
  };
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n), kw = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (sh.edge(i, j)) {
        double w = std::exp(edge_val(es.psi, i, j) - d * sys.c() * edge_val(es.roof, i, j));
        m(i, j) = w;
        kw(i, j) = std::abs(edge_val(*es.k, i, j)) * w;
      }
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - m;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  double rc = lu.rcond();
  if (!(rc > 0) || 1.0 / rc > kPoleConditionThreshold)
    throw RefusalError("eta majorant is pole-proximal; move d to the right");
  return lu.solve(kw).trace();
}

void require_zero_free(const ScanReport& scan, double sigma_left, double R) {
  if (scan.grid.empty()) throw RefusalError("shifted contour needs a prior zero_scan");
  double smin = scan.grid.front().sigma, smax = scan.grid.front().sigma;
  double tmin = std::abs(scan.grid.front().t), tmax = tmin;
  for (const auto& p : scan.grid) {
    smin = std::min(smin, p.sigma);
    smax = std::max(smax, p.sigma);
    tmin = std::min(tmin, std::abs(p.t));
    tmax = std::max(tmax, std::abs(p.t));
  }
  if (smin > sigma_left + 1e-12 || smax < 1.0 - 1e-12)
    throw RefusalError("zero_scan does not cover [sigma_left, 1]");
  if (tmax < R - 1e-12 || tmin > 1e-12)
    throw RefusalError("zero_scan does not cover the contour heights [0, R]");

  // Crossings inside the strip must form the halo of the s=1 pole and nothing
  // else: one connected |t|-window starting at t = 0 and exiting the strip at a
  // bounded height.  Lattice lines (crossings at every height) and off-axis
  // zeros (windows detached from t = 0) both fail this shape.
  constexpr double kHaloCap = 3.0;
  double grid_h = tmax;
  for (const auto& p : scan.grid)
    if (std::abs(p.t) > 1e-12) grid_h = std::min(grid_h, std::abs(p.t));
  std::vector<double> strip_ts;
  for (const auto& c : scan.crossings)
    if (c.sigma_hi >= sigma_left - 1e-12) strip_ts.push_back(std::abs(c.t));
  std::sort(strip_ts.begin(), strip_ts.end());
  if (strip_ts.empty())
    throw RefusalError("zero_scan shows no crossing at s=1; the normalization is "
                       "inconsistent with the scan");
  if (strip_ts.front() > grid_h + 1e-12)
    throw RefusalError("strip crossings start away from t=0 (possible off-axis zero at t=" +
                       std::to_string(strip_ts.front()) + "); no zero-free strip certified");
  for (size_t i = 0; i + 1 < strip_ts.size(); ++i)
    if (strip_ts[i + 1] - strip_ts[i] > 1.5 * grid_h + 1e-12)
      throw RefusalError("strip crossings are not a single connected window (gap before t=" +
                         std::to_string(strip_ts[i + 1]) +
                         "); possible zero away from s=1");
  if (strip_ts.back() > kHaloCap)
    throw RefusalError("strip crossings persist up to t=" + std::to_string(strip_ts.back()) +
                       " (beyond the s=1 halo cap); no zero-free strip certified");
}

PerronResult perron_phi1(const SuspensionSystem& sys, const CylinderFunction& k, double T,
                         const ContourConfig& cfg) {
  if (!(T >= 2)) throw SchemaError("perron_phi1 needs T >= 2");
  const double d = cfg.abscissa(T);
  const double R = cfg.height(T);
  EdgeOperators ops(sys, &k);

  QuadAcc acc;
  const double lnT = std::log(T);
  auto f = [&](double t) {
    Complex s(d, t);
    EtaEvaluation ev = eta_resolvent(ops, s);
    return ev.value * std::exp((s + 1.0) * lnT) / (s * (s + 1.0));
  };
  Complex upper = acc.integrate(f, 0.0, R, cfg.quad_tol, cfg.max_depth);

  PerronResult out;
  out.main_term = 0.0;
  out.remainder = upper.real() / M_PI;
  out.value = out.main_term + out.remainder;
  out.quad_error = acc.error / M_PI;
  out.trunc_error = eta_abs_bound(sys, k, d) * std::pow(T, d + 1) / (M_PI * R);
  return out;
}

PerronResult shifted_contour_phi1(const SuspensionSystem& sys, const CylinderFunction& k,
                                  double T, double sigma_left, double R,
                                  const ScanReport& certification, const ContourConfig& cfg) {
  if (!(T >= 2)) throw SchemaError("shifted_contour_phi1 needs T >= 2");
  if (!(sigma_left > 0) || !(sigma_left < 1))
    throw SchemaError("sigma_left must lie in (0, 1)");
  require_zero_free(certification, sigma_left, R);

  const double d = cfg.abscissa(T);
  EdgeOperators ops(sys, &k);
  const double lnT = std::log(T);
  auto f = [&](Complex s) {
    EtaEvaluation ev = eta_resolvent(ops, s);
    return ev.value * std::exp((s + 1.0) * lnT) / (s * (s + 1.0));
  };

  PerronResult out;
  ResidueResult res = residue_at_one(sys, k);
  out.main_term = res.residue * T * T / 2.0;

  QuadAcc acc;
  // top + bottom legs combine to Im(int_{sigma_left}^{d} f(sigma + iR) dsigma)/pi
  Complex top =
      acc.integrate([&](double sg) { return f(Complex(sg, R)); }, sigma_left, d,
                    cfg.quad_tol, cfg.max_depth);
  // left vertical: (1/pi) Re int_0^R f(sigma_left + it) dt
  Complex left = acc.integrate([&](double t) { return f(Complex(sigma_left, t)); }, 0.0, R,
                               cfg.quad_tol, cfg.max_depth);
  out.remainder = top.imag() / M_PI + left.real() / M_PI;
  out.value = out.main_term + out.remainder;
  out.quad_error = acc.error / M_PI;
  out.trunc_error = eta_abs_bound(sys, k, d) * std::pow(T, d + 1) / (M_PI * R);
  return out;
}

PerronResult psi_ell_contour(const SuspensionSystem& sys, const CylinderFunction& k, double T,
                             int ell, const ContourConfig& cfg,
                             const ScanReport* certification) {
  if (ell < 1) throw SchemaError("psi_ell_contour needs ell >= 1");
  if (sys.psi().max_abs() != 0.0)
    throw RefusalError("psi_ell is defined for the unweighted case only (psi = 0); "
                       "got a nonzero potential");
  if (!(T >= 2)) throw SchemaError("psi_ell_contour needs T >= 2");

  const double d = cfg.abscissa(T);
  const double R = cfg.height(T);
  const double h = sys.c();  // entropy normalizer: P(0) = h for the psi = 0 class
  EdgeOperators ops(sys, &k);
  const double lnT = std::log(T);
  auto f = [&](Complex s) {
    EtaEvaluation ev = eta_resolvent(ops, s);
    return ev.value * std::exp((s + static_cast<double>(ell)) * lnT) / poly_kernel(s, ell);
  };

  PerronResult out;
  QuadAcc acc;
  if (cfg.shift_disabled) {
    Complex upper = acc.integrate([&](double t) { return f(Complex(d, t)); }, 0.0, R,
                                  cfg.quad_tol, cfg.max_depth);
    out.main_term = 0.0;
    out.remainder = upper.real() / M_PI;
  } else {
    double CR = 1.0 - 1.0 / (std::pow(h, cfg.rho_reg + 1.0) * std::pow(R, cfg.rho_reg));
    if (!(CR > 0) || !(CR < 1))
      throw RefusalError("shifted abscissa C(R) = " + std::to_string(CR) +
                         " falls outside (0, 1); adjust rho_reg / eps_exp");
    if (!certification) throw RefusalError("shifted psi_ell needs a zero_scan certification");
    require_zero_free(*certification, CR, R);

    ResidueResult res = residue_at_one(sys, k);
    out.main_term = res.residue * std::pow(T, ell + 1) / factorial(ell + 1);
    Complex top = acc.integrate([&](double sg) { return f(Complex(sg, R)); }, CR, d,
                                cfg.quad_tol, cfg.max_depth);
    Complex left = acc.integrate([&](double t) { return f(Complex(CR, t)); }, 0.0, R,
                                 cfg.quad_tol, cfg.max_depth);
    out.remainder = top.imag() / M_PI + left.real() / M_PI;
  }
  out.value = out.main_term + out.remainder;
  out.quad_error = acc.error / M_PI;
  out.trunc_error =
      eta_abs_bound(sys, k, d) * std::pow(T, d + ell) / (M_PI * ell * std::pow(R, ell));
  return out;
}

}  // namespace zf
