#include "zetaflow/thermo.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace zf {

namespace {

// Edge value of a depth-<=2 function: depth-2 reads the word (i,j), depth-1
// attaches to the arriving symbol j.
double edge_value(const CylinderFunction& f, int i, int j) {
  if (f.depth() == 2) {
    const int w[2] = {i, j};
    return f.value(std::span<const int>(w, 2));
  }
  const int w[1] = {j};
  return f.value(std::span<const int>(w, 1));
}

void require_depth2(const CylinderFunction& f, const char* what) {
  if (f.depth() > 2)
    throw SchemaError(std::string(what) + " has depth " + std::to_string(f.depth()) +
                      " > 2; apply recode_depth_one first");
}

}  // namespace

WeightMatrix build_weight_matrix(const Subshift& shift, const CylinderFunction& psi,
                                 const CylinderFunction& roof, double c,
                                 std::complex<double> s) {
  require_depth2(psi, "psi");
  require_depth2(roof, "roof");
  if (!(psi.shift() == shift) || !(roof.shift() == shift))
    throw SchemaError("weight data does not live on the given shift");
  if (!roof.strictly_positive())
    throw SchemaError("roof must be marked strictly positive");
  const int n = shift.alphabet_size();
  WeightMatrix wm;
  wm.s = s;
  wm.c = c;
  wm.entries = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (shift.edge(i, j))
        wm.entries(i, j) =
            std::exp(std::complex<double>(edge_value(psi, i, j), 0.0) -
                     s * c * edge_value(roof, i, j));
  return wm;
}

Eigen::MatrixXd real_weight_matrix(const Subshift& shift, const CylinderFunction& phi) {
  require_depth2(phi, "phi");
  if (!(phi.shift() == shift)) throw SchemaError("phi does not live on the given shift");
  const int n = shift.alphabet_size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (shift.edge(i, j)) m(i, j) = std::exp(edge_value(phi, i, j));
  return m;
}

namespace {

double relative_residual(const Eigen::MatrixXd& m, const Eigen::VectorXd& v, double lam,
                         bool left) {
  Eigen::VectorXd r = left ? Eigen::VectorXd(m.transpose() * v - lam * v)
                           : Eigen::VectorXd(m * v - lam * v);
  double scale = std::abs(lam) * v.norm();
  return scale > 0 ? r.norm() / scale : r.norm();
}

// One-sided power iteration on a nonnegative matrix.
bool power_iterate(const Eigen::MatrixXd& m, bool left, int max_iter, double tol,
                   Eigen::VectorXd& v, double& lam, int& used) {
  const auto n = m.rows();
  if (v.size() != n) v = Eigen::VectorXd::Ones(n);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd w = left ? Eigen::VectorXd(m.transpose() * v) : Eigen::VectorXd(m * v);
    double nrm = w.norm();
    if (!(nrm > 0)) return false;
    w /= nrm;
    // Rayleigh quotient against the iterate
    lam = left ? w.dot(m.transpose() * w) : w.dot(m * w);
    double delta = (w - v).norm();
    v = w;
    used = it + 1;
    if (delta < tol && relative_residual(m, v, lam, left) < 1e-13) return true;
  }
  return relative_residual(m, v, lam, left) < 1e-12;
}

}  // namespace

PerronPair perron_eigendata(const Eigen::MatrixXd& m, int max_iter, double tol) {
  PerronPair out;
  Eigen::VectorXd r, l;
  double lam_r = 0, lam_l = 0;
  int used_r = 0, used_l = 0;
  bool ok_r = power_iterate(m, false, max_iter, tol, r, lam_r, used_r);
  bool ok_l = power_iterate(m, true, max_iter, tol, l, lam_l, used_l);

  if (!ok_r || !ok_l) {
    // dense fallback (matrices here are small), then polish by power steps
    if (m.rows() > 2000)
      throw RefusalError("Perron eigensolve did not converge and the matrix is too large "
                         "for the dense fallback");
    Eigen::EigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw RefusalError("dense eigensolve failed");
    int best = 0;
    for (int i = 1; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()(i)) > std::abs(es.eigenvalues()(best))) best = i;
    r = es.eigenvectors().col(best).real();
    if (r.sum() < 0) r = -r;
    l = Eigen::VectorXd::Ones(m.rows());
    for (int i = 0; i < 64; ++i) {
      r = m * r;
      r /= r.norm();
      l = m.transpose() * l;
      l /= l.norm();
    }
    lam_r = r.dot(m * r);
    lam_l = l.dot(m.transpose() * l);
  }

  double lam = 0.5 * (lam_r + lam_l);
  out.eigenvalue = lam;
  out.right = r;
  out.left = l;
  out.iterations = std::max(used_r, used_l);
  out.right_residual = relative_residual(m, r, lam, false);
  out.left_residual = relative_residual(m, l, lam, true);
  if (out.right_residual > 1e-12 || out.left_residual > 1e-12)
    throw RefusalError("RPF eigensolve residual above 1e-12");
  for (int i = 0; i < r.size(); ++i)
    if (!(r(i) > 0) || !(l(i) > 0))
      throw RefusalError("computed Perron eigenvector has a non-positive entry "
                         "(mixing assumption broken?)");
  return out;
}

double pressure(const Subshift& shift, const CylinderFunction& phi) {
  shift.require_mixing("pressure");
  if (phi.depth() > 2) {
    RecodedSystem rs = recode_depth_one(shift, {&phi});
    return pressure(rs.shift, rs.fns[0]);
  }
  Eigen::MatrixXd m = real_weight_matrix(shift, phi);
  return std::log(perron_eigendata(m).eigenvalue);
}

GibbsData rpf(const Subshift& shift, const CylinderFunction& phi) {
  shift.require_mixing("rpf");
  require_depth2(phi, "phi");
  Eigen::MatrixXd m = real_weight_matrix(shift, phi);
  PerronPair pp = perron_eigendata(m);

  GibbsData g(shift);
  g.eigenvalue = pp.eigenvalue;
  g.h = pp.right / pp.right.maxCoeff();
  g.nu = pp.left / pp.left.dot(g.h);  // nu . h = 1
  g.right_residual = pp.right_residual;
  g.left_residual = pp.left_residual;

  const auto n = m.rows();
  g.pi = g.nu.cwiseProduct(g.h);
  g.P = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g.P(i, j) = m(i, j) * g.h(j) / (g.eigenvalue * g.h(i));
  g.stationary_residual = (g.P.transpose() * g.pi - g.pi).norm();
  return g;
}

double GibbsData::cylinder_measure(const Word& w) const {
  if (!w.admissible(shift)) throw SchemaError("cylinder_measure of an inadmissible word");
  double mu = pi(w.symbols.front());
  for (size_t i = 0; i + 1 < w.symbols.size(); ++i) mu *= P(w.symbols[i], w.symbols[i + 1]);
  return mu;
}

double gibbs_integral(const GibbsData& g, const CylinderFunction& phi) {
  if (!(phi.shift() == g.shift))
    throw SchemaError("gibbs_integral: function and Gibbs data live on different shifts");
  double s = 0;
  for (const Word& w : admissible_words(g.shift, phi.depth()))
    s += phi.value(w.symbols) * g.cylinder_measure(w);
  return s;
}

NormalizationResult solve_flow_pressure(const Subshift& shift, const CylinderFunction& psi,
                                        const CylinderFunction& roof) {
  shift.require_mixing("solve_flow_pressure");
  if (!roof.strictly_positive()) throw SchemaError("roof must be strictly positive");

  // Work at depth one so each pressure evaluation is a single eigensolve.
  const Subshift* sh = &shift;
  const CylinderFunction* ps = &psi;
  const CylinderFunction* rf = &roof;
  RecodedSystem rs{shift, {}, {}};
  if (std::max(psi.depth(), roof.depth()) > 2) {
    rs = recode_depth_one(shift, {&psi, &roof});
    sh = &rs.shift;
    ps = &rs.fns[0];
    rf = &rs.fns[1];
  }

  auto pressure_at = [&](double c) {
    return pressure(*sh, ps->combine(1.0, -c, *rf));
  };

  NormalizationResult out;
  double p0 = pressure_at(0.0);
  if (!(p0 > 0))
    throw RefusalError("P(psi) = " + std::to_string(p0) +
                       " <= 0: no positive root for the flow normalization "
                       "(the standing assumption P(Psi) > 0 fails)");
  double rmin = rf->r_min();
  double lo = 0.0, hi = (p0 + 1.0) / rmin;  // P(psi - c r) <= P(psi) - c r_min
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  double flo = p0, fhi = pressure_at(hi);
  if (!(fhi < 0)) throw RefusalError("flow-pressure bracket failed at the upper end");

  while (hi - lo > 1e-13) {
    double mid = 0.5 * (lo + hi);
    double fm = pressure_at(mid);
    if (fm > 0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  double c = 0.5 * (lo + hi);
  // one secant polish
  if (fhi != flo) {
    double cs = lo - flo * (hi - lo) / (fhi - flo);
    if (cs > out.bracket_lo && cs < out.bracket_hi) c = cs;
  }
  out.c = c;
  out.residual = std::abs(pressure_at(c));

  const double eps = 1e-5;
  out.dP_dc = (pressure_at(c + eps) - pressure_at(c - eps)) / (2 * eps);
  GibbsData g = rpf(*sh, ps->combine(1.0, -c, *rf));
  out.gibbs_dP_dc = -gibbs_integral(g, *rf);
  if (!(out.dP_dc < 0))
    throw RefusalError("dP/dc is not strictly negative at the root");
  return out;
}

double flow_average(const Subshift& shift, const CylinderFunction& psi,
                    const CylinderFunction& roof, const CylinderFunction& k, double c) {
  shift.require_mixing("flow_average");
  const Subshift* sh = &shift;
  const CylinderFunction* ps = &psi;
  const CylinderFunction* rf = &roof;
  const CylinderFunction* kk = &k;
  RecodedSystem rs{shift, {}, {}};
  if (std::max({psi.depth(), roof.depth(), k.depth()}) > 2) {
    rs = recode_depth_one(shift, {&psi, &roof, &k});
    sh = &rs.shift;
    ps = &rs.fns[0];
    rf = &rs.fns[1];
    kk = &rs.fns[2];
  }
  GibbsData g = rpf(*sh, ps->combine(1.0, -c, *rf));
  return gibbs_integral(g, *kk) / gibbs_integral(g, *rf);
}

}  // namespace zf
