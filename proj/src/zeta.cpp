#include "zetaflow/zeta.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace zf {

namespace {

double edge_val(const CylinderFunction& f, int i, int j) {
  if (f.depth() == 2) {
    const int w[2] = {i, j};
    return f.value(std::span<const int>(w, 2));
  }
  const int w[1] = {j};
  return f.value(std::span<const int>(w, 1));
}

}  // namespace

EdgeOperators::EdgeOperators(const SuspensionSystem& sys, const CylinderFunction* k)
    : es_(edge_presentation(sys, k)), c_(sys.c()) {}

Eigen::MatrixXcd EdgeOperators::weight(Complex s) const {
  return build_weight_matrix(es_.shift, es_.psi, es_.roof, c_, s).entries;
}

Eigen::MatrixXcd EdgeOperators::k_weight(Complex s) const {
  if (!es_.k) throw SchemaError("no observable attached to these edge operators");
  const int n = es_.shift.alphabet_size();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (es_.shift.edge(i, j))
        m(i, j) = edge_val(*es_.k, i, j) *
                  std::exp(Complex(edge_val(es_.psi, i, j), 0.0) -
                           s * c_ * edge_val(es_.roof, i, j));
  return m;
}

Eigen::MatrixXd EdgeOperators::real_weight(double sigma) const {
  const int n = es_.shift.alphabet_size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (es_.shift.edge(i, j))
        m(i, j) = std::exp(edge_val(es_.psi, i, j) - sigma * c_ * edge_val(es_.roof, i, j));
  return m;
}

Complex Zn_direct(const SuspensionSystem& sys, const CylinderFunction& k, Complex s, int n) {
  if (n < 1) throw SchemaError("Z_n needs n >= 1");
  const Subshift& shift = sys.base();
  const double c = sys.c();

  // exponent-shifted accumulation: sum of k_w * exp(a_w + i b_w)
  double shift_exp = -std::numeric_limits<double>::infinity();
  Complex acc = 0.0;
  std::vector<int> w(static_cast<size_t>(n));
  std::function<void(int)> rec = [&](int t) {
    if (t == n) {
      Word word{w};
      if (!shift.edge(w[static_cast<size_t>(n - 1)], w[0])) return;
      double kw = birkhoff_sum(word, k);
      double pw = birkhoff_sum(word, sys.psi());
      double rw = birkhoff_sum(word, sys.roof());
      Complex expo = Complex(pw, 0.0) - s * c * rw;
      double a = expo.real();
      if (a > shift_exp) {
        acc *= std::exp(shift_exp - a);
        shift_exp = a;
      }
      acc += kw * std::exp(expo - Complex(shift_exp, 0.0));
      return;
    }
    for (int v = 0; v < shift.alphabet_size(); ++v) {
      if (t > 0 && !shift.edge(w[static_cast<size_t>(t - 1)], v)) continue;
      w[static_cast<size_t>(t)] = v;
      rec(t + 1);
    }
  };
  rec(0);
  if (acc == Complex(0.0)) return 0.0;
  return acc * std::exp(Complex(shift_exp, 0.0));
}

Complex Zn_trace(const SuspensionSystem& sys, const CylinderFunction& k, Complex s, int n) {
  if (n < 1) throw SchemaError("Z_n needs n >= 1");
  EdgeOperators ops(sys, &k);
  Eigen::MatrixXcd m = ops.weight(s);
  Eigen::MatrixXcd b = ops.k_weight(s);
  double log_scale = 0;
  for (int i = 1; i < n; ++i) {
    b = b * m;
    double mx = b.cwiseAbs().maxCoeff();
    if (mx > 1e100 || (mx > 0 && mx < 1e-100)) {
      b /= mx;
      log_scale += std::log(mx);
    }
  }
  return static_cast<double>(n) * b.trace() * std::exp(log_scale);
}

EtaEvaluation eta_series(const SuspensionSystem& sys, const CylinderFunction& k, Complex s,
                         double tol, int max_terms) {
  EtaEvaluation ev;
  ev.s = s;
  ev.method = EtaEvaluation::Method::series;
  if (!(s.real() > 1.0))
    throw RefusalError("eta_series diverges for Re(s) <= 1; use eta_resolvent");

  EdgeOperators ops(sys, &k);
  double rho = perron_eigendata(ops.real_weight(s.real())).eigenvalue;
  if (!(rho < 1.0))
    throw RefusalError("spectral radius >= 1 at Re(s); use eta_resolvent");

  Eigen::MatrixXcd m = ops.weight(s);
  Eigen::MatrixXcd b = ops.k_weight(s);
  Complex acc = 0.0;
  double scale_b = 0;  // B in the truncation rule
  double rho_pow = rho;
  for (int n = 1; n <= max_terms; ++n) {
    if (n > 1) b = b * m;
    Complex zn_over_n = b.trace();  // Z_n / n = trace(K_M M^{n-1})
    acc += zn_over_n;
    scale_b = std::max(scale_b, std::abs(zn_over_n) / rho_pow);
    double tail = scale_b * rho_pow * rho / (1.0 - rho);
    rho_pow *= rho;
    if (tail <= tol) {
      ev.truncation = n;
      ev.tail_bound = tail;
      ev.value = acc;
      return ev;
    }
  }
  throw RefusalError("eta_series could not certify the tail bound within " +
                     std::to_string(max_terms) + " terms");
}

EtaEvaluation eta_resolvent(const EdgeOperators& ops, Complex s) {
  EtaEvaluation ev;
  ev.s = s;
  ev.method = EtaEvaluation::Method::resolvent;
  Eigen::MatrixXcd m = ops.weight(s);
  const auto n = m.rows();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n) - m;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  double rc = lu.rcond();
  ev.condition = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(ev.condition < kPoleConditionThreshold))
    throw RefusalError("eta evaluation is pole-proximal at s = (" + std::to_string(s.real()) +
                       ", " + std::to_string(s.imag()) + "): condition " +
                       std::to_string(ev.condition));
  ev.value = lu.solve(ops.k_weight(s)).trace();
  return ev;
}

EtaEvaluation eta_resolvent(const SuspensionSystem& sys, const CylinderFunction& k, Complex s) {
  EdgeOperators ops(sys, &k);
  return eta_resolvent(ops, s);
}

ResidueResult residue_at_one(const SuspensionSystem& sys, const CylinderFunction& k) {
  EdgeOperators ops(sys, &k);
  const std::array<double, 3> eps = {1e-3, 5e-4, 2.5e-4};
  ResidueResult out;
  for (size_t i = 0; i < eps.size(); ++i) {
    EtaEvaluation ev = eta_resolvent(ops, Complex(1.0 + eps[i], 0.0));
    out.samples[i] = eps[i] * ev.value.real();
  }
  double h1 = 2 * out.samples[1] - out.samples[0];
  double h2 = 2 * out.samples[2] - out.samples[1];
  out.residue = (4 * h2 - h1) / 3;
  double d1 = std::abs(out.samples[1] - out.samples[0]);
  double d2 = std::abs(h2 - h1);
  double scale = std::max({std::abs(out.samples[0]), std::abs(out.samples[1]), 1e-300});
  out.stable = d2 <= 0.5 * d1 + 1e-12 * scale;
  if (!out.stable)
    throw RefusalError("residue extrapolation unstable; raw samples " +
                       std::to_string(out.samples[0]) + ", " + std::to_string(out.samples[1]) +
                       ", " + std::to_string(out.samples[2]));
  return out;
}

Complex log_zeta_series(const SuspensionSystem& sys, Complex s, double tol) {
  if (!(s.real() > 1.0)) throw RefusalError("log zeta series diverges for Re(s) <= 1");
  EdgeOperators ops(sys, nullptr);
  double rho = perron_eigendata(ops.real_weight(s.real())).eigenvalue;
  if (!(rho < 1.0)) throw RefusalError("spectral radius >= 1 at Re(s)");
  Eigen::MatrixXcd m = ops.weight(s);
  Eigen::MatrixXcd p = m;
  Complex acc = 0.0;
  double scale_b = 0, rho_pow = rho;
  for (int n = 1; n <= 100000; ++n) {
    if (n > 1) p = p * m;
    acc += p.trace() / static_cast<double>(n);
    scale_b = std::max(scale_b, std::abs(p.trace() / static_cast<double>(n)) / rho_pow);
    double tail = scale_b * rho_pow * rho / (1.0 - rho);
    rho_pow *= rho;
    if (tail <= tol) return acc;
  }
  throw RefusalError("log zeta series could not certify the tail bound");
}

Complex log_zeta_resolvent(const SuspensionSystem& sys, Complex s) {
  EdgeOperators ops(sys, nullptr);
  Eigen::MatrixXcd m = ops.weight(s);
  const auto n = m.rows();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n) - m;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  double rc = lu.rcond();
  if (!(rc > 0) || 1.0 / rc >= kPoleConditionThreshold)
    throw RefusalError("log zeta evaluation is pole-proximal");
  return -std::log(lu.determinant());
}

ScanReport zero_scan(const SuspensionSystem& sys, double sigma_lo, double sigma_hi,
                     double t_lo, double t_hi, int grid_steps_per_unit, int workers) {
  if (!(sigma_lo > 0.0) || !(sigma_hi <= 1.5) || !(sigma_lo < sigma_hi))
    throw SchemaError("zero_scan sigma range must lie in (0, 1.5]");
  if (!(t_lo <= t_hi)) throw SchemaError("zero_scan t range is empty");
  if (grid_steps_per_unit < 8) throw SchemaError("zero_scan needs >= 8 grid steps per unit");

  EdgeOperators ops(sys, nullptr);
  const double h = 1.0 / grid_steps_per_unit;
  const int ns = static_cast<int>(std::ceil((sigma_hi - sigma_lo) / h)) + 1;
  const int nt = static_cast<int>(std::ceil((t_hi - t_lo) / h)) + 1;

  ScanReport rep;
  rep.grid.resize(static_cast<size_t>(ns) * nt);

  auto run_row = [&](int it) {
    double t = std::min(t_lo + it * h, t_hi);
    for (int is = 0; is < ns; ++is) {
      double sigma = std::min(sigma_lo + is * h, sigma_hi);
      Eigen::MatrixXcd m = ops.weight(Complex(sigma, t));
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, /*computeEigenvectors=*/false);
      double mod = es.eigenvalues().cwiseAbs().maxCoeff();
      Complex lead = es.eigenvalues()(0);
      for (int e = 0; e < es.eigenvalues().size(); ++e)
        if (std::abs(es.eigenvalues()(e)) > std::abs(lead)) lead = es.eigenvalues()(e);
      ScanPoint& p = rep.grid[static_cast<size_t>(it) * ns + is];
      p.sigma = sigma;
      p.t = t;
      p.value = lead;
      p.modulus = mod;
    }
  };

  workers = std::max(1, workers);
  if (workers == 1) {
    for (int it = 0; it < nt; ++it) run_row(it);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (int it = next.fetch_add(1); it < nt; it = next.fetch_add(1)) run_row(it);
      });
    for (auto& th : pool) th.join();
  }

  // crossings along sigma rows; coarse-grid warning on large modulus jumps
  for (int it = 0; it < nt; ++it)
    for (int is = 0; is + 1 < ns; ++is) {
      const ScanPoint& a = rep.grid[static_cast<size_t>(it) * ns + is];
      const ScanPoint& b = rep.grid[static_cast<size_t>(it) * ns + is + 1];
      if (std::abs(b.modulus - a.modulus) > 0.2) {
        rep.coarse = true;
        rep.grid[static_cast<size_t>(it) * ns + is + 1].flag = 2;
      }
      if ((a.modulus - 1.0 >= 0.0) != (b.modulus - 1.0 >= 0.0) || a.modulus == 1.0)
        rep.crossings.push_back(Crossing{a.sigma, b.sigma, a.t});
    }
  return rep;
}

ScanReport growth_scan(const SuspensionSystem& sys, const CylinderFunction& k, double sigma,
                       const std::vector<double>& t_list) {
  EdgeOperators ops(sys, &k);
  ScanReport rep;
  std::vector<double> xs, ys;
  bool any_nonzero = false;
  for (double t : t_list) {
    ScanPoint p;
    p.sigma = sigma;
    p.t = t;
    try {
      EtaEvaluation ev = eta_resolvent(ops, Complex(sigma, t));
      p.value = ev.value;
      p.modulus = std::abs(ev.value);
    } catch (const RefusalError&) {
      p.flag = 1;  // pole-proximal, skipped
      rep.grid.push_back(p);
      continue;
    }
    rep.grid.push_back(p);
    if (p.modulus > 1e-280) {
      any_nonzero = true;
      if (std::abs(t) > 0) {
        xs.push_back(std::log(std::abs(t)));
        ys.push_back(std::log(p.modulus));
      }
    }
  }
  if (!any_nonzero) {
    rep.all_zero = true;  // fit skipped
    return rep;
  }
  if (xs.size() < 4) throw RefusalError("growth_scan has fewer than 4 usable samples");

  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) throw RefusalError("growth_scan fit is degenerate");
  rep.alpha_hat = (n * sxy - sx * sy) / denom;
  rep.fit_intercept = (sy - rep.alpha_hat * sx) / n;
  double ss = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double e = ys[i] - (rep.fit_intercept + rep.alpha_hat * xs[i]);
    ss += e * e;
  }
  rep.fit_residual = std::sqrt(ss / n);
  rep.fit_valid = true;
  return rep;
}

}  // namespace zf
