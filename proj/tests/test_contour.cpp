#include <doctest.h>

#include <cmath>

#include "zetaflow/contour.hpp"

using namespace zf;

namespace {

Subshift full2() { return Subshift(2, {{1, 1}, {1, 1}}); }

SuspensionSystem unit_full2() {
  Subshift s = full2();
  return SuspensionSystem(s, CylinderFunction::constant(s, 1, 0.0),
                          CylinderFunction::constant(s, 1, 1.0));
}

SuspensionSystem nonlattice_full2() {
  Subshift s = full2();
  CylinderFunction r(s, 1, [](const Word& w) {
    return w.symbols[0] == 0 ? 1.0 : std::sqrt(2.0);
  });
  return SuspensionSystem(s, CylinderFunction::constant(s, 1, 0.0), r);
}

// worst truncated-kernel error over half an oscillation period in R
double windowed_kernel_error(double y, int ell, double R) {
  double w = M_PI / std::log(y);
  double closed = y > 1 ? std::pow(1.0 - 1.0 / y, ell) : 0.0;
  for (int f = 2; f <= ell; ++f) closed /= f;
  double worst = 0;
  for (int i = 0; i <= 8; ++i)
    worst = std::max(worst,
                     std::abs(mellin_kernel(y, 1.5, R + w * i / 8.0, ell) - closed));
  return worst;
}

}  // namespace

TEST_CASE("mellin kernels against the closed forms") {
  double tr = 0, qe = 0;

  // the y^{s+1}/(s(s+1)) kernel variant: y - 1 above 1
  double v1 = mellin_kernel_phi1(2.0, 1.5, 200.0, &tr, &qe);
  CHECK(std::abs(v1 - 1.0) <= tr + qe);

  double v0 = mellin_kernel(0.5, 1.5, 200.0, 1, &tr, &qe);
  CHECK(std::abs(v0) <= tr + qe);

  double v2 = mellin_kernel(2.0, 1.5, 200.0, 2, &tr, &qe);
  CHECK(std::abs(v2 - 0.125) <= tr + qe);

  // plain ell = 1 kernel: (1 - 1/y)
  double v = mellin_kernel(2.0, 1.5, 200.0, 1, &tr, &qe);
  CHECK(std::abs(v - 0.5) <= tr + qe);

  CHECK_THROWS_AS(mellin_kernel(1.0, 1.5, 50.0, 1), SchemaError);
  CHECK_THROWS_AS(mellin_kernel(2.0, 0.9, 50.0, 1), SchemaError);
  CHECK_THROWS_AS(mellin_kernel(2.0, 1.5, 50.0, 0), SchemaError);
  // R too small for the requested tolerance is refused with the estimate
  CHECK_THROWS_AS(mellin_kernel(2.0, 1.5, 10.0, 1, nullptr, nullptr, 1e-6), RefusalError);
}

TEST_CASE("kernel truncation converges like 1/R^ell (ratio test)") {
  double r1 = windowed_kernel_error(2.0, 1, 40.0) / windowed_kernel_error(2.0, 1, 80.0);
  CHECK(r1 >= 1.8);
  double r2 = windowed_kernel_error(2.0, 2, 40.0) / windowed_kernel_error(2.0, 2, 80.0);
  CHECK(r2 >= 3.5);
}

TEST_CASE("perron_phi1 matches the direct count within estimates; d-independence") {
  SuspensionSystem sys = unit_full2();
  CylinderFunction k = sys.roof();  // lift of K = 1
  OrbitEnsemble ens(sys, k, 12.0);
  const double T = 8.0;
  double direct = ens.phi(T, 1, CountMode::with_repetitions);
  CHECK(direct == doctest::Approx(28.0).epsilon(1e-13));

  std::vector<PerronResult> results;
  for (double d : {1.05, 1.2, 1.0 + 1.0 / std::log(T)}) {
    ContourConfig cc;
    cc.d = d;
    cc.R = 4000.0;
    PerronResult pr = perron_phi1(sys, k, T, cc);
    CHECK(pr.value == pr.main_term + pr.remainder);  // exact bookkeeping
    CHECK(std::abs(pr.value - direct) <= pr.quad_error + pr.trunc_error);
    results.push_back(pr);
  }
  for (size_t i = 0; i + 1 < results.size(); ++i)
    CHECK(std::abs(results[i].value - results[i + 1].value) <=
          results[i].quad_error + results[i].trunc_error + results[i + 1].quad_error +
              results[i + 1].trunc_error);

  // K = 0 integrates to zero
  CylinderFunction kz = CylinderFunction::constant(sys.base(), 1, 0.0);
  ContourConfig cc;
  cc.R = 500.0;
  PerronResult pz = perron_phi1(sys, kz, T, cc);
  CHECK(std::abs(pz.value) <= pz.quad_error + 1e-12);

  // below the first orbit scale both sides vanish within the estimates
  // (full 3-shift with unit roof: the first orbit sits at e^c = 3)
  Subshift s3(3, {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
  SuspensionSystem sys3(s3, CylinderFunction::constant(s3, 1, 0.0),
                        CylinderFunction::constant(s3, 1, 1.0));
  cc.d = 1.3;  // T = 2.5 is below the default-abscissa threshold T > e
  PerronResult pe = perron_phi1(sys3, sys3.roof(), 2.5, cc);
  CHECK(std::abs(pe.value) <= pe.quad_error + pe.trunc_error);
}

TEST_CASE("shifted contour: lattice refused, non-lattice matches and splits") {
  // lattice: the sigma=1 line is crossed at every height; no certification
  SuspensionSystem lat = unit_full2();
  ScanReport lcert = zero_scan(lat, 0.95, 1.02, 0.0, 10.0, 32);
  CHECK_THROWS_AS(
      shifted_contour_phi1(lat, lat.roof(), 8.0, 0.97, 10.0, lcert, ContourConfig{}),
      RefusalError);

  // non-lattice reference: main + remainder matches the direct count
  SuspensionSystem non = nonlattice_full2();
  CylinderFunction k = non.roof();
  double T = std::exp(4.0 * non.c());
  OrbitEnsemble ens(non, k, 8.0);
  double direct = ens.phi(T, 1, CountMode::with_repetitions);

  const double R = 20.0;
  ScanReport cert = zero_scan(non, 0.95, 1.02, 0.0, R, 32, 2);
  ContourConfig cc;
  cc.quad_tol = 1e-10;
  PerronResult pr = shifted_contour_phi1(non, k, T, 0.97, R, cert, cc);
  CHECK(pr.value == pr.main_term + pr.remainder);
  CHECK(std::abs(pr.value - direct) <= pr.quad_error + pr.trunc_error);
  // the main term carries the residue normalization
  ResidueResult res = residue_at_one(non, k);
  CHECK(pr.main_term / (T * T / 2.0) == doctest::Approx(res.residue).epsilon(1e-6));

  // K = 0: main and remainder both within estimate of zero
  CylinderFunction kz = CylinderFunction::constant(non.base(), 1, 0.0);
  PerronResult pz = shifted_contour_phi1(non, kz, T, 0.97, R, cert, cc);
  CHECK(std::abs(pz.main_term) <= 1e-10);
  CHECK(std::abs(pz.value) <= pz.quad_error + 1e-10);

  // stale certification (wrong coverage) refused
  ScanReport narrow = zero_scan(non, 0.98, 1.02, 0.0, R, 32, 2);
  CHECK_THROWS_AS(shifted_contour_phi1(non, k, T, 0.97, R, narrow, cc), RefusalError);
}

TEST_CASE("psi_ell contour: refusals, pure-line match, truncation sanity, shift") {
  SuspensionSystem lat = unit_full2();
  CylinderFunction k = lat.roof();

  CHECK_THROWS_AS(psi_ell_contour(lat, k, 8.0, 0, ContourConfig{}, nullptr), SchemaError);

  // nonzero potential refused (psi_ell is defined for the entropy-normalized class)
  {
    Subshift s = full2();
    CylinderFunction psi(s, 1, [](const Word& w) { return 0.1 * w.symbols[0]; });
    SuspensionSystem wsys(s, psi, CylinderFunction::constant(s, 1, 1.0));
    ContourConfig cc;
    cc.d = 1.3;
    cc.R = 100.0;
    cc.shift_disabled = true;
    CHECK_THROWS_AS(psi_ell_contour(wsys, wsys.roof(), 8.0, 2, cc, nullptr), RefusalError);
  }

  // pure truncated d-line matches the direct sum
  OrbitEnsemble lens(lat, k, 12.0);
  ContourConfig pc;
  pc.d = 1.3;
  pc.R = 3000.0;
  pc.shift_disabled = true;
  PerronResult pe = psi_ell_contour(lat, k, 8.0, 2, pc, nullptr);
  double direct = lens.phi(8.0, 2, CountMode::with_repetitions) / 2.0;
  CHECK(std::abs(pe.value - direct) <= pe.quad_error + pe.trunc_error);
  CHECK(pe.value == pe.main_term + pe.remainder);

  // ell = 2, K = 0
  CylinderFunction kz = CylinderFunction::constant(lat.base(), 1, 0.0);
  PerronResult pz = psi_ell_contour(lat, kz, 8.0, 2, pc, nullptr);
  CHECK(std::abs(pz.value) <= pz.quad_error + 1e-12);

  // halving R at fixed T increases the truncation error monotonically
  SuspensionSystem non = nonlattice_full2();
  CylinderFunction kn = non.roof();
  OrbitEnsemble nens(non, kn, 10.0);
  double Tn = std::exp(3.0 * non.c());
  double dn = nens.phi(Tn, 2, CountMode::with_repetitions) / 2.0;
  double prev = -1;
  for (double R : {400.0, 200.0, 100.0}) {
    ContourConfig c2;
    c2.d = 1.3;
    c2.R = R;
    c2.shift_disabled = true;
    PerronResult p2 = psi_ell_contour(non, kn, Tn, 2, c2, nullptr);
    double err = std::abs(p2.value - dn);
    CHECK(err >= prev);
    CHECK(err <= p2.quad_error + p2.trunc_error);
    prev = err;
  }

  // shifted-contour variant with the C(R) abscissa certified pole-free
  ContourConfig sc;
  sc.d = 1.3;
  sc.R = 14.0;
  sc.rho_reg = 3.0;
  sc.shift_disabled = false;
  sc.quad_tol = 1e-10;
  double CR = 1.0 - 1.0 / (std::pow(non.c(), 4.0) * std::pow(14.0, 3.0));
  ScanReport cert = zero_scan(non, std::max(0.01, CR - 0.01), 1.02, 0.0, 14.0, 64, 2);
  PerronResult p3 = psi_ell_contour(non, kn, Tn, 2, sc, &cert);
  CHECK(std::abs(p3.value - dn) <= p3.quad_error + p3.trunc_error);
  CHECK(p3.value == p3.main_term + p3.remainder);

  // shifted without certification refused
  CHECK_THROWS_AS(psi_ell_contour(non, kn, Tn, 2, sc, nullptr), RefusalError);
}

TEST_CASE("eta majorant really bounds |eta| on vertical lines") {
  SuspensionSystem non = nonlattice_full2();
  CylinderFunction k(non.base(), 1, [](const Word& w) { return 0.7 - 0.4 * w.symbols[0]; });
  for (double d : {1.2, 1.5}) {
    double bound = eta_abs_bound(non, k, d);
    for (double t = 0; t <= 50; t += 3.7) {
      EtaEvaluation ev = eta_resolvent(non, k, {d, t});
      CHECK(std::abs(ev.value) <= bound * (1 + 1e-9));
    }
  }
}
