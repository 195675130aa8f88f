#include "zetaflow/suspension.hpp"

#include <algorithm>
#include <cmath>

namespace zf {

namespace {

constexpr double kLatticeTol = 1e-9;

double sym_gcd(double a, double b) {
  a = std::abs(a);
  b = std::abs(b);
  if (a < b) std::swap(a, b);
  while (b > kLatticeTol) {
    double r = std::abs(a - b * std::round(a / b));
    a = b;
    b = r;
    if (a < b) std::swap(a, b);
  }
  return a;
}

}  // namespace

LatticeReport detect_lattice(const Subshift& shift, const CylinderFunction& roof, int p_max) {
  if (p_max < 2) throw SchemaError("detect_lattice needs p_max >= 2");
  LatticeReport rep;
  if (p_max < 3) {
    rep.conclusive = false;
    return rep;
  }
  CylinderFunction zero = CylinderFunction::constant(shift, 1, 0.0);
  CylinderFunction r = roof;
  if (!r.strictly_positive()) r.mark_strictly_positive();
  // only ~50 lengths are sampled; keep the word tree small for big alphabets
  int depth_cap = std::max(
      3, static_cast<int>(26.0 / std::log2(static_cast<double>(shift.alphabet_size()) + 1)));
  auto orbits = enumerate_prime_orbits(shift, zero, r, nullptr, std::min(p_max, depth_cap));
  std::vector<double> lens;
  for (const auto& o : orbits) {
    lens.push_back(o.ell);
    if (lens.size() >= 50) break;
  }
  if (lens.size() < 2) {
    rep.conclusive = false;
    return rep;
  }
  rep.conclusive = true;
  rep.lengths_used = static_cast<int>(lens.size());

  double g = lens[0];
  for (double l : lens) g = sym_gcd(g, l);
  double min_len = *std::min_element(lens.begin(), lens.end());
  if (g < 1e-6 * min_len) {
    rep.lattice = false;
    return rep;
  }
  for (double l : lens) {
    double off = std::abs(l - g * std::round(l / g));
    if (off > kLatticeTol * (1.0 + l / g)) {
      rep.lattice = false;
      return rep;
    }
  }
  rep.lattice = true;
  rep.span = g;
  return rep;
}

LiftedObservable lift(const FlowObservable& K, const CylinderFunction& roof) {
  if (K.coeffs.empty()) throw SchemaError("flow observable has no coefficients");
  const Subshift& shift = roof.shift();
  for (const auto& cj : K.coeffs)
    if (!(cj.shift() == shift))
      throw SchemaError("observable coefficients and roof live on different shifts");
  if (!roof.strictly_positive())
    throw SchemaError("roof must be strictly positive before lifting");

  int d = roof.depth();
  for (const auto& cj : K.coeffs) d = std::max(d, cj.depth());

  LiftedObservable out{
      CylinderFunction(shift, d,
                       [&](const Word& w) {
                         std::span<const int> s(w.symbols.data(), w.symbols.size());
                         double r = roof.value(s.first(static_cast<size_t>(roof.depth())));
                         double acc = 0, rpow = r;
                         for (size_t j = 0; j < K.coeffs.size(); ++j) {
                           const auto& cj = K.coeffs[j];
                           acc += cj.value(s.first(static_cast<size_t>(cj.depth()))) * rpow /
                                  static_cast<double>(j + 1);
                           rpow *= r;
                         }
                         return acc;
                       }),
      0, 0};
  out.sup_k = out.k.max_abs();
  ObservableNorms n = observable_norms(K, out.k, roof);
  out.bound = n.bound;
  return out;
}

ObservableNorms observable_norms(const FlowObservable& K, const CylinderFunction& k,
                                 const CylinderFunction& roof) {
  const Subshift& shift = roof.shift();
  int d = roof.depth();
  for (const auto& cj : K.coeffs) d = std::max(d, cj.depth());

  ObservableNorms out;
  for (const Word& w : admissible_words(shift, d)) {
    std::span<const int> s(w.symbols.data(), w.symbols.size());
    double r = roof.value(s.first(static_cast<size_t>(roof.depth())));
    std::vector<double> c;
    for (const auto& cj : K.coeffs)
      c.push_back(cj.value(s.first(static_cast<size_t>(cj.depth()))));
    auto eval = [&](double u) {
      double acc = 0, up = 1;
      for (double cj : c) {
        acc += cj * up;
        up *= u;
      }
      return std::abs(acc);
    };
    double sup = std::max(eval(0.0), eval(r));
    if (c.size() == 3 && c[2] != 0) {
      double ucrit = -c[1] / (2 * c[2]);
      if (ucrit > 0 && ucrit < r) sup = std::max(sup, eval(ucrit));
    } else if (c.size() > 3) {
      // dense sampling with one refinement pass at 1e-9 resolution
      const int m = 512;
      double best_u = 0;
      for (int i = 0; i <= m; ++i) {
        double u = r * i / m;
        double v = eval(u);
        if (v > sup) {
          sup = v;
          best_u = u;
        }
      }
      double h = r / m;
      double lo = std::max(0.0, best_u - h), hi = std::min(r, best_u + h);
      while (hi - lo > 1e-9) {
        double u1 = lo + (hi - lo) / 3, u2 = hi - (hi - lo) / 3;
        if (eval(u1) < eval(u2))
          lo = u1;
        else
          hi = u2;
      }
      sup = std::max(sup, eval(0.5 * (lo + hi)));
    }
    out.sup_K = std::max(out.sup_K, sup);
  }
  out.sup_k = k.max_abs();
  out.bound = roof.max_value() * out.sup_K;
  if (out.sup_k > out.bound * (1 + 1e-12) + 1e-300)
    throw RefusalError("lifted observable violates the sup-norm bound");
  return out;
}

SuspensionSystem::SuspensionSystem(Subshift base, CylinderFunction psi, CylinderFunction roof,
                                   int lattice_scan_pmax)
    : base_(std::move(base)), psi_(std::move(psi)), roof_(std::move(roof)) {
  base_.require_mixing("suspension system");
  if (!(psi_.shift() == base_) || !(roof_.shift() == base_))
    throw SchemaError("psi/roof do not live on the base shift");
  if (!roof_.strictly_positive()) roof_.mark_strictly_positive();
  norm_ = solve_flow_pressure(base_, psi_, roof_);
  if (!(norm_.c > 0)) throw RefusalError("flow pressure constant is not positive");
  lattice_ = detect_lattice(base_, roof_, lattice_scan_pmax);
}

EdgeSystem edge_presentation(const SuspensionSystem& sys, const CylinderFunction* k) {
  int d = std::max(sys.psi().depth(), sys.roof().depth());
  if (k) {
    if (!(k->shift() == sys.base()))
      throw SchemaError("observable does not live on the base shift");
    d = std::max(d, k->depth());
  }
  if (d <= 2) {
    EdgeSystem es{sys.base(), sys.psi(), sys.roof(), std::nullopt};
    if (k) es.k = *k;
    return es;
  }
  std::vector<const CylinderFunction*> fns{&sys.psi(), &sys.roof()};
  if (k) fns.push_back(k);
  RecodedSystem rs = recode_depth_one(sys.base(), fns);
  EdgeSystem es{rs.shift, rs.fns[0], rs.fns[1], std::nullopt};
  if (k) es.k = rs.fns[2];
  return es;
}

}  // namespace zf
