#include "zetaflow/counting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace zf {

namespace {

// Inclusive boundary (<=) with a small relative tolerance, so cutoffs that
// land exactly on an orbit length count the orbit regardless of rounding in
// exp/log round trips.
bool within(double len, double budget) {
  return len <= budget + 1e-9 * std::max(1.0, std::abs(budget));
}

struct Neumaier {
  double s = 0, comp = 0;
  void add(double v) {
    double t = s + v;
    if (std::abs(s) >= std::abs(v))
      comp += (s - t) + v;
    else
      comp += (v - t) + s;
    s = t;
  }
  double total() const { return s + comp; }
};

// Budget-pruned pre-necklace DFS: emits all instances (tau, m), m ell <= L.
struct BudgetCollector {
  const Subshift& shift;
  const CylinderFunction& psi;
  const CylinderFunction& roof;
  const CylinderFunction& k;
  double L;
  int p_max;
  std::vector<OrbitInstance>* out;

  std::vector<int> w;
  std::vector<double> partial;  // running sum over determined roof positions

  void emit() {
    if (!shift.edge(w.back(), w.front())) return;
    Word word{w};
    double ell = birkhoff_sum(word, roof);
    if (!within(ell, L)) return;
    double psi_sum = birkhoff_sum(word, psi);
    double k_sum = birkhoff_sum(word, k);
    for (int m = 1; within(m * ell, L); ++m)
      out->push_back(OrbitInstance{ell, psi_sum, k_sum, word.length(), m, m * ell});
  }

  void rec(int t, int p) {
    if (t == p) emit();
    if (t == p_max) return;
    const int d = roof.depth();
    const int base = w[t - p];
    for (int v = base; v < shift.alphabet_size(); ++v) {
      if (!shift.edge(w[t - 1], v)) continue;
      w.push_back(v);
      double s = partial.back();
      if (t + 1 >= d) {
        // position t+1-d just became fully determined
        size_t start = static_cast<size_t>(t + 1 - d);
        s += roof.value(std::span<const int>(w.data() + start, static_cast<size_t>(d)));
      }
      partial.push_back(s);
      // any orbit through this prefix is at least this long
      if (within(s + (d - 1) * roof.r_min(), L)) rec(t + 1, v == base ? p : t + 1);
      w.pop_back();
      partial.pop_back();
    }
  }
};

}  // namespace

const char* to_string(CountMode m) {
  return m == CountMode::prime_only ? "prime_only" : "with_repetitions";
}

std::vector<OrbitInstance> enumerate_by_budget(const SuspensionSystem& sys,
                                               const CylinderFunction& k, double L,
                                               const BudgetOptions& opt) {
  if (!(L > 0)) throw SchemaError("budget must be positive");
  const Subshift& shift = sys.base();
  const double rmin = sys.r_min();
  if (!within(rmin, L)) return {};
  const int p_max = std::max(1, static_cast<int>(std::floor(L / rmin + 1e-9)));

  // Instance estimate: trace(A^n)/n prime orbits of period n, each with at
  // most p_max/n repetitions inside the budget.
  {
    const int N = shift.alphabet_size();
    std::vector<double> a(static_cast<size_t>(N) * N, 0.0), pw;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) a[static_cast<size_t>(i) * N + j] = shift.edge(i, j) ? 1 : 0;
    pw = a;
    double est = 0;
    for (int n = 1; n <= p_max; ++n) {
      if (n > 1) {
        std::vector<double> nx(static_cast<size_t>(N) * N, 0.0);
        for (int i = 0; i < N; ++i)
          for (int kk = 0; kk < N; ++kk) {
            double v = pw[static_cast<size_t>(i) * N + kk];
            if (v == 0) continue;
            for (int j = 0; j < N; ++j)
              nx[static_cast<size_t>(i) * N + j] += v * a[static_cast<size_t>(kk) * N + j];
          }
        pw.swap(nx);
      }
      double tr = 0;
      for (int i = 0; i < N; ++i) tr += pw[static_cast<size_t>(i) * N + i];
      est += (tr / n) * std::max(1.0, static_cast<double>(p_max) / n);
      if (est > opt.max_instances)
        throw BudgetError("orbit budget L=" + std::to_string(L) + " implies an estimated " +
                          std::to_string(est) + "+ instances (cap " +
                          std::to_string(opt.max_instances) + ")");
    }
  }

  const int N = shift.alphabet_size();
  const int d = sys.roof().depth();
  std::vector<std::vector<OrbitInstance>> parts(static_cast<size_t>(N));
  auto run_part = [&](int first) {
    BudgetCollector col{shift, sys.psi(), sys.roof(), k,
                        L,     p_max,     &parts[static_cast<size_t>(first)],
                        {},    {}};
    col.w.reserve(static_cast<size_t>(p_max));
    col.w.push_back(first);
    double s0 = 0;
    if (d == 1) {
      const int sym[1] = {first};
      s0 = sys.roof().value(std::span<const int>(sym, 1));
    }
    col.partial.push_back(s0);
    col.rec(1, 1);
  };

  int workers = std::max(1, opt.workers);
  if (workers == 1 || N == 1) {
    for (int a = 0; a < N; ++a) run_part(a);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(workers, N); ++t)
      pool.emplace_back([&]() {
        for (int a = next.fetch_add(1); a < N; a = next.fetch_add(1)) run_part(a);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<OrbitInstance> all;
  size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (auto& p : parts)
    for (auto& o : p) all.push_back(o);
  // deterministic final order regardless of worker count
  std::stable_sort(all.begin(), all.end(), [](const OrbitInstance& a, const OrbitInstance& b) {
    return a.total_length < b.total_length;
  });
  return all;
}

OrbitEnsemble::OrbitEnsemble(const SuspensionSystem& sys, const CylinderFunction& k, double L,
                             const BudgetOptions& opt)
    : budget_(L), c_(sys.c()), instances_(enumerate_by_budget(sys, k, L, opt)) {}

double OrbitEnsemble::phi(double T, int ell_order, CountMode mode) const {
  if (!(T >= 1.0)) throw SchemaError("phi needs T >= 1");
  if (ell_order < 0) throw SchemaError("phi order must be >= 0");
  const double cutoff_len = std::log(T) / c_;
  if (!within(cutoff_len, budget_))
    throw BudgetError("phi query beyond the enumerated budget");
  Neumaier sum;
  for (const auto& o : instances_) {
    if (!within(o.total_length, cutoff_len)) break;
    if (mode == CountMode::prime_only && o.multiplicity != 1) continue;
    double term = o.k * std::exp(o.multiplicity * o.psi);
    if (ell_order > 0) {
      double gap = std::max(0.0, T - std::exp(c_ * o.total_length));
      term *= std::pow(gap, ell_order);
    }
    sum.add(term);
  }
  return sum.total();
}

double OrbitEnsemble::Z_T(double T_len, CountMode mode) const {
  if (!(T_len > 0)) throw SchemaError("Z_T needs T > 0");
  if (!within(T_len, budget_)) throw BudgetError("Z_T query beyond the enumerated budget");
  Neumaier sum;
  for (const auto& o : instances_) {
    if (!within(o.total_length, T_len)) break;
    if (mode == CountMode::prime_only && o.multiplicity != 1) continue;
    sum.add(o.ell * std::exp(o.multiplicity * o.psi));
  }
  return sum.total();
}

double OrbitEnsemble::mu_T(double T_len, CountMode mode) const {
  return window(T_len, T_len, mode);
}

double OrbitEnsemble::window(double T_len, double eps, CountMode mode) const {
  if (!(eps > 0) || !(eps <= T_len)) throw SchemaError("window needs 0 < eps <= T");
  if (!within(T_len, budget_)) throw BudgetError("window query beyond the enumerated budget");
  const double lower = T_len - eps;
  Neumaier num, den;
  size_t used = 0;
  for (const auto& o : instances_) {
    if (!within(o.total_length, T_len)) break;
    if (within(o.total_length, lower)) continue;  // outside the window on the left
    if (mode == CountMode::prime_only && o.multiplicity != 1) continue;
    double wgt = std::exp(o.multiplicity * o.psi);
    num.add(o.k * wgt);
    den.add(o.ell * wgt);
    ++used;
  }
  if (used == 0) throw RefusalError("empty orbit window");
  return num.total() / den.total();
}

std::vector<double> CountingCurve::abs_errors() const {
  std::vector<double> e;
  e.reserve(value.size());
  for (double v : value) e.push_back(std::abs(v - reference));
  return e;
}

CountingCurve error_curve(const SuspensionSystem& sys, const FlowObservable& K,
                          const std::vector<double>& T_grid, CountMode mode,
                          const BudgetOptions& opt) {
  if (T_grid.size() < 1) throw SchemaError("empty T grid");
  for (size_t i = 0; i + 1 < T_grid.size(); ++i)
    if (!(T_grid[i] < T_grid[i + 1])) throw SchemaError("T grid must be strictly increasing");

  LiftedObservable lk = lift(K, sys.roof());
  OrbitEnsemble ens(sys, lk.k, T_grid.back(), opt);

  CountingCurve curve;
  curve.T = T_grid;
  curve.mode = mode;
  curve.lattice = sys.lattice().lattice;
  curve.c = sys.c();
  curve.reference = flow_average(sys.base(), sys.psi(), sys.roof(), lk.k, sys.c());
  curve.value.reserve(T_grid.size());
  for (double T : T_grid) curve.value.push_back(ens.mu_T(T, mode));
  return curve;
}

RateFit fit_rate(const CountingCurve& curve, RateFit::Model model, RateFit::Points points,
                 int envelope_blocks) {
  RateFit fit;
  fit.model = model;
  fit.points = points;
  auto errs = curve.abs_errors();

  std::vector<uint8_t> keep(errs.size(), 1);
  if (points == RateFit::Points::envelope) {
    if (envelope_blocks < 4) throw SchemaError("envelope fit needs >= 4 blocks");
    keep.assign(errs.size(), 0);
    double lo = curve.T.front(), hi = curve.T.back();
    double w = (hi - lo) / envelope_blocks;
    for (int b = 0; b < envelope_blocks; ++b) {
      double bl = lo + b * w, bh = b + 1 == envelope_blocks ? hi + 1e-12 : lo + (b + 1) * w;
      int best = -1;
      for (size_t i = 0; i < errs.size(); ++i)
        if (curve.T[i] >= bl && curve.T[i] < bh)
          if (best < 0 || errs[i] > errs[static_cast<size_t>(best)]) best = static_cast<int>(i);
      if (best >= 0) keep[static_cast<size_t>(best)] = 1;
    }
  }

  std::vector<double> xs, ys;
  for (size_t i = 0; i < errs.size(); ++i) {
    if (!keep[i]) continue;
    if (!(errs[i] > 0) || errs[i] < 1e-300) {
      ++fit.n_excluded;
      continue;
    }
    double x = model == RateFit::Model::exponential ? curve.T[i] : std::log(curve.T[i]);
    xs.push_back(x);
    ys.push_back(std::log(errs[i]));
  }
  if (xs.size() < 4)
    throw RefusalError("rate fit refuses with " + std::to_string(xs.size()) +
                       " positive error samples (needs >= 4)");
  fit.n_points = static_cast<int>(xs.size());

  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - slope * sx) / n;
  fit.delta_hat = model == RateFit::Model::exponential ? -slope / curve.c : -slope;
  double ss = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double e = ys[i] - (fit.intercept + slope * xs[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

UnsmoothBracket unsmooth(const std::function<double(double)>& phi1, double T,
                         double delta_exponent, double grid_resolution) {
  if (!(T > 1)) throw SchemaError("unsmooth needs T > 1");
  UnsmoothBracket b;
  b.delta_T = std::pow(T, 1.0 - delta_exponent);
  if (grid_resolution > 0 && b.delta_T < grid_resolution)
    throw RefusalError("smoothing width Delta(T) is below the evaluator resolution");
  b.lower = (phi1(T) - phi1(T - b.delta_T)) / b.delta_T;
  b.upper = (phi1(T + b.delta_T) - phi1(T)) / b.delta_T;
  return b;
}

}  // namespace zf
