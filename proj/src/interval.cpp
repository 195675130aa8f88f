#include "zetaflow/interval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

namespace zf {

namespace {

constexpr double kMarkovTol = 1e-14;

std::vector<double> poly_real_roots(std::vector<double> c) {
  // trim leading zeros
  while (c.size() > 1 && std::abs(c.back()) < 1e-300) c.pop_back();
  const int deg = static_cast<int>(c.size()) - 1;
  std::vector<double> roots;
  if (deg < 1) return roots;
  if (deg == 1) {
    roots.push_back(-c[0] / c[1]);
    return roots;
  }
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[static_cast<size_t>(i)] / c.back();
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
  for (int i = 0; i < deg; ++i) {
    auto z = es.eigenvalues()(i);
    if (std::abs(z.imag()) < 1e-9 * std::max(1.0, std::abs(z.real())))
      roots.push_back(z.real());
  }
  return roots;
}

}  // namespace

ExpandingMarkovMap::ExpandingMarkovMap(std::vector<IntervalSpec> intervals,
                                       std::vector<BranchSpec> branches)
    : intervals_(std::move(intervals)), branches_(std::move(branches)) {
  const size_t n = intervals_.size();
  if (n == 0) throw SchemaError("interval map needs at least one interval");
  if (branches_.size() != n) throw SchemaError("one branch per interval required");
  for (size_t i = 0; i < n; ++i) {
    if (!(intervals_[i].a < intervals_[i].b))
      throw SchemaError("interval " + std::to_string(i) + " is degenerate");
    if (i + 1 < n && intervals_[i].b > intervals_[i + 1].a + kMarkovTol)
      throw SchemaError("intervals must be disjoint and ordered");
  }
  gamma_ = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!(std::abs(branches_[i].slope) > 1.0))
      throw SchemaError("branch " + std::to_string(i) + " is not expanding");
    gamma_ = std::max(gamma_, 1.0 / std::abs(branches_[i].slope));
  }

  incidence_.assign(n * n, 0);
  for (size_t i = 0; i < n; ++i) {
    double fa = branches_[i].slope * intervals_[i].a + branches_[i].offset;
    double fb = branches_[i].slope * intervals_[i].b + branches_[i].offset;
    double lo = std::min(fa, fb), hi = std::max(fa, fb);
    bool lo_aligned = false, hi_aligned = false;
    for (size_t j = 0; j < n; ++j) {
      const auto& J = intervals_[j];
      double olap = std::min(hi, J.b) - std::max(lo, J.a);
      if (olap > kMarkovTol * std::max(1.0, J.length())) {
        // any interval met by the image must be fully covered
        if (J.a < lo - 1e-12 || J.b > hi + 1e-12)
          throw SchemaError("Markov property violated: branch " + std::to_string(i) +
                            " image [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            "] cuts interval " + std::to_string(j) + " at endpoint " +
                            std::to_string(J.a < lo - 1e-12 ? lo : hi));
        incidence_[i * n + j] = 1;
        if (std::abs(J.a - lo) <= 1e-12) lo_aligned = true;
        if (std::abs(J.b - hi) <= 1e-12) hi_aligned = true;
      }
    }
    if (!lo_aligned || !hi_aligned)
      throw SchemaError("Markov property violated: branch " + std::to_string(i) +
                        " image endpoint " + std::to_string(lo_aligned ? hi : lo) +
                        " does not align with any interval endpoint");
  }
}

double ExpandingMarkovMap::apply_forward(int branch, double x) const {
  return branches_[static_cast<size_t>(branch)].slope * x +
         branches_[static_cast<size_t>(branch)].offset;
}

int ExpandingMarkovMap::locate(double x) const {
  for (size_t i = 0; i < intervals_.size(); ++i)
    if (intervals_[i].contains(x, 1e-9)) return static_cast<int>(i);
  throw RefusalError("point " + std::to_string(x) + " is outside the interval domain");
}

bool ExpandingMarkovMap::word_admissible(std::span<const int> word) const {
  if (word.empty()) return false;
  for (int v : word)
    if (v < 0 || v >= branch_count()) return false;
  for (size_t i = 0; i + 1 < word.size(); ++i)
    if (!edge(word[i], word[i + 1])) return false;
  return true;
}

bool ExpandingMarkovMap::word_cyclically_admissible(std::span<const int> word) const {
  return word_admissible(word) && edge(word[word.size() - 1], word[0]);
}

AffineMap ExpandingMarkovMap::inverse_branch(std::span<const int> word) const {
  if (!word_admissible(word)) throw SchemaError("inverse branch of an inadmissible word");
  AffineMap g{1, 0};
  for (size_t idx = word.size(); idx-- > 0;) {
    const auto& br = branches_[static_cast<size_t>(word[idx])];
    AffineMap inv{1.0 / br.slope, -br.offset / br.slope};
    g = idx + 1 == word.size() ? inv : inv.after(g);
  }
  return g;
}

double ExpandingMarkovMap::periodic_point(std::span<const int> word) const {
  if (!word_cyclically_admissible(word))
    throw SchemaError("periodic point of a cyclically inadmissible word");
  AffineMap g = inverse_branch(word);
  double x = g.offset / (1.0 - g.slope);
  if (!intervals_[static_cast<size_t>(word[0])].contains(x, 1e-9))
    throw RefusalError("periodic point " + std::to_string(x) +
                       " escaped its interval (inconsistent map spec)");
  return x;
}

Subshift ExpandingMarkovMap::incidence_shift() const {
  const int n = branch_count();
  std::vector<std::vector<int>> rows(static_cast<size_t>(n), std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rows[static_cast<size_t>(i)][static_cast<size_t>(j)] = edge(i, j);
  MixingReport rep = verify_mixing(rows);
  return rep.mixing() ? Subshift(n, rows) : Subshift::unchecked(n, rows);
}

double PiecewisePoly::eval(int interval, double x) const {
  const auto& c = coeffs[static_cast<size_t>(interval)];
  double v = 0;
  for (size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return v;
}

double PiecewisePoly::derivative(int interval, double x) const {
  const auto& c = coeffs[static_cast<size_t>(interval)];
  double v = 0;
  for (size_t i = c.size(); i-- > 1;) v = v * x + c[i] * static_cast<double>(i);
  return v;
}

double PiecewisePoly::min_on(const ExpandingMarkovMap& map) const {
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < map.branch_count(); ++i) {
    const auto& iv = map.interval(i);
    lo = std::min({lo, eval(i, iv.a), eval(i, iv.b)});
    const auto& c = coeffs[static_cast<size_t>(i)];
    if (c.size() > 6 + 1) throw SchemaError("piecewise polynomial degree exceeds 6");
    std::vector<double> dc;
    for (size_t k = 1; k < c.size(); ++k) dc.push_back(c[k] * static_cast<double>(k));
    for (double r : poly_real_roots(dc))
      if (r > iv.a && r < iv.b) lo = std::min(lo, eval(i, r));
  }
  return lo;
}

double PiecewisePoly::max_abs_on(const ExpandingMarkovMap& map) const {
  double hi = 0;
  for (int i = 0; i < map.branch_count(); ++i) {
    const auto& iv = map.interval(i);
    hi = std::max({hi, std::abs(eval(i, iv.a)), std::abs(eval(i, iv.b))});
    const auto& c = coeffs[static_cast<size_t>(i)];
    std::vector<double> dc;
    for (size_t k = 1; k < c.size(); ++k) dc.push_back(c[k] * static_cast<double>(k));
    for (double r : poly_real_roots(dc))
      if (r > iv.a && r < iv.b) hi = std::max(hi, std::abs(eval(i, r)));
  }
  return hi;
}

PiecewisePoly PiecewisePoly::constant(int n_intervals, double value) {
  PiecewisePoly p;
  p.coeffs.assign(static_cast<size_t>(n_intervals), {value});
  return p;
}

bool PiecewisePoly::is_constant(double* value) const {
  double v0 = coeffs.empty() ? 0 : coeffs[0].empty() ? 0 : coeffs[0][0];
  for (const auto& c : coeffs) {
    for (size_t k = 1; k < c.size(); ++k)
      if (c[k] != 0) return false;
    double v = c.empty() ? 0 : c[0];
    if (v != v0) return false;
  }
  if (value) *value = v0;
  return true;
}

CollocationGrid::CollocationGrid(std::vector<IntervalSpec> iv, int ord)
    : intervals(std::move(iv)), order(ord) {
  if (order < 7) throw SchemaError("collocation needs at least 8 nodes per interval");
  const int m = order;
  xi.resize(static_cast<size_t>(m) + 1);
  bary.resize(static_cast<size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) {
    xi[static_cast<size_t>(j)] = std::cos(M_PI * j / m);
    bary[static_cast<size_t>(j)] = (j % 2 == 0 ? 1.0 : -1.0) * (j == 0 || j == m ? 0.5 : 1.0);
  }
  // Chebyshev-Gauss-Lobatto differentiation matrix with the negative-sum trick
  diff = Eigen::MatrixXd::Zero(m + 1, m + 1);
  auto cc = [m](int i) { return (i == 0 || i == m) ? 2.0 : 1.0; };
  for (int i = 0; i <= m; ++i) {
    double rowsum = 0;
    for (int j = 0; j <= m; ++j) {
      if (i == j) continue;
      double v = (cc(i) / cc(j)) * ((i + j) % 2 == 0 ? 1.0 : -1.0) /
                 (xi[static_cast<size_t>(i)] - xi[static_cast<size_t>(j)]);
      diff(i, j) = v;
      rowsum += v;
    }
    diff(i, i) = -rowsum;
  }
}

double CollocationGrid::node(int interval, int j) const {
  const auto& iv = intervals[static_cast<size_t>(interval)];
  return iv.a + 0.5 * (iv.b - iv.a) * (1.0 + xi[static_cast<size_t>(j)]);
}

void CollocationGrid::interp_row(int interval, double x, Eigen::RowVectorXd& out) const {
  const int m = order;
  out.setZero(m + 1);
  const auto& iv = intervals[static_cast<size_t>(interval)];
  double xr = 2.0 * (x - iv.a) / (iv.b - iv.a) - 1.0;  // back to [-1, 1]
  double denom = 0;
  for (int j = 0; j <= m; ++j) {
    double dx = xr - xi[static_cast<size_t>(j)];
    if (std::abs(dx) < 1e-15) {
      out.setZero();
      out(j) = 1.0;
      return;
    }
    double w = bary[static_cast<size_t>(j)] / dx;
    out(j) = w;
    denom += w;
  }
  out /= denom;
}

GridFunction::GridFunction(std::shared_ptr<const CollocationGrid> grid)
    : grid_(std::move(grid)),
      vals_(grid_->intervals.size(),
            Eigen::VectorXcd::Zero(grid_->nodes_per_interval())) {}

GridFunction GridFunction::from_callable(std::shared_ptr<const CollocationGrid> grid,
                                         const std::function<Complex(int, double)>& f) {
  GridFunction g(grid);
  for (size_t i = 0; i < grid->intervals.size(); ++i)
    for (int j = 0; j <= grid->order; ++j)
      g.vals_[i](j) = f(static_cast<int>(i), grid->node(static_cast<int>(i), j));
  return g;
}

Complex GridFunction::eval(int interval, double x) const {
  Eigen::RowVectorXd row;
  grid_->interp_row(interval, x, row);
  return (row.cast<Complex>() * vals_[static_cast<size_t>(interval)])(0);
}

GridFunction GridFunction::derivative() const {
  GridFunction g(grid_);
  for (size_t i = 0; i < grid_->intervals.size(); ++i) {
    double scale = 2.0 / grid_->intervals[i].length();
    g.vals_[i] = scale * (grid_->diff * vals_[i]);
  }
  return g;
}

GridFunction GridFunction::resampled(int new_order) const {
  auto fine = std::make_shared<CollocationGrid>(grid_->intervals, new_order);
  GridFunction g(fine);
  for (size_t i = 0; i < fine->intervals.size(); ++i)
    for (int j = 0; j <= new_order; ++j)
      g.values(static_cast<int>(i))(j) = eval(static_cast<int>(i), fine->node(static_cast<int>(i), j));
  return g;
}

double GridFunction::sup_abs() const {
  double best = 0;
  for (size_t i = 0; i < grid_->intervals.size(); ++i) {
    const auto& iv = grid_->intervals[i];
    const int samples = 4 * grid_->nodes_per_interval();
    double best_x = iv.a;
    for (int q = 0; q <= samples; ++q) {
      double x = iv.a + iv.length() * q / samples;
      double v = std::abs(eval(static_cast<int>(i), x));
      if (v > best) {
        best = v;
        best_x = x;
      }
    }
    // local refinement around the best sample
    double h = iv.length() / samples;
    double lo = std::max(iv.a, best_x - h), hi = std::min(iv.b, best_x + h);
    for (int it = 0; it < 40 && hi - lo > 1e-13; ++it) {
      double x1 = lo + (hi - lo) / 3, x2 = hi - (hi - lo) / 3;
      if (std::abs(eval(static_cast<int>(i), x1)) < std::abs(eval(static_cast<int>(i), x2)))
        lo = x1;
      else
        hi = x2;
    }
    best = std::max(best, std::abs(eval(static_cast<int>(i), 0.5 * (lo + hi))));
  }
  return best;
}

Eigen::VectorXcd GridFunction::stacked() const {
  const int m = grid_->nodes_per_interval();
  Eigen::VectorXcd v(static_cast<Eigen::Index>(grid_->stacked_size()));
  for (size_t i = 0; i < vals_.size(); ++i) v.segment(static_cast<Eigen::Index>(i) * m, m) = vals_[i];
  return v;
}

void GridFunction::set_stacked(const Eigen::VectorXcd& v) {
  const int m = grid_->nodes_per_interval();
  for (size_t i = 0; i < vals_.size(); ++i) vals_[i] = v.segment(static_cast<Eigen::Index>(i) * m, m);
}

double norm_1t(const GridFunction& w, double t) {
  double s0 = w.sup_abs();
  double s1 = w.derivative().sup_abs();
  return std::abs(t) > 1.0 ? std::max(s0, s1 / std::abs(t)) : std::max(s0, s1);
}

double spectral_roundtrip_error(const CollocationGrid& grid) {
  // interpolate-then-sample identity at the nodes
  auto gp = std::make_shared<CollocationGrid>(grid.intervals, grid.order);
  GridFunction g = GridFunction::from_callable(
      gp, [](int, double x) { return Complex(std::sin(3.0 * x) + 0.25 * x * x, 0.0); });
  double err = 0;
  for (size_t i = 0; i < gp->intervals.size(); ++i)
    for (int j = 0; j <= gp->order; ++j) {
      Complex direct = g.values(static_cast<int>(i))(j);
      Complex via = g.eval(static_cast<int>(i), gp->node(static_cast<int>(i), j));
      err = std::max(err, std::abs(direct - via));
    }
  return err;
}

TransferOperator::TransferOperator(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                                   const PiecewisePoly& roof, double c, Complex s,
                                   std::shared_ptr<const CollocationGrid> grid)
    : map_(&map), psi_(&psi), roof_(&roof), c_(c), s_(s), grid_(std::move(grid)) {
  const int n = map.branch_count();
  const int m = grid_->nodes_per_interval();
  m_ = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n) * m, static_cast<Eigen::Index>(n) * m);
  Eigen::RowVectorXd row;
  for (int j = 0; j < n; ++j)
    for (int alpha = 0; alpha < m; ++alpha) {
      double x = grid_->node(j, alpha);
      Eigen::Index target = static_cast<Eigen::Index>(j) * m + alpha;
      for (int i = 0; i < n; ++i) {
        if (!map.edge(i, j)) continue;
        const int word[1] = {i};
        double y = map.inverse_branch(std::span<const int>(word, 1))(x);
        Complex wgt = std::exp(Complex(psi.eval(i, y), 0.0) - s * c * roof.eval(i, y));
        grid_->interp_row(i, y, row);
        for (int beta = 0; beta < m; ++beta)
          m_(target, static_cast<Eigen::Index>(i) * m + beta) += wgt * row(beta);
      }
    }
}

GridFunction TransferOperator::apply_unchecked(const GridFunction& w) const {
  GridFunction out(grid_);
  out.set_stacked(m_ * w.stacked());
  return out;
}

double TransferOperator::interpolation_residual(const GridFunction& w) const {
  return interpolation_residual(w, apply_unchecked(w));
}

double TransferOperator::interpolation_residual(const GridFunction& w,
                                                const GridFunction& lw) const {
  const int n = map_->branch_count();
  double scale = 0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, lw.values(i).cwiseAbs().maxCoeff());
  if (!(scale > 0)) return 0.0;

  // off-node spots; direct operator evaluation vs interpolation of the result
  const double offsets[3] = {0.2137, 0.5316, 0.8642};
  double worst = 0;
  for (int j = 0; j < n; ++j) {
    const auto& iv = map_->interval(j);
    for (double q : offsets) {
      double x = iv.a + iv.length() * q;
      Complex direct = 0;
      for (int i = 0; i < n; ++i) {
        if (!map_->edge(i, j)) continue;
        const int word[1] = {i};
        double y = map_->inverse_branch(std::span<const int>(word, 1))(x);
        direct += std::exp(Complex(psi_->eval(i, y), 0.0) - s_ * c_ * roof_->eval(i, y)) *
                  w.eval(i, y);
      }
      worst = std::max(worst, std::abs(direct - lw.eval(j, x)) / scale);
    }
  }
  return worst;
}

GridFunction TransferOperator::apply(const GridFunction& w) const {
  double res = interpolation_residual(w);
  if (res > 1e-10)
    throw RefusalError("transfer operator under-resolved (interpolation residual " +
                       std::to_string(res) + "); rebuild with a higher order");
  return apply_unchecked(w);
}

Complex TransferOperator::leading_eigenvalue() const {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m_, false);
  Complex lead = es.eigenvalues()(0);
  for (int i = 1; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i)) > std::abs(lead)) lead = es.eigenvalues()(i);
  return lead;
}

TransferOperator build_transfer_operator(const ExpandingMarkovMap& map,
                                         const PiecewisePoly& psi, const PiecewisePoly& roof,
                                         double c, Complex s, int order, int max_order) {
  std::vector<IntervalSpec> ivs;
  for (int i = 0; i < map.branch_count(); ++i) ivs.push_back(map.interval(i));
  for (int ord = order; ord <= max_order; ord *= 2) {
    auto grid = std::make_shared<CollocationGrid>(ivs, ord);
    TransferOperator op(map, psi, roof, c, s, grid);
    GridFunction probe = GridFunction::from_callable(grid, [](int, double x) {
      return Complex(1.0 + 0.3 * std::sin(2.0 * x), 0.2 * std::cos(3.0 * x));
    });
    if (op.interpolation_residual(probe) <= 1e-10) return op;
  }
  throw RefusalError("transfer operator stayed under-resolved up to order " +
                     std::to_string(max_order));
}

double interval_pressure(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                         const PiecewisePoly& roof, double u, int order) {
  TransferOperator op = build_transfer_operator(map, psi, roof, u, Complex(1.0, 0.0), order);
  return std::log(std::abs(op.leading_eigenvalue()));
}

double solve_interval_normalization(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                                    const PiecewisePoly& roof, int order) {
  double rmin = roof.min_on(map);
  if (!(rmin > 0)) throw SchemaError("interval roof is not strictly positive");
  double p0 = interval_pressure(map, psi, roof, 0.0, order);
  if (!(p0 > 0)) throw RefusalError("interval model has P(psi) <= 0; cannot normalize");
  double lo = 0, hi = (p0 + 1.0) / rmin;
  double flo = p0, fhi = interval_pressure(map, psi, roof, hi, order);
  if (!(fhi < 0)) throw RefusalError("interval normalization bracket failed");
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    double fm = interval_pressure(map, psi, roof, mid, order);
    if (fm > 0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  if (fhi != flo) {
    double cs = lo - flo * (hi - lo) / (fhi - flo);
    if (cs > 0) return cs;
  }
  return 0.5 * (lo + hi);
}

namespace {

GridFunction random_trial(std::shared_ptr<const CollocationGrid> grid, uint64_t seed,
                          bool const_trial) {
  GridFunction g(grid);
  const int m = grid->order;
  if (const_trial) {
    for (size_t i = 0; i < grid->intervals.size(); ++i)
      g.values(static_cast<int>(i)) = Eigen::VectorXcd::Ones(m + 1);
    return g;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (size_t i = 0; i < grid->intervals.size(); ++i) {
    std::vector<Complex> coef(static_cast<size_t>(m) + 1);
    for (int kdeg = 0; kdeg <= m; ++kdeg) {
      double damp = 1.0 / ((1.0 + kdeg) * (1.0 + kdeg));
      coef[static_cast<size_t>(kdeg)] = Complex(u(rng), u(rng)) * damp;
    }
    // T_k(cos(pi j / m)) = cos(pi k j / m)
    for (int j = 0; j <= m; ++j) {
      Complex v = 0;
      for (int kdeg = 0; kdeg <= m; ++kdeg)
        v += coef[static_cast<size_t>(kdeg)] * std::cos(M_PI * kdeg * j / m);
      g.values(static_cast<int>(i))(j) = v;
    }
  }
  return g;
}

}  // namespace

OpNormSequence op_norm_estimate(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                                const PiecewisePoly& roof, double c, Complex s, int n_max,
                                int trials, uint64_t seed, int order) {
  if (trials < 1) throw SchemaError("op_norm_estimate needs trials >= 32 (got 0)");
  if (trials < 32) throw SchemaError("op_norm_estimate needs trials >= 32");
  if (n_max < 1) throw SchemaError("op_norm_estimate needs n_max >= 1");

  const double t = s.imag();
  for (int ord = order; ord <= 256; ord *= 2) {
    try {
      TransferOperator op = build_transfer_operator(map, psi, roof, c, s, ord, 256);
      auto grid = op.grid();

      OpNormSequence out;
      out.order_used = grid->order;
      out.trials = trials;
      out.norms.assign(static_cast<size_t>(n_max), 0.0);

      for (int trial = 0; trial < trials; ++trial) {
        uint64_t tseed = seed ^ (0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(trial + 1));
        GridFunction w = random_trial(grid, tseed, trial == 0);
        double nw = norm_1t(w, t);
        if (!(nw > 0)) continue;
        GridFunction prev(grid), cur(grid);
        prev.set_stacked(w.stacked() / nw);
        for (int n = 1; n <= n_max; ++n) {
          cur.set_stacked(op.matrix() * prev.stacked());
          if (op.interpolation_residual(prev, cur) > 1e-10)
            throw RefusalError("iterate under-resolved");
          out.norms[static_cast<size_t>(n - 1)] =
              std::max(out.norms[static_cast<size_t>(n - 1)], norm_1t(cur, t));
          prev = cur;
        }
      }
      return out;
    } catch (const RefusalError&) {
      if (2 * ord > 256) throw;
    }
  }
  throw RefusalError("op_norm_estimate stayed under-resolved up to order 256");
}

namespace {

bool roof_lattice_warning(const ExpandingMarkovMap& map, const PiecewisePoly& roof) {
  for (const auto& c : roof.coeffs)
    for (size_t k = 1; k < c.size(); ++k)
      if (c[k] != 0) return false;
  // all branches constant: lengths live in the group generated by the values
  double g = 0;
  for (int i = 0; i < map.branch_count(); ++i) {
    double v = roof.eval(i, map.interval(i).mid());
    g = g == 0 ? std::abs(v) : g;
    double a = std::max(g, std::abs(v)), b = std::min(g, std::abs(v));
    while (b > 1e-9) {
      double r = std::abs(a - b * std::round(a / b));
      a = b;
      b = r;
      if (a < b) std::swap(a, b);
    }
    g = a;
  }
  return g > 1e-6;
}

}  // namespace

DolgopyatProbeResult dolgopyat_probe(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                                     const PiecewisePoly& roof, double c, double sigma,
                                     double t, int n_max, int trials, uint64_t seed,
                                     int order) {
  if (!(std::abs(t) >= std::exp(1.0)))
    throw SchemaError("dolgopyat_probe needs |t| >= e so that floor(log|t|) >= 1");
  DolgopyatProbeResult res;
  res.sigma = sigma;
  res.t = t;
  res.block_len = static_cast<int>(std::floor(std::log(std::abs(t))));
  res.lattice_warning = roof_lattice_warning(map, roof);

  OpNormSequence seq =
      op_norm_estimate(map, psi, roof, c, Complex(sigma, t), n_max, trials, seed, order);
  res.norms = seq.norms;

  // least squares of log ||L^n|| against n
  std::vector<double> xs, ys;
  for (size_t i = 0; i < res.norms.size(); ++i)
    if (res.norms[i] > 0) {
      xs.push_back(static_cast<double>(i + 1));
      ys.push_back(std::log(res.norms[i]));
    }
  if (xs.size() < 2) throw RefusalError("dolgopyat_probe has too few usable norms");
  double n = static_cast<double>(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double intercept = (sy - slope * sx) / n;
  res.rho_hat = std::exp(slope);
  res.rho_hat_block = std::exp(slope * res.block_len);
  res.C_hat = std::exp(intercept);
  double ss = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double e = ys[i] - (intercept + slope * xs[i]);
    ss += e * e;
  }
  res.fit_residual = std::sqrt(ss / n);
  return res;
}

double telescoping_residual(const ExpandingMarkovMap& map, const PiecewisePoly& psi,
                            const PiecewisePoly& roof, double c, int n, Complex s,
                            const GridFunction& k, PointRule rule) {
  if (n < 1) throw SchemaError("telescoping residual needs n >= 1");
  const int N = map.branch_count();

  TransferOperator op = build_transfer_operator(map, psi, roof, c, s, k.grid().order,
                                                std::max(k.grid().order, 256));
  auto grid = op.grid();
  const GridFunction kk = k.grid().order == grid->order ? k : k.resampled(grid->order);

  // Exact periodic-point sum over all cyclically admissible words of length n.
  Complex zn = 0;
  std::vector<int> w(static_cast<size_t>(n));
  std::function<void(int)> rec = [&](int t) {
    if (t == n) {
      if (!map.edge(w[static_cast<size_t>(n - 1)], w[0])) return;
      Complex weight = 0;
      // orbit points from rotations; each is its own contraction fixed point
      std::vector<int> rot(w.begin(), w.end());
      double x0 = 0;
      for (int j = 0; j < n; ++j) {
        double xj = map.periodic_point(std::span<const int>(rot.data(), rot.size()));
        if (j == 0) x0 = xj;
        weight += Complex(psi.eval(rot[0], xj), 0.0) - s * c * roof.eval(rot[0], xj);
        std::rotate(rot.begin(), rot.begin() + 1, rot.end());
      }
      zn += kk.eval(w[0], x0) * std::exp(weight);
      return;
    }
    for (int v = 0; v < N; ++v) {
      if (t > 0 && !map.edge(w[static_cast<size_t>(t - 1)], v)) continue;
      w[static_cast<size_t>(t)] = v;
      rec(t + 1);
    }
  };
  rec(0);

  // Operator proxy at one anchor point per interval.
  Complex proxy = 0;
  for (int i = 0; i < N; ++i) {
    double xi_pt;
    if (rule == PointRule::fixed_point && map.edge(i, i)) {
      const int word[1] = {i};
      xi_pt = map.periodic_point(std::span<const int>(word, 1));
    } else {
      xi_pt = map.interval(i).mid();
    }
    GridFunction chi_k(grid);
    chi_k.values(i) = kk.values(i);
    Eigen::VectorXcd v = chi_k.stacked();
    for (int it = 0; it < n; ++it) v = op.matrix() * v;
    GridFunction res(grid);
    res.set_stacked(v);
    proxy += res.eval(map.locate(xi_pt), xi_pt);
  }
  return std::abs(zn - proxy);
}

}  // namespace zf
