#include "zetaflow/symbolic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>
#include <thread>

namespace zf {

namespace {

void check_binary_square(const std::vector<std::vector<int>>& m) {
  if (m.empty()) throw SchemaError("transition matrix is empty");
  const size_t n = m.size();
  for (const auto& row : m) {
    if (row.size() != n) throw SchemaError("transition matrix is not square");
    for (int v : row)
      if (v != 0 && v != 1) throw SchemaError("transition entries must be 0 or 1");
  }
}

}  // namespace

MixingReport verify_mixing(const std::vector<std::vector<int>>& transition) {
  check_binary_square(transition);
  const int n = static_cast<int>(transition.size());
  MixingReport rep;

  for (int i = 0; i < n; ++i) {
    bool row = false, col = false;
    for (int j = 0; j < n; ++j) {
      row = row || transition[i][j] != 0;
      col = col || transition[j][i] != 0;
    }
    if (!row || !col) {
      rep.irreducible = false;
      rep.diagnostic = (row ? "column " : "row ") + std::to_string(i) + " is all zeros";
      return rep;
    }
  }

  // Strong connectivity: vertex 0 reaches everything and everything reaches it.
  auto reachable = [&](bool transpose) {
    std::vector<uint8_t> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v) {
        int e = transpose ? transition[v][u] : transition[u][v];
        if (e && !seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
      }
    }
    return seen;
  };
  auto fwd = reachable(false);
  auto bwd = reachable(true);
  for (int i = 0; i < n; ++i) {
    if (!fwd[i] || !bwd[i]) {
      rep.irreducible = false;
      rep.diagnostic = "no path " + std::string(fwd[i] ? "from" : "to") + " vertex " +
                       std::to_string(i) + (fwd[i] ? " back to 0" : " from 0");
      return rep;
    }
  }
  rep.irreducible = true;

  // Period = gcd over all edges u->v of dist(u) + 1 - dist(v), dist from BFS.
  std::vector<int> dist(n, -1);
  dist[0] = 0;
  std::queue<int> q;
  q.push(0);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v)
      if (transition[u][v] && dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  int g = 0;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (transition[u][v]) g = std::gcd(g, std::abs(dist[u] + 1 - dist[v]));
  rep.period = g == 0 ? 1 : g;
  if (rep.period != 1)
    rep.diagnostic = "transition graph has period " + std::to_string(rep.period);
  return rep;
}

Subshift::Subshift(int alphabet_size, const std::vector<std::vector<int>>& transition) {
  if (alphabet_size <= 0) throw SchemaError("alphabet size must be positive");
  if (static_cast<size_t>(alphabet_size) != transition.size())
    throw SchemaError("alphabet size does not match transition matrix");
  mixing_ = verify_mixing(transition);
  if (!mixing_.mixing())
    throw SchemaError("transition matrix is not mixing: " + mixing_.diagnostic);
  n_ = alphabet_size;
  a_.assign(static_cast<size_t>(n_) * n_, 0);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) a_[static_cast<size_t>(i) * n_ + j] = transition[i][j] ? 1 : 0;
}

Subshift Subshift::unchecked(int alphabet_size,
                             const std::vector<std::vector<int>>& transition) {
  if (alphabet_size <= 0) throw SchemaError("alphabet size must be positive");
  if (static_cast<size_t>(alphabet_size) != transition.size())
    throw SchemaError("alphabet size does not match transition matrix");
  check_binary_square(transition);
  Subshift s;
  s.n_ = alphabet_size;
  s.a_.assign(static_cast<size_t>(s.n_) * s.n_, 0);
  for (int i = 0; i < s.n_; ++i)
    for (int j = 0; j < s.n_; ++j)
      s.a_[static_cast<size_t>(i) * s.n_ + j] = transition[i][j] ? 1 : 0;
  s.mixing_ = verify_mixing(transition);
  return s;
}

void Subshift::require_mixing(const char* op) const {
  if (!mixing_.mixing())
    throw RefusalError(std::string(op) + " requires a mixing subshift: " +
                       (mixing_.diagnostic.empty() ? "not mixing" : mixing_.diagnostic));
}

std::vector<std::vector<int>> Subshift::transition_rows() const {
  std::vector<std::vector<int>> rows(n_, std::vector<int>(n_, 0));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) rows[i][j] = edge(i, j) ? 1 : 0;
  return rows;
}

bool Word::admissible(const Subshift& s) const {
  for (int v : symbols)
    if (v < 0 || v >= s.alphabet_size()) return false;
  for (size_t i = 0; i + 1 < symbols.size(); ++i)
    if (!s.edge(symbols[i], symbols[i + 1])) return false;
  return !symbols.empty();
}

bool Word::cyclically_admissible(const Subshift& s) const {
  if (!admissible(s)) return false;
  return s.edge(symbols.back(), symbols.front());
}

bool Word::primitive() const {
  const int n = length();
  for (int q = 1; q < n; ++q) {
    if (n % q != 0) continue;
    bool rep = true;
    for (int i = q; i < n && rep; ++i) rep = symbols[i] == symbols[i - q];
    if (rep) return false;
  }
  return true;
}

Word Word::minimal_rotation() const {
  const int n = length();
  Word best = *this;
  Word rot = *this;
  for (int r = 1; r < n; ++r) {
    std::rotate(rot.symbols.begin(), rot.symbols.begin() + 1, rot.symbols.end());
    if (rot < best) best = rot;
  }
  return best;
}

std::string word_key(const Word& w, int alphabet_size) {
  std::ostringstream os;
  bool commas = alphabet_size > 10;
  for (size_t i = 0; i < w.symbols.size(); ++i) {
    if (commas && i) os << ',';
    os << w.symbols[i];
  }
  return os.str();
}

Word parse_word_key(const std::string& key, int alphabet_size) {
  Word w;
  if (alphabet_size > 10) {
    std::istringstream is(key);
    std::string part;
    while (std::getline(is, part, ',')) {
      if (part.empty()) throw SchemaError("bad word key '" + key + "'");
      w.symbols.push_back(std::stoi(part));
    }
  } else {
    for (char c : key) {
      if (c < '0' || c > '9') throw SchemaError("bad word key '" + key + "'");
      w.symbols.push_back(c - '0');
    }
  }
  for (int v : w.symbols)
    if (v < 0 || v >= alphabet_size)
      throw SchemaError("word key '" + key + "' has symbol outside alphabet");
  if (w.symbols.empty()) throw SchemaError("empty word key");
  return w;
}

CylinderFunction::CylinderFunction(Subshift shift, int depth)
    : shift_(std::move(shift)), depth_(depth) {
  if (depth_ < 1) throw SchemaError("cylinder function depth must be >= 1");
  const int n = shift_.alphabet_size();
  double count = std::pow(static_cast<double>(n), depth_);
  if (count > 5e7)
    throw BudgetError("cylinder table of size " + std::to_string(count) + " is too large");
  values_.assign(static_cast<size_t>(count), 0.0);
  defined_.assign(static_cast<size_t>(count), 0);
}

CylinderFunction::CylinderFunction(const Subshift& shift, int depth,
                                   const std::function<double(const Word&)>& values)
    : CylinderFunction(shift, depth) {
  for (const Word& w : admissible_words(shift_, depth_)) {
    size_t idx = index_of(w.symbols);
    values_[idx] = values(w);
    defined_[idx] = 1;
  }
}

CylinderFunction CylinderFunction::constant(const Subshift& shift, int depth, double value) {
  return CylinderFunction(shift, depth, [value](const Word&) { return value; });
}

CylinderFunction CylinderFunction::from_table(const Subshift& shift, int depth,
                                              const std::map<std::string, double>& table) {
  CylinderFunction f(shift, depth);
  size_t assigned = 0;
  for (const auto& [key, v] : table) {
    Word w = parse_word_key(key, shift.alphabet_size());
    if (w.length() != depth)
      throw SchemaError("word key '" + key + "' does not have depth " + std::to_string(depth));
    if (!w.admissible(shift))
      throw SchemaError("word key '" + key + "' is not admissible");
    size_t idx = f.index_of(w.symbols);
    f.values_[idx] = v;
    f.defined_[idx] = 1;
    ++assigned;
  }
  // every admissible word must be covered
  auto all = admissible_words(shift, depth);
  if (assigned != all.size()) {
    for (const Word& w : all)
      if (!f.defined_[f.index_of(w.symbols)])
        throw SchemaError("value table misses admissible word '" +
                          word_key(w, shift.alphabet_size()) + "'");
  }
  return f;
}

size_t CylinderFunction::index_of(std::span<const int> word) const {
  size_t idx = 0;
  for (int v : word) idx = idx * shift_.alphabet_size() + static_cast<size_t>(v);
  return idx;
}

double CylinderFunction::value(std::span<const int> word) const {
  if (static_cast<int>(word.size()) != depth_)
    throw SchemaError("cylinder evaluation needs exactly depth-" + std::to_string(depth_) +
                      " words");
  size_t idx = index_of(word);
  if (!defined_[idx]) {
    Word w;
    w.symbols.assign(word.begin(), word.end());
    throw SchemaError("cylinder function evaluated at inadmissible word '" +
                      word_key(w, shift_.alphabet_size()) + "'");
  }
  return values_[idx];
}

double CylinderFunction::cyclic_value(const Word& cyclic_word, int i) const {
  const int n = cyclic_word.length();
  size_t idx = 0;
  for (int j = 0; j < depth_; ++j)
    idx = idx * shift_.alphabet_size() +
          static_cast<size_t>(cyclic_word.symbols[(i + j) % n]);
  if (!defined_[idx]) throw SchemaError("cyclic window hits an inadmissible word");
  return values_[idx];
}

void CylinderFunction::mark_strictly_positive() {
  double lo = min_value();
  if (!(lo > 0.0))
    throw SchemaError("roof is not strictly positive (min value " + std::to_string(lo) + ")");
  r_min_ = lo;
}

double CylinderFunction::r_min() const {
  if (!r_min_) throw SchemaError("function was not marked strictly positive");
  return *r_min_;
}

double CylinderFunction::min_value() const {
  double lo = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < values_.size(); ++i)
    if (defined_[i]) lo = std::min(lo, values_[i]);
  return lo;
}

double CylinderFunction::max_value() const {
  double hi = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < values_.size(); ++i)
    if (defined_[i]) hi = std::max(hi, values_[i]);
  return hi;
}

double CylinderFunction::max_abs() const {
  return std::max(std::abs(min_value()), std::abs(max_value()));
}

CylinderFunction CylinderFunction::extended(int new_depth) const {
  if (new_depth < depth_) throw SchemaError("extension must not decrease depth");
  if (new_depth == depth_) return *this;
  return CylinderFunction(shift_, new_depth, [this](const Word& w) {
    return value(std::span<const int>(w.symbols.data(), static_cast<size_t>(depth_)));
  });
}

CylinderFunction CylinderFunction::combine(double a, double b,
                                           const CylinderFunction& other) const {
  if (!same_shift(other)) throw SchemaError("cylinder functions live on different shifts");
  int d = std::max(depth_, other.depth_);
  return CylinderFunction(shift_, d, [&](const Word& w) {
    std::span<const int> s(w.symbols.data(), w.symbols.size());
    return a * value(s.first(static_cast<size_t>(depth_))) +
           b * other.value(s.first(static_cast<size_t>(other.depth_)));
  });
}

CylinderFunction CylinderFunction::scaled(double a) const {
  return CylinderFunction(shift_, depth_, [&](const Word& w) {
    return a * value(std::span<const int>(w.symbols.data(), w.symbols.size()));
  });
}

std::map<std::string, double> CylinderFunction::to_table() const {
  std::map<std::string, double> t;
  for (const Word& w : admissible_words(shift_, depth_))
    t[word_key(w, shift_.alphabet_size())] = value(w.symbols);
  return t;
}

std::vector<Word> admissible_words(const Subshift& shift, int n) {
  if (n < 1) throw SchemaError("word length must be >= 1");
  const int N = shift.alphabet_size();
  std::vector<Word> out;
  std::vector<int> cur;
  cur.reserve(n);
  // lexicographic DFS
  std::function<void()> rec = [&]() {
    if (static_cast<int>(cur.size()) == n) {
      out.push_back(Word{cur});
      return;
    }
    for (int v = 0; v < N; ++v) {
      if (!cur.empty() && !shift.edge(cur.back(), v)) continue;
      cur.push_back(v);
      rec();
      cur.pop_back();
    }
  };
  rec();
  return out;
}

BigInt count_periodic_points(const Subshift& shift, int n) {
  if (n < 1) throw SchemaError("period must be >= 1");
  const int N = shift.alphabet_size();
  using Mat = std::vector<BigInt>;
  auto mul = [N](const Mat& x, const Mat& y) {
    Mat z(static_cast<size_t>(N) * N, BigInt(0));
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < N; ++k) {
        const BigInt& xik = x[static_cast<size_t>(i) * N + k];
        if (xik == 0) continue;
        for (int j = 0; j < N; ++j)
          z[static_cast<size_t>(i) * N + j] += xik * y[static_cast<size_t>(k) * N + j];
      }
    return z;
  };
  Mat a(static_cast<size_t>(N) * N, BigInt(0));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a[static_cast<size_t>(i) * N + j] = shift.edge(i, j) ? 1 : 0;
  // binary power
  Mat acc;
  bool have = false;
  Mat base = a;
  int e = n;
  while (e > 0) {
    if (e & 1) {
      acc = have ? mul(acc, base) : base;
      have = true;
    }
    e >>= 1;
    if (e) base = mul(base, base);
  }
  BigInt tr = 0;
  for (int i = 0; i < N; ++i) tr += acc[static_cast<size_t>(i) * N + i];
  return tr;
}

double birkhoff_sum(const Word& cyclic_word, const CylinderFunction& phi) {
  if (!cyclic_word.cyclically_admissible(phi.shift()))
    throw SchemaError("birkhoff_sum needs a cyclically admissible word");
  double s = 0.0;
  for (int i = 0; i < cyclic_word.length(); ++i) s += phi.cyclic_value(cyclic_word, i);
  return s;
}

namespace {

// Pre-necklace DFS (FKM scheme restricted to admissible paths).  Emits every
// admissible Lyndon word of length <= p_max exactly once: a DFS node of depth
// t with Lyndon prefix-period p is a Lyndon word iff p == t.
struct OrbitCollector {
  const Subshift& shift;
  const CylinderFunction& psi;
  const CylinderFunction& roof;
  const CylinderFunction* k;
  int p_max;
  std::vector<PrimeOrbit>* out;

  std::vector<int> w;

  void emit() {
    Word word{w};
    if (!shift.edge(w.back(), w.front())) return;
    PrimeOrbit o;
    o.word = word;
    o.period = word.length();
    o.psi = birkhoff_sum(word, psi);
    o.ell = birkhoff_sum(word, roof);
    o.k = k ? birkhoff_sum(word, *k) : 0.0;
    out->push_back(std::move(o));
  }

  // t = current length, p = current prefix period
  void rec(int t, int p) {
    if (t == p) emit();
    if (t == p_max) return;
    const int base = w[t - p];  // smallest symbol keeping the pre-necklace property
    for (int v = base; v < shift.alphabet_size(); ++v) {
      if (!shift.edge(w[t - 1], v)) continue;
      w.push_back(v);
      rec(t + 1, v == base ? p : t + 1);
      w.pop_back();
    }
  }
};

}  // namespace

std::vector<PrimeOrbit> enumerate_prime_orbits(const Subshift& shift,
                                               const CylinderFunction& psi,
                                               const CylinderFunction& roof,
                                               const CylinderFunction* k,
                                               int p_max,
                                               const EnumerationOptions& opt) {
  if (p_max < 1) throw SchemaError("p_max must be >= 1");
  if (!roof.strictly_positive())
    throw SchemaError("roof must be marked strictly positive before enumeration");

  // Orbit count estimate: sum over n <= p_max of trace(A^n)/n, via double
  // matrix powers (orbit count of period n is at most trace(A^n)/n).
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
      est += tr / n;
      if (est > opt.max_orbits)
        throw BudgetError(
            "prime orbit enumeration would exceed the configured budget (estimate " +
            std::to_string(est) + " orbits by period " + std::to_string(n) + ")");
    }
  }

  const int N = shift.alphabet_size();
  std::vector<std::vector<PrimeOrbit>> parts(static_cast<size_t>(N));
  auto run_part = [&](int first) {
    OrbitCollector col{shift, psi, roof, k, p_max, &parts[static_cast<size_t>(first)], {}};
    col.w.reserve(static_cast<size_t>(p_max));
    col.w.push_back(first);
    col.rec(1, 1);
  };

  int workers = std::max(1, opt.workers);
  if (workers == 1 || N == 1) {
    for (int a = 0; a < N; ++a) run_part(a);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < std::min(workers, N); ++t)
      pool.emplace_back([&]() {
        for (int a = next.fetch_add(1); a < N; a = next.fetch_add(1)) run_part(a);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<PrimeOrbit> all;
  size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (auto& p : parts)
    for (auto& o : p) all.push_back(std::move(o));
  std::sort(all.begin(), all.end(), [](const PrimeOrbit& a, const PrimeOrbit& b) {
    if (a.period != b.period) return a.period < b.period;
    return a.word < b.word;
  });
  return all;
}

RecodedSystem recode_depth_one(const Subshift& shift,
                               const std::vector<const CylinderFunction*>& fns) {
  int d = 1;
  for (const auto* f : fns) {
    if (!f) throw SchemaError("null cylinder function");
    if (!(f->shift() == shift)) throw SchemaError("function does not live on the given shift");
    d = std::max(d, f->depth());
  }

  RecodedSystem out{shift, {}, {}};
  if (d == 1) {
    for (const auto* f : fns) out.fns.push_back(*f);
    const int N = shift.alphabet_size();
    out.blocks.reserve(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) out.blocks.push_back(Word{{i}});
    return out;
  }

  // New alphabet: admissible (d-1)-blocks in lexicographic order.
  std::vector<Word> blocks = admissible_words(shift, d - 1);
  const int M = static_cast<int>(blocks.size());
  std::map<Word, int> block_index;
  for (int i = 0; i < M; ++i) block_index[blocks[i]] = i;

  std::vector<std::vector<int>> trans(static_cast<size_t>(M), std::vector<int>(M, 0));
  for (int i = 0; i < M; ++i) {
    const auto& u = blocks[i].symbols;
    for (int j = 0; j < M; ++j) {
      const auto& v = blocks[j].symbols;
      bool overlap = true;
      for (int t = 0; t + 1 < d - 1 && overlap; ++t) overlap = u[t + 1] == v[t];
      if (overlap && shift.edge(u[d - 2], v[d - 2])) trans[i][j] = 1;
    }
  }
  Subshift rec = shift.mixing_report().mixing() ? Subshift(M, trans)
                                                : Subshift::unchecked(M, trans);
  out.shift = rec;
  out.blocks = blocks;

  // The edge (u -> v) determines d consecutive symbols u0..u_{d-2} v_{d-2}.
  for (const auto* f : fns) {
    const int fd = f->depth();
    out.fns.push_back(CylinderFunction(rec, 2, [&](const Word& e) {
      const auto& u = blocks[static_cast<size_t>(e.symbols[0])].symbols;
      const auto& v = blocks[static_cast<size_t>(e.symbols[1])].symbols;
      std::vector<int> window(u);
      window.push_back(v[static_cast<size_t>(d - 2)]);
      return f->value(std::span<const int>(window.data(), static_cast<size_t>(fd)));
    }));
    if (f->strictly_positive()) out.fns.back().mark_strictly_positive();
  }
  return out;
}

}  // namespace zf
