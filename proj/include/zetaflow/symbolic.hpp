#ifndef ZETAFLOW_SYMBOLIC_HPP
#define ZETAFLOW_SYMBOLIC_HPP

// Subshifts of finite type, admissible words, prime orbits, and Birkhoff
// sums of locally constant (depth-d cylinder) functions.  Everything here
// is exact combinatorics; periodic-point counts use arbitrary precision.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "zetaflow/errors.hpp"

namespace zf {

using BigInt = boost::multiprecision::cpp_int;

struct MixingReport {
  bool irreducible = false;
  int period = 0;  // gcd of cycle lengths through vertex 0; 0 when reducible
  std::string diagnostic;
  bool mixing() const { return irreducible && period == 1; }
};

// Strong connectivity + period of the directed graph of a 0/1 matrix.
MixingReport verify_mixing(const std::vector<std::vector<int>>& transition);

class Subshift {
 public:
  // Checked constructor: requires an irreducible aperiodic transition matrix.
  Subshift(int alphabet_size, const std::vector<std::vector<int>>& transition);

  // Carries the mixing report instead of enforcing it.  Operations that rely
  // on mixing (pressure, RPF data, ...) call require_mixing and refuse.
  static Subshift unchecked(int alphabet_size,
                            const std::vector<std::vector<int>>& transition);

  int alphabet_size() const { return n_; }
  bool edge(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j] != 0; }
  const MixingReport& mixing_report() const { return mixing_; }
  void require_mixing(const char* op) const;

  std::vector<std::vector<int>> transition_rows() const;
  bool operator==(const Subshift& o) const { return n_ == o.n_ && a_ == o.a_; }

 private:
  Subshift() = default;
  int n_ = 0;
  std::vector<uint8_t> a_;  // row-major 0/1
  MixingReport mixing_;
};

struct Word {
  std::vector<int> symbols;

  int length() const { return static_cast<int>(symbols.size()); }
  bool admissible(const Subshift& s) const;
  bool cyclically_admissible(const Subshift& s) const;
  // Word in (0,...,N-1)^p repeated from a q-prefix for some divisor q < p?
  bool primitive() const;
  Word minimal_rotation() const;

  auto operator<=>(const Word&) const = default;
};

std::string word_key(const Word& w, int alphabet_size);
Word parse_word_key(const std::string& key, int alphabet_size);

// Locally constant function of depth d: one value per admissible word of
// length d, nothing else.  Owns a copy of its subshift so evaluation can
// police admissibility.
class CylinderFunction {
 public:
  CylinderFunction(const Subshift& shift, int depth,
                   const std::function<double(const Word&)>& values);

  static CylinderFunction constant(const Subshift& shift, int depth, double value);
  static CylinderFunction from_table(const Subshift& shift, int depth,
                                     const std::map<std::string, double>& table);

  int depth() const { return depth_; }
  const Subshift& shift() const { return shift_; }

  // word must hold exactly depth() symbols forming an admissible word.
  double value(std::span<const int> word) const;
  // Reads depth() symbols starting at position i of a cyclic word.
  double cyclic_value(const Word& cyclic_word, int i) const;

  // Marks the function as a roof: all values must be >= some r_min > 0.
  void mark_strictly_positive();
  bool strictly_positive() const { return r_min_.has_value(); }
  double r_min() const;

  double min_value() const;
  double max_value() const;
  double max_abs() const;

  // Prefix broadcast: the depth-d2 extension takes the value of the first
  // depth() symbols.  d2 >= depth().
  CylinderFunction extended(int new_depth) const;

  // a*this + b*other, defined at the max of the two depths.
  CylinderFunction combine(double a, double b, const CylinderFunction& other) const;
  CylinderFunction scaled(double a) const;

  std::map<std::string, double> to_table() const;

  bool same_shift(const CylinderFunction& o) const { return shift_ == o.shift_; }

 private:
  CylinderFunction(Subshift shift, int depth);
  size_t index_of(std::span<const int> word) const;

  Subshift shift_;
  int depth_;
  std::vector<double> values_;    // size N^depth, indexed base-N
  std::vector<uint8_t> defined_;  // admissibility mask
  std::optional<double> r_min_;
};

// All linearly admissible words of length n, lexicographic, no duplicates.
std::vector<Word> admissible_words(const Subshift& shift, int n);

// trace(A^n) in exact integer arithmetic.
BigInt count_periodic_points(const Subshift& shift, int n);

// Birkhoff sum of phi over one traversal of a cyclically admissible word,
// indices read cyclically.  Invariant under rotation of the word.
double birkhoff_sum(const Word& cyclic_word, const CylinderFunction& phi);

struct PrimeOrbit {
  Word word;   // lexicographically minimal rotation, primitive
  int period = 0;
  double ell = 0;   // roof Birkhoff sum over one traversal
  double psi = 0;   // potential Birkhoff sum
  double k = 0;     // observable Birkhoff sum (0 when no observable given)
};

struct EnumerationOptions {
  double max_orbits = 2e8;  // abort (BudgetError) when the estimate exceeds this
  int workers = 1;          // first-symbol partitions evaluate concurrently
};

// One PrimeOrbit per primitive cyclic class of period <= p_max, sorted by
// (period, word).  Output is identical for any worker count.
std::vector<PrimeOrbit> enumerate_prime_orbits(const Subshift& shift,
                                               const CylinderFunction& psi,
                                               const CylinderFunction& roof,
                                               const CylinderFunction* k,
                                               int p_max,
                                               const EnumerationOptions& opt = {});

struct RecodedSystem {
  Subshift shift;                       // alphabet = admissible (d-1)-blocks
  std::vector<Word> blocks;             // block symbol -> original word
  std::vector<CylinderFunction> fns;    // inputs re-expressed at depth <= 2
};

// Higher-block presentation: functions of depth <= d become depth-2 edge data
// on the block shift; Birkhoff sums over corresponding orbits are preserved.
// With max depth 1 the system is returned unchanged.
RecodedSystem recode_depth_one(const Subshift& shift,
                               const std::vector<const CylinderFunction*>& fns);

}  // namespace zf

#endif
