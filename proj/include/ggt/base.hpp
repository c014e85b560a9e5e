#ifndef GGT_BASE_HPP
#define GGT_BASE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ggt {

// Carrier elements are small indices; kUndef marks a hole in a partial table.
using Elem = int;
inline constexpr Elem kUndef = -1;

// Subsets of a carrier (size <= 64) as bitmasks.
using Mask = std::uint64_t;

inline bool mask_has(Mask m, int i) { return (m >> i) & 1u; }
inline Mask mask_bit(int i) { return Mask{1} << i; }
inline int mask_count(Mask m) { return __builtin_popcountll(m); }
inline Mask mask_all(int n) { return n >= 64 ? ~Mask{0} : (Mask{1} << n) - 1; }
inline bool mask_subset(Mask a, Mask b) { return (a & ~b) == 0; }

std::vector<int> mask_elems(Mask m);
Mask mask_of(const std::vector<int>& elems);

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// A certified postcondition failed; on correct inputs this would falsify a
// theorem, so it is never caught and repaired.
class TheoremViolation : public std::runtime_error {
 public:
  explicit TheoremViolation(const std::string& what)
      : std::runtime_error(what) {}
};

// Thrown when an enumeration would exceed its configured cap.  Carries the
// smallest bound that was exceeded so callers can report it.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::uint64_t bound)
      : std::runtime_error(what), bound_(bound) {}
  std::uint64_t bound() const { return bound_; }

 private:
  std::uint64_t bound_;
};

enum class TriBool { False, True, Indeterminate };

inline const char* to_string(TriBool t) {
  switch (t) {
    case TriBool::False: return "false";
    case TriBool::True: return "true";
    default: return "indeterminate";
  }
}

// Enumeration caps.  A single --budget N (or GGT_BUDGET) overrides the
// size-like caps uniformly; exceeding any cap raises BudgetError.
struct Budget {
  int endo_space = 8;          // |S| for full map scans (End enumeration)
  int auto_space = 10;         // |S| for permutation scans (Aut enumeration)
  int tspace_exhaustive = 12;  // |carrier| for the 2^n generator search
  int topology_base = 4;       // base-set size for topology enumeration
  int topology_base_max = 5;   // hard limit even with override
  int powerset_points = 4;     // |X| for power-set carriers
  int brute_space = 10;        // |S| for brute-force family oracles
  int brute_end = 16;          // |End| for brute-force family oracles
  std::uint64_t closure_ops = 200000;   // members of a materialized closure
  std::uint64_t table_entries = 4000000;  // entries of any one op table
  std::uint64_t family_sets = 200000;   // sets in a generated family/topology

  static Budget from_env();
  void override_all(int n);
};

// Odometer over k-tuples drawn from `pool`, lexicographic by pool position.
class TupleIter {
 public:
  TupleIter(const std::vector<int>& pool, int k)
      : pool_(pool), idx_(static_cast<std::size_t>(k), 0),
        done_(pool.empty() && k > 0) {}

  bool done() const { return done_; }
  void next() {
    for (int i = static_cast<int>(idx_.size()) - 1; i >= 0; --i) {
      if (++idx_[i] < pool_.size()) return;
      idx_[i] = 0;
    }
    done_ = true;
  }
  std::vector<Elem> tuple() const {
    std::vector<Elem> t(idx_.size());
    for (std::size_t i = 0; i < idx_.size(); ++i) t[i] = pool_[idx_[i]];
    return t;
  }

 private:
  std::vector<int> pool_;
  std::vector<std::size_t> idx_;
  bool done_;
};

}  // namespace ggt

#endif  // GGT_BASE_HPP
