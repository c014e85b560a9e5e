#ifndef GGT_CARRIER_HPP
#define GGT_CARRIER_HPP

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ggt/base.hpp"

namespace ggt {

// A finite universe of labeled elements.  Algorithms work on indices 0..n-1;
// labels only matter at the I/O boundary.
class Carrier {
 public:
  Carrier() = default;
  explicit Carrier(std::vector<std::string> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(int i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<int> find(const std::string& label) const;
  Mask all() const { return mask_all(size()); }

  bool operator==(const Carrier& o) const { return labels_ == o.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

// An arity-k operation table over a carrier of size n.  The table covers all
// n^k argument tuples in row-major order (first argument most significant);
// kUndef entries are the holes of a partial operation.
class PartialOp {
 public:
  PartialOp() = default;
  PartialOp(std::string name, int arity, int carrier_size,
            std::vector<Elem> table);

  static PartialOp identity(int carrier_size, std::string name = "id");

  const std::string& name() const { return name_; }
  int arity() const { return arity_; }
  int carrier_size() const { return n_; }
  const std::vector<Elem>& table() const { return table_; }

  Elem apply(std::span<const Elem> args) const;
  Elem apply1(Elem a) const { return table_[static_cast<std::size_t>(a)]; }
  bool is_total() const;
  bool is_identity() const;
  std::size_t defined_count() const;

  // Extensional: names are metadata only.
  bool same_table(const PartialOp& o) const {
    return arity_ == o.arity_ && n_ == o.n_ && table_ == o.table_;
  }
  // Canonical order used whenever op sets are sorted: arity, then table.
  bool table_less(const PartialOp& o) const {
    if (arity_ != o.arity_) return arity_ < o.arity_;
    return table_ < o.table_;
  }

 private:
  std::string name_;
  int arity_ = 1;
  int n_ = 0;
  std::vector<Elem> table_;
};

std::size_t table_size_checked(int carrier_size, int arity,
                               const Budget& budget);

// Composite f(g1(v1),...,gn(vn)) with argument blocks laid out in order;
// defined iff every gi(vi) is defined and f of the results is defined.
PartialOp compose(const PartialOp& f, std::span<const PartialOp> gs,
                  const Budget& budget = Budget::from_env());

// True iff dom(g) is contained in dom(f) and the two agree there.
bool is_restriction(const PartialOp& g, const PartialOp& f);

enum class Tier { Unary, Generalized, PartialGeneralized };
enum class Rep { Explicit, Generated };

const char* to_string(Tier t);

struct ClosureViolation {
  int f;                   // outer op index
  std::vector<int> gs;     // inner op indices
  PartialOp composite;     // the offending composite
};

struct ClosureReport {
  bool closed = true;
  std::vector<ClosureViolation> violations;
};

// One of the three tiers of operation systems, either a finite closed set of
// operations or a generator list with the closure left implicit.
class OpSystem {
 public:
  OpSystem() = default;
  OpSystem(Carrier carrier, Tier tier, Rep rep, std::vector<PartialOp> ops);

  const Carrier& carrier() const { return carrier_; }
  Tier tier() const { return tier_; }
  Rep rep() const { return rep_; }
  const std::vector<PartialOp>& ops() const { return ops_; }
  int op_count() const { return static_cast<int>(ops_.size()); }
  const PartialOp& op(int i) const { return ops_[static_cast<std::size_t>(i)]; }
  bool arity_capped() const { return arity_capped_; }
  int max_arity() const;

  std::optional<int> find_op(const std::string& name) const;
  // Index of a member with this exact table, if any.
  std::optional<int> find_table(const PartialOp& op) const;
  // Membership test per tier: exact table for total tiers, restriction of a
  // member for the partial tier.
  bool admits(const PartialOp& op) const;

  TriBool has_identity(const Budget& budget = Budget::from_env()) const;

  void set_arity_capped(bool v) { arity_capped_ = v; }

 private:
  Carrier carrier_;
  Tier tier_ = Tier::Unary;
  Rep rep_ = Rep::Explicit;
  std::vector<PartialOp> ops_;
  bool arity_capped_ = false;
};

using SystemPtr = std::shared_ptr<const OpSystem>;

// Unary tier: the exact composition closure.  Other tiers: every iterated
// composite of arity <= arity_cap, deduplicated extensionally; the result is
// an arity-capped slice of the full closure (arities add under composition).
OpSystem generate_closure(const Carrier& carrier,
                          const std::vector<PartialOp>& generators, Tier tier,
                          int arity_cap = 0,
                          const Budget& budget = Budget::from_env());
OpSystem generate_closure(const std::vector<PartialOp>& generators, Tier tier,
                          int arity_cap = 0,
                          const Budget& budget = Budget::from_env());

// Materialize the closure of a generated unary system as an explicit one.
OpSystem materialize_unary(const OpSystem& sys,
                           const Budget& budget = Budget::from_env());

// Lists every violating composite of an explicit system, or certifies
// closure.  Partial tier tests membership as "restriction of some member".
ClosureReport validate_system(const OpSystem& sys,
                              const Budget& budget = Budget::from_env());

}  // namespace ggt

#endif  // GGT_CARRIER_HPP
