#ifndef GGT_TSPACE_HPP
#define GGT_TSPACE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ggt/carrier.hpp"

namespace ggt {

// A subset of the carrier closed under every system operation where defined.
struct TSpace {
  SystemPtr system;
  Mask elements = 0;
  std::optional<Mask> generators_used;

  std::vector<int> elem_list() const { return mask_elems(elements); }
  int size() const { return mask_count(elements); }
};

// How a generated element was produced: op/generator index plus the argument
// elements, each either a seed or generated earlier.
struct Derivation {
  int op;
  std::vector<Elem> args;
};

struct SpaceTrace {
  TSpace space;
  std::map<Elem, Derivation> derivations;
};

// Explicit systems: one pass of every member over U-tuples.  Generated
// systems: least fixpoint of generator application starting from U.
TSpace generate_space(SystemPtr sys, Mask U,
                      const Budget& budget = Budget::from_env());
SpaceTrace generate_space_traced(SystemPtr sys, Mask U,
                                 const Budget& budget = Budget::from_env());

// True iff <S> is contained in S.
bool is_quasi_space(const OpSystem& sys, Mask S,
                    const Budget& budget = Budget::from_env());

// Fast path: quasi and S within <S>.  Fallback: exhaustive search over all
// generator sets U for small carriers; Indeterminate above the cap.
TriBool is_t_space(SystemPtr sys, Mask S,
                   const Budget& budget = Budget::from_env());

// Least quasi-T-subspace of S containing X (least fixpoint of operation
// application starting from X).
Mask generated_quasi_subspace(const TSpace& S, Mask X,
                              const Budget& budget = Budget::from_env());

struct FamilyCheck {
  std::string name;
  TriBool status = TriBool::Indeterminate;
  bool applicable = true;
  std::string detail;
};

struct FamilyReport {
  std::vector<FamilyCheck> checks;
  bool all_good() const {
    for (const auto& c : checks)
      if (c.applicable && c.status == TriBool::False) return false;
    return true;
  }
};

// Verifies the closure properties of a family of quasi spaces: meets are
// quasi on all tiers, unions only on the unary tier, and meets promote to
// T-spaces when the identity is present.
FamilyReport family_closure_report(SystemPtr sys,
                                   const std::vector<Mask>& spaces,
                                   const Budget& budget = Budget::from_env());

}  // namespace ggt

#endif  // GGT_TSPACE_HPP
