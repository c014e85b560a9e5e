#include "ggt/tspace.hpp"

#include <algorithm>

namespace ggt {

namespace {

void check_subset_of_carrier(const OpSystem& sys, Mask U) {
  if (!mask_subset(U, sys.carrier().all()))
    throw UsageError("subset not contained in the carrier");
}

Mask space_elements(const OpSystem& sys, Mask U,
                    std::map<Elem, Derivation>* trace) {
  if (sys.rep() == Rep::Explicit) {
    // S = { f(u-tuple) defined : f in T }, a single pass since T is closed.
    Mask S = 0;
    std::vector<int> pool = mask_elems(U);
    for (int oi = 0; oi < sys.op_count(); ++oi) {
      const PartialOp& f = sys.op(oi);
      for (TupleIter it(pool, f.arity()); !it.done(); it.next()) {
        std::vector<Elem> args = it.tuple();
        Elem v = f.apply(args);
        if (v == kUndef || mask_has(S, v)) continue;
        S |= mask_bit(v);
        if (trace) trace->emplace(v, Derivation{oi, std::move(args)});
      }
    }
    return S;
  }
  // Generated: least fixpoint of generator application.  Every composite
  // value over U factors through generator applications to already
  // generated values, so this is exactly the generated T-space.
  Mask W = 0;
  bool first = true;
  while (true) {
    Mask before = W;
    const std::vector<int> pool = mask_elems(first ? U : W);
    first = false;
    for (int oi = 0; oi < sys.op_count(); ++oi) {
      const PartialOp& g = sys.op(oi);
      for (TupleIter it(pool, g.arity()); !it.done(); it.next()) {
        std::vector<Elem> args = it.tuple();
        Elem v = g.apply(args);
        if (v == kUndef || mask_has(W, v)) continue;
        W |= mask_bit(v);
        if (trace) trace->emplace(v, Derivation{oi, std::move(args)});
      }
    }
    if (W == before) break;
  }
  return W;
}

}  // namespace

SpaceTrace generate_space_traced(SystemPtr sys, Mask U, const Budget&) {
  check_subset_of_carrier(*sys, U);
  SpaceTrace out;
  out.space.system = sys;
  out.space.generators_used = U;
  out.space.elements = space_elements(*sys, U, &out.derivations);
  return out;
}

TSpace generate_space(SystemPtr sys, Mask U, const Budget& budget) {
  return generate_space_traced(sys, U, budget).space;
}

bool is_quasi_space(const OpSystem& sys, Mask S, const Budget&) {
  check_subset_of_carrier(sys, S);
  return mask_subset(space_elements(sys, S, nullptr), S);
}

TriBool is_t_space(SystemPtr sys, Mask S, const Budget& budget) {
  check_subset_of_carrier(*sys, S);
  Mask gen = space_elements(*sys, S, nullptr);
  if (!mask_subset(gen, S)) return TriBool::False;  // not even quasi
  if (mask_subset(S, gen)) return TriBool::True;    // <S> = S
  const int n = sys->carrier().size();
  if (n > budget.tspace_exhaustive) return TriBool::Indeterminate;
  // Generator sets can be disjoint from the space, so all of 2^carrier.
  for (Mask U = 0; U < (Mask{1} << n); ++U)
    if (space_elements(*sys, U, nullptr) == S) return TriBool::True;
  return TriBool::False;
}

Mask generated_quasi_subspace(const TSpace& S, Mask X, const Budget&) {
  if (!mask_subset(X, S.elements))
    throw UsageError("generated_quasi_subspace: X not contained in S");
  const OpSystem& sys = *S.system;
  Mask W = X;
  while (true) {
    Mask before = W;
    std::vector<int> pool = mask_elems(W);
    for (int oi = 0; oi < sys.op_count(); ++oi) {
      const PartialOp& g = sys.op(oi);
      for (TupleIter it(pool, g.arity()); !it.done(); it.next()) {
        Elem v = g.apply(it.tuple());
        if (v != kUndef) W |= mask_bit(v);
      }
    }
    if (W == before) break;
  }
  return W;
}

namespace {

std::string set_to_string(const OpSystem& sys, Mask m) {
  std::string s = "{";
  bool sep = false;
  for (int e : mask_elems(m)) {
    if (sep) s += ",";
    s += sys.carrier().label(e);
    sep = true;
  }
  return s + "}";
}

}  // namespace

FamilyReport family_closure_report(SystemPtr sys,
                                   const std::vector<Mask>& spaces,
                                   const Budget& budget) {
  for (std::size_t i = 0; i < spaces.size(); ++i)
    if (!is_quasi_space(*sys, spaces[i], budget))
      throw UsageError("family_closure_report: member " + std::to_string(i) +
                       " is not a quasi space");
  FamilyReport report;
  const bool unary = sys->tier() == Tier::Unary;

  FamilyCheck meets{"meets_quasi", TriBool::True, true, ""};
  for (std::size_t i = 0; i < spaces.size() && meets.status == TriBool::True; ++i)
    for (std::size_t j = i; j < spaces.size(); ++j)
      if (!is_quasi_space(*sys, spaces[i] & spaces[j], budget)) {
        meets.status = TriBool::False;
        meets.detail = set_to_string(*sys, spaces[i] & spaces[j]);
        break;
      }
  report.checks.push_back(meets);

  FamilyCheck unions{"unions_quasi", TriBool::True, unary, ""};
  if (unary) {
    for (std::size_t i = 0; i < spaces.size() && unions.status == TriBool::True; ++i)
      for (std::size_t j = i; j < spaces.size(); ++j)
        if (!is_quasi_space(*sys, spaces[i] | spaces[j], budget)) {
          unions.status = TriBool::False;
          unions.detail = set_to_string(*sys, spaces[i] | spaces[j]);
          break;
        }
  } else {
    unions.detail = "only the unary tier";
  }
  report.checks.push_back(unions);

  FamilyCheck space_unions{"t_space_unions", TriBool::True, unary, ""};
  if (unary) {
    std::vector<std::size_t> ts;
    bool indet = false;
    for (std::size_t i = 0; i < spaces.size(); ++i) {
      TriBool t = is_t_space(sys, spaces[i], budget);
      if (t == TriBool::True) ts.push_back(i);
      if (t == TriBool::Indeterminate) indet = true;
    }
    for (std::size_t a = 0; a < ts.size() && space_unions.status == TriBool::True; ++a)
      for (std::size_t b = a; b < ts.size(); ++b) {
        TriBool t = is_t_space(sys, spaces[ts[a]] | spaces[ts[b]], budget);
        if (t == TriBool::False) {
          space_unions.status = TriBool::False;
          space_unions.detail = set_to_string(*sys, spaces[ts[a]] | spaces[ts[b]]);
        } else if (t == TriBool::Indeterminate) {
          indet = true;
        }
      }
    if (indet && space_unions.status == TriBool::True)
      space_unions.status = TriBool::Indeterminate;
  } else {
    space_unions.detail = "only the unary tier";
  }
  report.checks.push_back(space_unions);

  FamilyCheck promote{"meets_promote_with_id", TriBool::True, true, ""};
  TriBool has_id = sys->has_identity(budget);
  if (has_id == TriBool::True) {
    std::vector<std::size_t> ts;
    for (std::size_t i = 0; i < spaces.size(); ++i)
      if (is_t_space(sys, spaces[i], budget) == TriBool::True) ts.push_back(i);
    for (std::size_t a = 0; a < ts.size() && promote.status == TriBool::True; ++a)
      for (std::size_t b = a; b < ts.size(); ++b) {
        TriBool t = is_t_space(sys, spaces[ts[a]] & spaces[ts[b]], budget);
        if (t != TriBool::True) {
          promote.status = t;
          promote.detail = set_to_string(*sys, spaces[ts[a]] & spaces[ts[b]]);
        }
      }
  } else {
    promote.applicable = false;
    promote.detail = "identity not present";
  }
  report.checks.push_back(promote);
  return report;
}

}  // namespace ggt
