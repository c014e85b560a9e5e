#include "ggt/morphism.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_set>

#include "ggt/kernels.hpp"

namespace ggt {

namespace {

constexpr Elem kIll = -2;  // fiber disagreement sentinel, never a carrier index

bool same_system(const SystemPtr& a, const SystemPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (!(a->carrier() == b->carrier()) || a->tier() != b->tier() ||
      a->rep() != b->rep() || a->op_count() != b->op_count())
    return false;
  for (int i = 0; i < a->op_count(); ++i)
    if (!a->op(i).same_table(b->op(i))) return false;
  return true;
}

std::vector<std::string> tuple_labels(const Carrier& c,
                                      const std::vector<Elem>& t) {
  std::vector<std::string> out;
  out.reserve(t.size());
  for (Elem e : t) out.push_back(e == kUndef ? "?" : c.label(e));
  return out;
}

}  // namespace

Mask Morphism::image() const {
  Mask img = 0;
  for (Elem e : from.elem_list()) img |= mask_bit(map[static_cast<std::size_t>(e)]);
  return img;
}

bool Morphism::is_bijective() const {
  return image() == to.elements && mask_count(image()) == from.size();
}

std::uint64_t Morphism::code() const {
  std::vector<int> to_pos(static_cast<std::size_t>(to.system->carrier().size()), -1);
  std::vector<int> tl = to.elem_list();
  for (std::size_t i = 0; i < tl.size(); ++i)
    to_pos[static_cast<std::size_t>(tl[i])] = static_cast<int>(i);
  std::uint64_t c = 0;
  const int k = static_cast<int>(tl.size());
  for (Elem e : from.elem_list())
    c = c * static_cast<std::uint64_t>(k == 0 ? 1 : k) +
        static_cast<std::uint64_t>(to_pos[static_cast<std::size_t>(map[static_cast<std::size_t>(e)])]);
  return c;
}

Morphism make_morphism(TSpace from, TSpace to,
                       const std::vector<std::pair<Elem, Elem>>& pairs) {
  std::vector<Elem> map(static_cast<std::size_t>(from.system->carrier().size()),
                        kUndef);
  Mask dom = 0;
  for (auto [a, b] : pairs) {
    if (!mask_has(from.elements, a))
      throw UsageError("morphism: source element outside the source space");
    if (!mask_has(to.elements, b))
      throw UsageError("morphism: image element outside the target space");
    if (map[static_cast<std::size_t>(a)] != kUndef &&
        map[static_cast<std::size_t>(a)] != b)
      throw UsageError("morphism: conflicting images for one element");
    map[static_cast<std::size_t>(a)] = b;
    dom |= mask_bit(a);
  }
  if (dom != from.elements)
    throw UsageError("morphism: map not total on the source space");
  return Morphism{std::move(from), std::move(to), std::move(map)};
}

Morphism identity_morphism(const TSpace& s) {
  std::vector<Elem> map(static_cast<std::size_t>(s.system->carrier().size()),
                        kUndef);
  for (Elem e : s.elem_list()) map[static_cast<std::size_t>(e)] = e;
  return Morphism{s, s, std::move(map)};
}

Morphism compose(const Morphism& outer, const Morphism& inner) {
  if (!mask_subset(inner.image(), outer.from.elements))
    throw UsageError("compose: inner image escapes the outer source");
  std::vector<Elem> map(inner.map.size(), kUndef);
  for (Elem e : inner.from.elem_list())
    map[static_cast<std::size_t>(e)] =
        outer.map[static_cast<std::size_t>(inner.map[static_cast<std::size_t>(e)])];
  return Morphism{inner.from, outer.to, std::move(map)};
}

bool same_map(const Morphism& a, const Morphism& b) {
  return a.from.elements == b.from.elements && a.map == b.map;
}

Verdict is_t_morphism(const Morphism& m, const Budget&) {
  if (!same_system(m.from.system, m.to.system))
    throw UsageError("is_t_morphism: source and target systems differ");
  const OpSystem& sys = *m.from.system;
  const Carrier& c = sys.carrier();
  std::vector<int> pool = m.from.elem_list();
  std::vector<Elem> mapped;
  for (int oi = 0; oi < sys.op_count(); ++oi) {
    const PartialOp& f = sys.op(oi);
    for (TupleIter it(pool, f.arity()); !it.done(); it.next()) {
      std::vector<Elem> args = it.tuple();
      Elem fa = f.apply(args);
      mapped.assign(args.size(), kUndef);
      for (std::size_t i = 0; i < args.size(); ++i)
        mapped[i] = m.map[static_cast<std::size_t>(args[i])];
      Elem fs = f.apply(mapped);
      if ((fa == kUndef) != (fs == kUndef))
        return {false,
                Witness{"commute_definedness",
                        {f.name()},
                        {tuple_labels(c, args)},
                        {},
                        fa == kUndef ? "defined only after the map"
                                     : "defined only before the map"}};
      if (fa == kUndef) continue;
      if (!mask_has(m.from.elements, fa))
        return {false, Witness{"domain_escape",
                               {f.name()},
                               {tuple_labels(c, args)},
                               {c.label(fa)},
                               "source set is not closed"}};
      if (m.map[static_cast<std::size_t>(fa)] != fs)
        return {false,
                Witness{"commute_mismatch",
                        {f.name()},
                        {tuple_labels(c, args)},
                        {c.label(m.map[static_cast<std::size_t>(fa)]), c.label(fs)},
                        ""}};
    }
  }
  return {};
}

std::vector<int> ThetaRelation::dom() const {
  std::vector<int> out;
  for (auto [f, g] : pairs)
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  return out;
}

std::vector<int> ThetaRelation::fiber(int f) const {
  std::vector<int> out;
  for (auto [a, g] : pairs)
    if (a == f) out.push_back(g);
  return out;
}

ThetaRelation ThetaRelation::inverse() const {
  ThetaRelation inv;
  inv.t1 = t2;
  inv.t2 = t1;
  for (auto [f, g] : pairs) inv.pairs.emplace_back(g, f);
  return inv;
}

ThetaValue theta_value(const ThetaRelation& th, int f,
                       std::span<const Elem> args) {
  std::vector<int> fiber = th.fiber(f);
  if (fiber.empty()) throw UsageError("theta_value: operation not in Dom theta");
  bool any_defined = false;
  Elem value = kUndef;
  for (int gi : fiber) {
    const PartialOp& g = th.t2->op(gi);
    Elem v = kUndef;
    if (g.arity() == static_cast<int>(args.size())) v = g.apply(args);
    if (v == kUndef) {
      if (any_defined) return {ThetaValueKind::IllDefined, kUndef};
      continue;
    }
    if (!any_defined) {
      any_defined = true;
      value = v;
    } else if (value != v) {
      return {ThetaValueKind::IllDefined, kUndef};
    }
  }
  if (!any_defined) return {ThetaValueKind::Undefined, kUndef};
  // a later undefined member after a defined one
  for (int gi : fiber) {
    const PartialOp& g = th.t2->op(gi);
    if (g.arity() != static_cast<int>(args.size()) || g.apply(args) == kUndef)
      return {ThetaValueKind::IllDefined, kUndef};
  }
  return {ThetaValueKind::Value, value};
}

Verdict theta_restriction_is_map(const ThetaRelation& th, Mask A) {
  const Carrier& c2 = th.t2->carrier();
  std::vector<int> pool = mask_elems(A);
  for (int f : th.dom()) {
    std::vector<int> fiber = th.fiber(f);
    for (std::size_t i = 0; i < fiber.size(); ++i)
      for (std::size_t j = i + 1; j < fiber.size(); ++j) {
        const PartialOp& g1 = th.t2->op(fiber[i]);
        const PartialOp& g2 = th.t2->op(fiber[j]);
        if (g1.arity() != g2.arity()) {
          // restrictions of different arity agree only if both are empty
          for (const PartialOp* g : {&g1, &g2})
            for (TupleIter it(pool, g->arity()); !it.done(); it.next())
              if (g->apply(it.tuple()) != kUndef)
                return {false, Witness{"theta_not_map",
                                       {th.t1->op(f).name(), g1.name(), g2.name()},
                                       {tuple_labels(c2, it.tuple())},
                                       {},
                                       "fiber members of different arity"}};
          continue;
        }
        for (TupleIter it(pool, g1.arity()); !it.done(); it.next()) {
          std::vector<Elem> t = it.tuple();
          Elem v1 = g1.apply(t);
          Elem v2 = g2.apply(t);
          if (v1 != v2)
            return {false, Witness{"theta_not_map",
                                   {th.t1->op(f).name(), g1.name(), g2.name()},
                                   {tuple_labels(c2, t)},
                                   {v1 == kUndef ? "?" : c2.label(v1),
                                    v2 == kUndef ? "?" : c2.label(v2)},
                                   ""}};
        }
      }
  }
  return {};
}

Verdict is_theta_morphism(const Morphism& phi, const ThetaRelation& th,
                          const Budget&) {
  if (!same_system(phi.from.system, th.t1) ||
      !same_system(phi.to.system, th.t2))
    throw UsageError("is_theta_morphism: relation does not match the spaces");
  // clause (i): theta restricted to the image is a map
  Verdict mapness = theta_restriction_is_map(th, phi.image());
  if (!mapness.ok) return mapness;

  const Carrier& c1 = th.t1->carrier();
  std::vector<int> pool = phi.from.elem_list();
  std::vector<Elem> mapped;
  for (int fi : th.dom()) {
    const PartialOp& f = th.t1->op(fi);
    for (TupleIter it(pool, f.arity()); !it.done(); it.next()) {
      std::vector<Elem> args = it.tuple();
      Elem fa = f.apply(args);
      mapped.assign(args.size(), kUndef);
      for (std::size_t i = 0; i < args.size(); ++i)
        mapped[i] = phi.map[static_cast<std::size_t>(args[i])];
      ThetaValue tv = theta_value(th, fi, mapped);
      bool rhs_defined = tv.kind == ThetaValueKind::Value;
      if ((fa == kUndef) != !rhs_defined)
        return {false,
                Witness{"theta_definedness",
                        {f.name()},
                        {tuple_labels(c1, args)},
                        {},
                        fa == kUndef ? "theta value defined on undefined source"
                                     : "theta value missing on defined source"}};
      if (fa == kUndef) continue;
      Elem lhs = phi.map[static_cast<std::size_t>(fa)];
      if (lhs != tv.value)
        return {false, Witness{"theta_mismatch",
                               {f.name()},
                               {tuple_labels(c1, args)},
                               {th.t2->carrier().label(lhs),
                                th.t2->carrier().label(tv.value)},
                               ""}};
    }
  }
  return {};
}

std::optional<int> MorphismSet::find(const Morphism& m) const {
  for (int i = 0; i < size(); ++i)
    if (members[static_cast<std::size_t>(i)].map == m.map) return i;
  return std::nullopt;
}

namespace {

// Per-op tables over space positions; kUndef for holes, entries are certain
// to stay inside the space (the source set is a T-space).
struct PosTables {
  int k = 0;
  std::vector<int> arity;
  std::vector<std::vector<int>> table;
};

PosTables position_tables(const TSpace& S) {
  const OpSystem& sys = *S.system;
  PosTables pt;
  std::vector<int> elems = S.elem_list();
  pt.k = static_cast<int>(elems.size());
  std::vector<int> pos(static_cast<std::size_t>(sys.carrier().size()), -1);
  for (std::size_t i = 0; i < elems.size(); ++i)
    pos[static_cast<std::size_t>(elems[i])] = static_cast<int>(i);
  for (int oi = 0; oi < sys.op_count(); ++oi) {
    const PartialOp& f = sys.op(oi);
    pt.arity.push_back(f.arity());
    std::size_t size = 1;
    for (int i = 0; i < f.arity(); ++i) size *= static_cast<std::size_t>(pt.k);
    if (pt.k == 0) size = 0;
    std::vector<int> tab(size, kUndef);
    std::vector<Elem> args(static_cast<std::size_t>(f.arity()));
    for (std::size_t idx = 0; idx < size; ++idx) {
      std::size_t rest = idx;
      for (int j = f.arity() - 1; j >= 0; --j) {
        args[static_cast<std::size_t>(j)] = elems[rest % static_cast<std::size_t>(pt.k)];
        rest /= static_cast<std::size_t>(pt.k);
      }
      Elem v = f.apply(args);
      if (v == kUndef) continue;
      if (pos[static_cast<std::size_t>(v)] < 0)
        throw UsageError("enumerate_morphisms: the set is not closed");
      tab[idx] = pos[static_cast<std::size_t>(v)];
    }
    pt.table.push_back(std::move(tab));
  }
  return pt;
}

// sigma given as positions; checks the morphism condition in position space.
bool commutes(const PosTables& pt, const std::vector<int>& sigma) {
  const int k = pt.k;
  for (std::size_t oi = 0; oi < pt.table.size(); ++oi) {
    const int r = pt.arity[oi];
    const std::vector<int>& tab = pt.table[oi];
    std::size_t size = tab.size();
    std::vector<int> args(static_cast<std::size_t>(r));
    for (std::size_t idx = 0; idx < size; ++idx) {
      std::size_t rest = idx;
      std::size_t midx = 0;
      for (int j = r - 1; j >= 0; --j) {
        args[static_cast<std::size_t>(j)] = static_cast<int>(rest % static_cast<std::size_t>(k));
        rest /= static_cast<std::size_t>(k);
      }
      for (int j = 0; j < r; ++j)
        midx = midx * static_cast<std::size_t>(k) +
               static_cast<std::size_t>(sigma[static_cast<std::size_t>(args[static_cast<std::size_t>(j)])]);
      int fa = tab[idx];
      int fs = tab[midx];
      if ((fa == kUndef) != (fs == kUndef)) return false;
      if (fa != kUndef && sigma[static_cast<std::size_t>(fa)] != fs) return false;
    }
  }
  return true;
}

}  // namespace

MorphismSet enumerate_morphisms(const TSpace& S, MorphKind kind,
                                const Budget& budget) {
  const int k = S.size();
  if (kind == MorphKind::Endo && k > budget.endo_space)
    throw BudgetError("End enumeration over |S| = " + std::to_string(k),
                      static_cast<std::uint64_t>(budget.endo_space));
  if (kind == MorphKind::Auto && k > budget.auto_space)
    throw BudgetError("Aut enumeration over |S| = " + std::to_string(k),
                      static_cast<std::uint64_t>(budget.auto_space));

  PosTables pt = position_tables(S);
  std::vector<int> elems = S.elem_list();
  std::vector<std::vector<int>> found;  // position images, in lexicographic order

  if (k == 0) {
    found.push_back({});  // the empty map
  } else if (kind == MorphKind::Endo) {
    std::uint64_t count = pow_u64(static_cast<std::uint64_t>(k), k);
    std::vector<std::uint64_t> codes =
        scan_codes(count, [&pt, k](std::uint64_t code) {
          std::vector<int> sigma(static_cast<std::size_t>(k));
          decode_map(code, k, sigma);
          return commutes(pt, sigma);
        });
    found.reserve(codes.size());
    for (std::uint64_t code : codes) {
      std::vector<int> sigma(static_cast<std::size_t>(k));
      decode_map(code, k, sigma);
      found.push_back(std::move(sigma));
    }
  } else {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      if (commutes(pt, perm)) found.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  MorphismSet out;
  out.space = S;
  out.kind = kind == MorphKind::Endo ? MorphismSet::Kind::Monoid
                                     : MorphismSet::Kind::Group;
  const std::size_t n = static_cast<std::size_t>(S.system->carrier().size());
  for (const std::vector<int>& sigma : found) {
    std::vector<Elem> map(n, kUndef);
    for (int i = 0; i < k; ++i)
      map[static_cast<std::size_t>(elems[static_cast<std::size_t>(i)])] =
          elems[static_cast<std::size_t>(sigma[static_cast<std::size_t>(i)])];
    out.members.push_back(Morphism{S, S, std::move(map)});
  }

  // certify monoid / group structure (Props on End and Aut)
  bool has_id = false;
  for (const Morphism& m : out.members) {
    bool id = true;
    for (Elem e : elems)
      if (m.map[static_cast<std::size_t>(e)] != e) id = false;
    if (id) has_id = true;
  }
  if (!has_id)
    throw TheoremViolation("enumerated morphism set misses the identity");
  if (out.members.size() <= 4096) {
    std::set<std::vector<Elem>> tables;
    for (const Morphism& m : out.members) tables.insert(m.map);
    for (const Morphism& a : out.members)
      for (const Morphism& b : out.members)
        if (!tables.count(compose(a, b).map))
          throw TheoremViolation("enumerated set not closed under composition");
    if (kind == MorphKind::Auto)
      for (const Morphism& a : out.members)
        if (!tables.count(invert_isomorphism(a, budget).map))
          throw TheoremViolation("enumerated group misses an inverse");
  }
  return out;
}

namespace {

// Value-pair fixpoint: the set of pairs (value of a composite tree on the
// left seeds, value of the same tree on the right) is finite and closed
// under one generator step, because every argument position of a composite
// is itself a composite.  Arrow conditions become functionality of this
// relation, decided exactly.
struct PairFix {
  struct Prov {
    int op = -1;
    bool leaf = false;
    std::vector<int> child;       // pair ids (internal nodes)
    std::vector<Elem> leaf_args;  // seed arguments (leaves)
  };
  std::vector<std::pair<Elem, Elem>> pairs;
  std::vector<Prov> prov;
  std::set<std::pair<Elem, Elem>> seen;

  bool add(Elem x, Elem y, Prov p) {
    if (!seen.insert({x, y}).second) return false;
    pairs.emplace_back(x, y);
    prov.push_back(std::move(p));
    return true;
  }
};

std::string render_expr(const PairFix& fix, const OpSystem& sys, int id,
                        bool left) {
  const PairFix::Prov& p = fix.prov[static_cast<std::size_t>(id)];
  std::string s = sys.op(p.op).name() + "(";
  if (p.leaf) {
    for (std::size_t i = 0; i < p.leaf_args.size(); ++i)
      s += (i ? "," : "") + sys.carrier().label(p.leaf_args[i]);
  } else {
    for (std::size_t i = 0; i < p.child.size(); ++i)
      s += (i ? "," : "") + render_expr(fix, sys, p.child[i], left);
  }
  return s + ")";
}

Elem left_apply(const PartialOp& op, const std::vector<Elem>& args) {
  for (Elem a : args)
    if (a < 0) return kUndef;
  return op.apply(args);
}

// Runs the fixpoint; `right` evaluates one generator step on the right
// sides (may return kIll).  Returns a functionality violation if any.
template <class RightStep>
Verdict pair_fixpoint_check(const OpSystem& sys1, const PointMap& seeds_from,
                            RightStep&& right, PairFix& fix) {
  // seed pairs: one generator applied to seed tuples
  std::vector<Elem> lefts, rights;
  for (auto [u, v] : seeds_from) {
    lefts.push_back(u);
    rights.push_back(v);
  }
  std::vector<int> idx(seeds_from.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (int oi = 0; oi < sys1.op_count(); ++oi) {
    const PartialOp& g = sys1.op(oi);
    for (TupleIter it(idx, g.arity()); !it.done(); it.next()) {
      std::vector<Elem> sel = it.tuple();
      std::vector<Elem> la, ra;
      for (Elem s : sel) {
        la.push_back(lefts[static_cast<std::size_t>(s)]);
        ra.push_back(rights[static_cast<std::size_t>(s)]);
      }
      Elem x = left_apply(g, la);
      Elem y = right(oi, ra);
      fix.add(x, y, {oi, true, {}, la});
    }
  }
  // close under generator steps
  bool grew = true;
  while (grew) {
    grew = false;
    std::size_t upto = fix.pairs.size();
    for (int oi = 0; oi < sys1.op_count(); ++oi) {
      const PartialOp& g = sys1.op(oi);
      std::vector<int> ids(upto);
      std::iota(ids.begin(), ids.end(), 0);
      for (TupleIter it(ids, g.arity()); !it.done(); it.next()) {
        std::vector<Elem> sel = it.tuple();
        std::vector<Elem> la, ra;
        for (Elem s : sel) {
          la.push_back(fix.pairs[static_cast<std::size_t>(s)].first);
          ra.push_back(fix.pairs[static_cast<std::size_t>(s)].second);
        }
        Elem x = left_apply(g, la);
        Elem y = right(oi, ra);
        std::vector<int> child(sel.begin(), sel.end());
        if (fix.add(x, y, {oi, false, std::move(child), {}})) grew = true;
      }
    }
  }
  // functionality on defined left components
  for (std::size_t i = 0; i < fix.pairs.size(); ++i) {
    auto [x, y] = fix.pairs[i];
    if (x == kUndef) continue;
    if (y < 0)
      return {false,
              Witness{"arrow_break",
                      {render_expr(fix, sys1, static_cast<int>(i), true)},
                      {},
                      {sys1.carrier().label(x)},
                      y == kIll ? "image ill-defined" : "image undefined"}};
    for (std::size_t j = i + 1; j < fix.pairs.size(); ++j) {
      auto [x2, y2] = fix.pairs[j];
      if (x2 != x || y2 == y) continue;
      return {false,
              Witness{"arrow_break",
                      {render_expr(fix, sys1, static_cast<int>(i), true),
                       render_expr(fix, sys1, static_cast<int>(j), true)},
                      {},
                      {sys1.carrier().label(x)},
                      "equal on the left, different images"}};
    }
  }
  return {};
}

Verdict explicit_map_arrow(const OpSystem& sys, const PointMap& alpha) {
  const Carrier& c = sys.carrier();
  std::vector<int> U;
  std::vector<Elem> al(static_cast<std::size_t>(c.size()), kUndef);
  for (auto [u, v] : alpha) {
    U.push_back(u);
    al[static_cast<std::size_t>(u)] = v;
  }
  for (int fi = 0; fi < sys.op_count(); ++fi)
    for (int gi = 0; gi < sys.op_count(); ++gi) {
      const PartialOp& f = sys.op(fi);
      const PartialOp& g = sys.op(gi);
      for (TupleIter fu(U, f.arity()); !fu.done(); fu.next()) {
        std::vector<Elem> ut = fu.tuple();
        Elem a = f.apply(ut);
        if (a == kUndef) continue;
        for (TupleIter gw(U, g.arity()); !gw.done(); gw.next()) {
          std::vector<Elem> wt = gw.tuple();
          if (g.apply(wt) != a) continue;
          std::vector<Elem> uat(ut.size()), wat(wt.size());
          for (std::size_t i = 0; i < ut.size(); ++i)
            uat[i] = al[static_cast<std::size_t>(ut[i])];
          for (std::size_t i = 0; i < wt.size(); ++i)
            wat[i] = al[static_cast<std::size_t>(wt[i])];
          Elem fa = f.apply(uat);
          Elem ga = g.apply(wat);
          if (fa == kUndef || fa != ga)
            return {false, Witness{"arrow_break",
                                   {f.name(), g.name()},
                                   {tuple_labels(c, ut), tuple_labels(c, wt)},
                                   {},
                                   fa == kUndef || ga == kUndef
                                       ? "image undefined"
                                       : "images disagree"}};
        }
      }
    }
  return {};
}

PointMap reversed(const PointMap& alpha) {
  PointMap rev;
  for (auto [u, v] : alpha) rev.emplace_back(v, u);
  std::sort(rev.begin(), rev.end());
  return rev;
}

bool point_map_bijective(const PointMap& alpha) {
  std::set<Elem> img;
  for (auto [u, v] : alpha) img.insert(v);
  return img.size() == alpha.size();
}

}  // namespace

Mask point_map_domain(const PointMap& alpha) {
  Mask m = 0;
  for (auto [u, v] : alpha) m |= mask_bit(u);
  return m;
}

Mask point_map_image(const PointMap& alpha) {
  Mask m = 0;
  for (auto [u, v] : alpha) m |= mask_bit(v);
  return m;
}

Verdict arrow_holds(SystemPtr sys, Elem u, Elem v, bool two_way,
                    const Budget& budget) {
  if (u < 0 || u >= sys->carrier().size() || v < 0 ||
      v >= sys->carrier().size())
    throw UsageError("arrow_holds: element outside the carrier");
  const Carrier& c = sys->carrier();
  if (sys->rep() == Rep::Explicit) {
    // diagonal tuples u^n against u^m over member pairs
    auto one_way = [&](Elem a, Elem b) -> Verdict {
      for (int fi = 0; fi < sys->op_count(); ++fi)
        for (int gi = 0; gi < sys->op_count(); ++gi) {
          const PartialOp& f = sys->op(fi);
          const PartialOp& g = sys->op(gi);
          std::vector<Elem> fa(static_cast<std::size_t>(f.arity()), a);
          std::vector<Elem> ga(static_cast<std::size_t>(g.arity()), a);
          Elem x1 = f.apply(fa);
          Elem x2 = g.apply(ga);
          if (x1 == kUndef || x1 != x2) continue;
          std::vector<Elem> fb(static_cast<std::size_t>(f.arity()), b);
          std::vector<Elem> gb(static_cast<std::size_t>(g.arity()), b);
          Elem y1 = f.apply(fb);
          Elem y2 = g.apply(gb);
          if (y1 == kUndef || y1 != y2)
            return {false, Witness{"arrow_break",
                                   {f.name(), g.name()},
                                   {},
                                   {c.label(a), c.label(b)},
                                   "diagonal agreement not transferred"}};
        }
      return {};
    };
    Verdict fwd = one_way(u, v);
    if (!fwd.ok || !two_way) return fwd;
    return one_way(v, u);
  }
  auto right = [&](int oi, const std::vector<Elem>& args) -> Elem {
    return left_apply(sys->op(oi), args);
  };
  PairFix fix;
  Verdict fwd = pair_fixpoint_check(*sys, {{u, v}}, right, fix);
  if (!fwd.ok || !two_way) return fwd;
  PairFix back;
  return pair_fixpoint_check(*sys, {{v, u}}, right, back);
}

ArrowSets arrow_sets(SystemPtr sys, Elem u, Mask scope, const Budget& budget) {
  ArrowSets out;
  for (int v : mask_elems(scope)) {
    Verdict fwd = arrow_holds(sys, u, v, false, budget);
    if (fwd.ok) {
      out.front |= mask_bit(v);
      if (arrow_holds(sys, v, u, false, budget).ok) out.eq_class |= mask_bit(v);
    } else {
      out.front_failures.emplace(v, *fwd.witness);
    }
  }
  return out;
}

Verdict map_arrow_holds(SystemPtr sys, const PointMap& alpha, bool two_way,
                        const Budget& budget) {
  if (two_way && !point_map_bijective(alpha))
    return {false, Witness{"alpha_not_bijective", {}, {}, {}, ""}};
  auto one_way = [&](const PointMap& a) -> Verdict {
    if (sys->rep() == Rep::Explicit) return explicit_map_arrow(*sys, a);
    auto right = [&](int oi, const std::vector<Elem>& args) -> Elem {
      return left_apply(sys->op(oi), args);
    };
    PairFix fix;
    return pair_fixpoint_check(*sys, a, right, fix);
  };
  Verdict fwd = one_way(alpha);
  if (!fwd.ok || !two_way) return fwd;
  return one_way(reversed(alpha));
}

namespace {

Elem theta_step(const ThetaRelation& th, int oi, const std::vector<Elem>& args) {
  for (Elem a : args) {
    if (a == kIll) return kIll;
    if (a == kUndef) return kUndef;
  }
  ThetaValue tv = theta_value(th, oi, args);
  switch (tv.kind) {
    case ThetaValueKind::Value: return tv.value;
    case ThetaValueKind::Undefined: return kUndef;
    default: return kIll;
  }
}

Verdict explicit_map_arrow_theta(const ThetaRelation& th, const PointMap& alpha) {
  const OpSystem& sys1 = *th.t1;
  const Carrier& c1 = sys1.carrier();
  std::vector<int> U;
  std::vector<Elem> al(static_cast<std::size_t>(c1.size()), kUndef);
  for (auto [u, v] : alpha) {
    U.push_back(u);
    al[static_cast<std::size_t>(u)] = v;
  }
  std::vector<int> dom = th.dom();
  for (int fi : dom)
    for (int gi : dom) {
      const PartialOp& f = sys1.op(fi);
      const PartialOp& g = sys1.op(gi);
      for (TupleIter fu(U, f.arity()); !fu.done(); fu.next()) {
        std::vector<Elem> ut = fu.tuple();
        Elem a = f.apply(ut);
        if (a == kUndef) continue;
        for (TupleIter gw(U, g.arity()); !gw.done(); gw.next()) {
          std::vector<Elem> wt = gw.tuple();
          if (g.apply(wt) != a) continue;
          std::vector<Elem> uat(ut.size()), wat(wt.size());
          for (std::size_t i = 0; i < ut.size(); ++i)
            uat[i] = al[static_cast<std::size_t>(ut[i])];
          for (std::size_t i = 0; i < wt.size(); ++i)
            wat[i] = al[static_cast<std::size_t>(wt[i])];
          Elem fa = theta_step(th, fi, uat);
          Elem ga = theta_step(th, gi, wat);
          if (fa < 0 || fa != ga)
            return {false,
                    Witness{"arrow_break",
                            {f.name(), g.name()},
                            {tuple_labels(c1, ut), tuple_labels(c1, wt)},
                            {},
                            fa == kIll || ga == kIll ? "theta value ill-defined"
                                                     : "theta images disagree"}};
        }
      }
    }
  return {};
}

void require_theta_covers(const ThetaRelation& th) {
  std::vector<int> dom = th.dom();
  for (int i = 0; i < th.t1->op_count(); ++i)
    if (std::find(dom.begin(), dom.end(), i) == dom.end())
      throw UsageError("theta must pair every listed operation of T1");
}

}  // namespace

Verdict map_arrow_holds_theta(const ThetaRelation& th, const PointMap& alpha,
                              bool two_way, const Budget& budget) {
  if (two_way && !point_map_bijective(alpha))
    return {false, Witness{"alpha_not_bijective", {}, {}, {}, ""}};
  Verdict fwd = explicit_map_arrow_theta(th, alpha);
  if (!fwd.ok || !two_way) return fwd;
  return explicit_map_arrow_theta(th.inverse(), reversed(alpha));
}

Verdict theta_distributive_over(const ThetaRelation& th, Mask A,
                                const Budget& budget) {
  const OpSystem& sys1 = *th.t1;
  std::vector<int> dom = th.dom();
  std::vector<int> pool = mask_elems(A);
  for (int fi : dom) {
    const PartialOp& f = sys1.op(fi);
    std::vector<std::size_t> pick(static_cast<std::size_t>(f.arity()), 0);
    while (true) {
      std::vector<PartialOp> inner;
      std::vector<int> inner_idx;
      for (std::size_t s : pick) {
        inner.push_back(sys1.op(dom[s]));
        inner_idx.push_back(dom[s]);
      }
      PartialOp comp = compose(f, inner, budget);
      std::optional<int> ci = sys1.find_table(comp);
      bool in_dom = ci && std::find(dom.begin(), dom.end(), *ci) != dom.end();
      if (in_dom) {
        for (TupleIter it(pool, comp.arity()); !it.done(); it.next()) {
          std::vector<Elem> z = it.tuple();
          Elem lhs = theta_step(th, *ci, z);
          if (lhs < 0) continue;  // only where theta(f o g) is well-defined
          // right side: theta(g_i) blockwise, then theta(f)
          std::vector<Elem> mid(inner.size(), kUndef);
          std::size_t off = 0;
          for (std::size_t i = 0; i < inner.size(); ++i) {
            std::vector<Elem> block(z.begin() + static_cast<std::ptrdiff_t>(off),
                                    z.begin() + static_cast<std::ptrdiff_t>(
                                                    off + static_cast<std::size_t>(
                                                              inner[i].arity())));
            off += static_cast<std::size_t>(inner[i].arity());
            mid[i] = theta_step(th, inner_idx[i], block);
          }
          Elem rhs = theta_step(th, fi, mid);
          if (lhs != rhs)
            return {false,
                    Witness{"theta_not_distributive",
                            {f.name(), comp.name()},
                            {tuple_labels(th.t2->carrier(), z)},
                            {},
                            "composite image differs from composed images"}};
        }
      }
      bool more = false;
      for (int k = static_cast<int>(pick.size()) - 1; k >= 0; --k) {
        if (++pick[static_cast<std::size_t>(k)] < dom.size()) { more = true; break; }
        pick[static_cast<std::size_t>(k)] = 0;
      }
      if (!more) break;
    }
  }
  return {};
}

ConstructResult construct_morphism(SystemPtr sys, const PointMap& alpha,
                                   bool two_way, const Budget& budget) {
  ConstructResult out;
  Verdict arrow = map_arrow_holds(sys, alpha, two_way, budget);
  if (!arrow.ok) {
    out.witness = arrow.witness;
    return out;
  }
  Mask U = point_map_domain(alpha);
  Mask V = point_map_image(alpha);
  TSpace from = generate_space(sys, U, budget);
  TSpace to = generate_space(sys, V, budget);

  std::vector<std::pair<Elem, Elem>> assignments;
  if (sys->rep() == Rep::Explicit) {
    std::vector<int> Ul;
    std::vector<Elem> al(static_cast<std::size_t>(sys->carrier().size()), kUndef);
    for (auto [u, v] : alpha) {
      Ul.push_back(u);
      al[static_cast<std::size_t>(u)] = v;
    }
    for (int oi = 0; oi < sys->op_count(); ++oi) {
      const PartialOp& f = sys->op(oi);
      for (TupleIter it(Ul, f.arity()); !it.done(); it.next()) {
        std::vector<Elem> ut = it.tuple();
        Elem a = f.apply(ut);
        if (a == kUndef) continue;
        std::vector<Elem> at(ut.size());
        for (std::size_t i = 0; i < ut.size(); ++i)
          at[i] = al[static_cast<std::size_t>(ut[i])];
        assignments.emplace_back(a, f.apply(at));
      }
    }
  } else {
    auto right = [&](int oi, const std::vector<Elem>& args) -> Elem {
      return left_apply(sys->op(oi), args);
    };
    PairFix fix;
    pair_fixpoint_check(*sys, alpha, right, fix);  // arrow already verified
    for (auto [x, y] : fix.pairs)
      if (x != kUndef) assignments.emplace_back(x, y);
  }
  std::sort(assignments.begin(), assignments.end());
  assignments.erase(std::unique(assignments.begin(), assignments.end()),
                    assignments.end());
  Morphism m = make_morphism(from, to, assignments);
  Verdict post = is_t_morphism(m, budget);
  if (!post.ok)
    throw TheoremViolation("constructed map is not a T-morphism");
  if (two_way && !m.is_bijective())
    throw TheoremViolation("two-way construction is not bijective");
  out.ok = true;
  out.morphism = std::move(m);
  return out;
}

ConstructResult construct_morphism_theta(const ThetaRelation& th,
                                         const PointMap& alpha, bool two_way,
                                         const Budget& budget) {
  require_theta_covers(th);
  ConstructResult out;
  Mask U = point_map_domain(alpha);
  Mask V = point_map_image(alpha);

  std::vector<std::pair<Elem, Elem>> assignments;
  Verdict arrow;
  if (th.t1->rep() == Rep::Explicit) {
    arrow = map_arrow_holds_theta(th, alpha, two_way, budget);
    if (arrow.ok) {
      std::vector<int> Ul;
      std::vector<Elem> al(static_cast<std::size_t>(th.t1->carrier().size()),
                           kUndef);
      for (auto [u, v] : alpha) {
        Ul.push_back(u);
        al[static_cast<std::size_t>(u)] = v;
      }
      for (int fi : th.dom()) {
        const PartialOp& f = th.t1->op(fi);
        for (TupleIter it(Ul, f.arity()); !it.done(); it.next()) {
          std::vector<Elem> ut = it.tuple();
          Elem a = f.apply(ut);
          if (a == kUndef) continue;
          std::vector<Elem> at(ut.size());
          for (std::size_t i = 0; i < ut.size(); ++i)
            at[i] = al[static_cast<std::size_t>(ut[i])];
          Elem b = theta_step(th, fi, at);
          if (b < 0)
            throw TheoremViolation("theta image vanished after the arrow held");
          assignments.emplace_back(a, b);
        }
      }
    }
  } else {
    // composite extension of theta, decided by the value-pair fixpoint
    auto right = [&](int oi, const std::vector<Elem>& args) -> Elem {
      return theta_step(th, oi, args);
    };
    PairFix fix;
    arrow = pair_fixpoint_check(*th.t1, alpha, right, fix);
    if (two_way && arrow.ok) {
      if (!point_map_bijective(alpha)) {
        arrow = {false, Witness{"alpha_not_bijective", {}, {}, {}, ""}};
      } else {
        // reverse arrow runs over T2's listed ops; Im theta must cover them
        ThetaRelation inv = th.inverse();
        require_theta_covers(inv);
        PairFix back;
        auto rstep = [&](int oi, const std::vector<Elem>& args) -> Elem {
          return theta_step(inv, oi, args);
        };
        arrow = pair_fixpoint_check(*th.t2, reversed(alpha), rstep, back);
      }
    }
    if (arrow.ok)
      for (auto [x, y] : fix.pairs)
        if (x != kUndef) assignments.emplace_back(x, y);
  }
  if (!arrow.ok) {
    out.witness = arrow.witness;
    return out;
  }

  TSpace from = generate_space(th.t1, U, budget);
  TSpace to = generate_space(th.t2, V, budget);
  std::sort(assignments.begin(), assignments.end());
  assignments.erase(std::unique(assignments.begin(), assignments.end()),
                    assignments.end());
  Morphism m = make_morphism(from, to, assignments);

  Verdict dist = theta_distributive_over(th, V, budget);
  Verdict mapness = theta_restriction_is_map(th, m.image());
  out.theta_hypotheses_hold = dist.ok && mapness.ok;
  if (!dist.ok) out.theta_hypothesis_note = "theta not distributive over V";
  if (!mapness.ok)
    out.theta_hypothesis_note += std::string(dist.ok ? "" : "; ") +
                                 "theta restricted to the image is not a map";
  if (out.theta_hypotheses_hold) {
    Verdict post = is_theta_morphism(m, th, budget);
    if (!post.ok)
      throw TheoremViolation("constructed map is not a theta-morphism");
    if (two_way && !m.is_bijective())
      throw TheoremViolation("two-way theta construction is not bijective");
  }
  out.ok = true;
  out.morphism = std::move(m);
  return out;
}

std::optional<PointMap> find_constructing_map(const Morphism& sigma, Mask U,
                                              const ThetaRelation* theta,
                                              const Budget& budget) {
  SystemPtr sys = sigma.from.system;
  Mask span = generate_space(sys, U, budget).elements;
  if (span != sigma.from.elements)
    throw UsageError("find_constructing_map: U does not generate the source");

  auto attempt = [&](const PointMap& alpha) -> bool {
    ConstructResult r = theta
                            ? construct_morphism_theta(*theta, alpha, false, budget)
                            : construct_morphism(sys, alpha, false, budget);
    return r.ok && r.morphism && same_map(*r.morphism, sigma);
  };

  if (mask_subset(U, span)) {
    PointMap alpha;
    for (int u : mask_elems(U))
      alpha.emplace_back(u, sigma.map[static_cast<std::size_t>(u)]);
    if (!attempt(alpha))
      throw TheoremViolation(
          "restriction failed to construct its own morphism");
    return alpha;
  }

  // exhaustive search over maps U -> target carrier, lexicographic
  const Carrier& target =
      theta ? theta->t2->carrier() : sys->carrier();
  std::vector<int> Ul = mask_elems(U);
  const int k = target.size();
  if (Ul.empty()) return PointMap{};
  std::uint64_t count = pow_u64(static_cast<std::uint64_t>(k),
                                static_cast<int>(Ul.size()));
  std::vector<int> digits(Ul.size());
  for (std::uint64_t code = 0; code < count; ++code) {
    decode_map(code, k, digits);
    PointMap alpha;
    for (std::size_t i = 0; i < Ul.size(); ++i)
      alpha.emplace_back(Ul[i], digits[i]);
    if (attempt(alpha)) return alpha;
  }
  return std::nullopt;
}

Morphism invert_isomorphism(const Morphism& sigma, const Budget& budget) {
  if (!sigma.is_bijective())
    throw UsageError("invert_isomorphism: map is not bijective");
  std::vector<Elem> inv(sigma.map.size(), kUndef);
  for (Elem e : sigma.from.elem_list())
    inv[static_cast<std::size_t>(sigma.map[static_cast<std::size_t>(e)])] = e;
  return Morphism{sigma.to, sigma.from, std::move(inv)};
}

std::pair<Morphism, ThetaRelation> invert_theta_isomorphism(
    const Morphism& phi, const ThetaRelation& th, const Budget& budget) {
  Verdict fwd = is_theta_morphism(phi, th, budget);
  if (!fwd.ok)
    throw UsageError("invert_theta_isomorphism: not a theta-morphism");
  if (!phi.is_bijective())
    throw UsageError("invert_theta_isomorphism: map is not bijective");
  ThetaRelation inv = th.inverse();
  Verdict mapness = theta_restriction_is_map(inv, phi.from.elements);
  if (!mapness.ok)
    throw TheoremViolation("inverse relation restricted to S1 is not a map");
  std::vector<Elem> invmap(
      static_cast<std::size_t>(phi.to.system->carrier().size()), kUndef);
  for (Elem e : phi.from.elem_list())
    invmap[static_cast<std::size_t>(phi.map[static_cast<std::size_t>(e)])] = e;
  Morphism back{phi.to, phi.from, std::move(invmap)};
  Verdict check = is_theta_morphism(back, inv, budget);
  if (!check.ok)
    throw TheoremViolation("inverse map is not a theta-inverse morphism");
  return {std::move(back), std::move(inv)};
}

}  // namespace ggt
