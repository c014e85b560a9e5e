#ifndef GGT_MORPHISM_HPP
#define GGT_MORPHISM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ggt/tspace.hpp"

namespace ggt {

// A total map between the element sets of two spaces.  The mapping vector is
// indexed by the source carrier; entries off the source space are kUndef.
struct Morphism {
  TSpace from;
  TSpace to;
  std::vector<Elem> map;

  Elem operator()(Elem a) const { return map[static_cast<std::size_t>(a)]; }
  Mask image() const;
  bool is_bijective() const;
  std::uint64_t code() const;  // base-|S| encoding over the source elements
};

Morphism make_morphism(TSpace from, TSpace to,
                       const std::vector<std::pair<Elem, Elem>>& pairs);
Morphism identity_morphism(const TSpace& s);
Morphism compose(const Morphism& outer, const Morphism& inner);
bool same_map(const Morphism& a, const Morphism& b);

// A minimal replayable counterexample.
struct Witness {
  std::string kind;
  std::vector<std::string> ops;
  std::vector<std::vector<std::string>> tuples;
  std::vector<std::string> elems;
  std::string note;
};

struct Verdict {
  bool ok = true;
  std::optional<Witness> witness;
  explicit operator bool() const { return ok; }
};

// Commutation with every operation, with matched definedness on the partial
// tier.  Generated systems are checked on generators only; composites
// inherit the condition.
Verdict is_t_morphism(const Morphism& m,
                      const Budget& budget = Budget::from_env());

// A finite relation pairing operations of two systems.
struct ThetaRelation {
  SystemPtr t1;
  SystemPtr t2;
  std::vector<std::pair<int, int>> pairs;

  std::vector<int> dom() const;
  std::vector<int> fiber(int f) const;
  ThetaRelation inverse() const;
};

enum class ThetaValueKind { Value, Undefined, IllDefined };

struct ThetaValue {
  ThetaValueKind kind = ThetaValueKind::Undefined;
  Elem value = kUndef;
};

// theta(f) evaluated at one point: the common value of the fiber if it
// agrees, Undefined if the whole fiber is undefined, IllDefined otherwise.
ThetaValue theta_value(const ThetaRelation& th, int f,
                       std::span<const Elem> args);

// Whether theta restricted to A is a map (fiberwise agreement on A-tuples).
Verdict theta_restriction_is_map(const ThetaRelation& th, Mask A);

// Both clauses: theta restricted to the image is a map, and definedness plus
// values match through theta on every source tuple.
Verdict is_theta_morphism(const Morphism& phi, const ThetaRelation& th,
                          const Budget& budget = Budget::from_env());

enum class MorphKind { Endo, Auto };

struct MorphismSet {
  TSpace space;
  std::vector<Morphism> members;  // ascending map code
  enum class Kind { Monoid, Group } kind = Kind::Monoid;

  int size() const { return static_cast<int>(members.size()); }
  std::optional<int> find(const Morphism& m) const;
};

// All endomorphisms (resp. automorphisms) of S in lexicographic map order;
// the result is certified a monoid (resp. group) under composition.
MorphismSet enumerate_morphisms(const TSpace& S, MorphKind kind,
                                const Budget& budget = Budget::from_env());

// Agreement-transfer arrows on diagonal tuples.
Verdict arrow_holds(SystemPtr sys, Elem u, Elem v, bool two_way,
                    const Budget& budget = Budget::from_env());

struct ArrowSets {
  Mask front = 0;     // [u) within the scope
  Mask eq_class = 0;  // [u] within the scope
  std::map<Elem, Witness> front_failures;
};

ArrowSets arrow_sets(SystemPtr sys, Elem u, Mask scope,
                     const Budget& budget = Budget::from_env());

// alpha as sorted (u, v) pairs, total on U.
using PointMap = std::vector<std::pair<Elem, Elem>>;

Mask point_map_domain(const PointMap& alpha);
Mask point_map_image(const PointMap& alpha);

// f(u-tuple) = g(w-tuple) implies f(alpha u-tuple) = g(alpha w-tuple), over
// the explicit member list or over all composites of a generated system
// (decided exactly by a fixpoint on value pairs).
Verdict map_arrow_holds(SystemPtr sys, const PointMap& alpha, bool two_way,
                        const Budget& budget = Budget::from_env());

// Same with images taken through theta; quantifies over Dom theta.
Verdict map_arrow_holds_theta(const ThetaRelation& th, const PointMap& alpha,
                              bool two_way,
                              const Budget& budget = Budget::from_env());

// Whether theta respects composition pointwise on A (checked over listed
// operations whose composites are again listed).
Verdict theta_distributive_over(const ThetaRelation& th, Mask A,
                                const Budget& budget = Budget::from_env());

struct ConstructResult {
  bool ok = false;
  std::optional<Morphism> morphism;
  std::optional<Witness> witness;
  // theta only: the hypotheses needed before the result is claimed a
  // theta-morphism.
  bool theta_hypotheses_hold = false;
  std::string theta_hypothesis_note;
};

// The map sending each generated value f(u-tuple) to f(alpha(u)-tuple); a
// T-morphism whenever the arrow holds, a T-isomorphism for the two-way form.
ConstructResult construct_morphism(SystemPtr sys, const PointMap& alpha,
                                   bool two_way,
                                   const Budget& budget = Budget::from_env());

// Theta form: values map to theta(f)(alpha(u)-tuple).
ConstructResult construct_morphism_theta(
    const ThetaRelation& th, const PointMap& alpha, bool two_way,
    const Budget& budget = Budget::from_env());

// A constructing map for sigma on the generator set U: the restriction when
// U sits inside its span, an exhaustive search otherwise.
std::optional<PointMap> find_constructing_map(
    const Morphism& sigma, Mask U, const ThetaRelation* theta = nullptr,
    const Budget& budget = Budget::from_env());

Morphism invert_isomorphism(const Morphism& sigma,
                            const Budget& budget = Budget::from_env());

std::pair<Morphism, ThetaRelation> invert_theta_isomorphism(
    const Morphism& phi, const ThetaRelation& th,
    const Budget& budget = Budget::from_env());

}  // namespace ggt

#endif  // GGT_MORPHISM_HPP
