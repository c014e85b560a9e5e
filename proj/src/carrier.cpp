#include "ggt/carrier.hpp"

#include <algorithm>
#include <set>

namespace ggt {

Carrier::Carrier(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() > 64)
    throw UsageError("carrier too large (max 64 elements)");
  for (int i = 0; i < static_cast<int>(labels_.size()); ++i) {
    if (!index_.emplace(labels_[i], i).second)
      throw UsageError("duplicate carrier label '" + labels_[i] + "'");
  }
}

std::optional<int> Carrier::find(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t table_size_checked(int carrier_size, int arity,
                               const Budget& budget) {
  if (arity < 1) throw UsageError("operation arity must be positive");
  std::size_t size = 1;
  for (int i = 0; i < arity; ++i) {
    size *= static_cast<std::size_t>(carrier_size);
    if (size > budget.table_entries)
      throw BudgetError("operation table too large", budget.table_entries);
    if (carrier_size == 0) return 0;
  }
  return size;
}

PartialOp::PartialOp(std::string name, int arity, int carrier_size,
                     std::vector<Elem> table)
    : name_(std::move(name)), arity_(arity), n_(carrier_size),
      table_(std::move(table)) {
  if (arity_ < 1) throw UsageError("operation arity must be positive");
  std::size_t want = 1;
  for (int i = 0; i < arity_ && want; ++i) want *= static_cast<std::size_t>(n_);
  if (n_ == 0) want = 0;
  if (table_.size() != want)
    throw UsageError("op '" + name_ + "': table has " +
                     std::to_string(table_.size()) + " entries, expected " +
                     std::to_string(want));
  for (Elem e : table_)
    if (e != kUndef && (e < 0 || e >= n_))
      throw UsageError("op '" + name_ + "': table entry out of range");
}

PartialOp PartialOp::identity(int carrier_size, std::string name) {
  std::vector<Elem> t(static_cast<std::size_t>(carrier_size));
  for (int i = 0; i < carrier_size; ++i) t[static_cast<std::size_t>(i)] = i;
  return PartialOp(std::move(name), 1, carrier_size, std::move(t));
}

Elem PartialOp::apply(std::span<const Elem> args) const {
  if (static_cast<int>(args.size()) != arity_)
    throw UsageError("op '" + name_ + "': expected " + std::to_string(arity_) +
                     " arguments, got " + std::to_string(args.size()));
  std::size_t idx = 0;
  for (Elem a : args) {
    if (a == kUndef) return kUndef;  // undefined propagates
    if (a < 0 || a >= n_)
      throw UsageError("op '" + name_ + "': argument not in carrier");
    idx = idx * static_cast<std::size_t>(n_) + static_cast<std::size_t>(a);
  }
  return table_[idx];
}

bool PartialOp::is_total() const {
  return std::none_of(table_.begin(), table_.end(),
                      [](Elem e) { return e == kUndef; });
}

bool PartialOp::is_identity() const {
  if (arity_ != 1) return false;
  for (int i = 0; i < n_; ++i)
    if (table_[static_cast<std::size_t>(i)] != i) return false;
  return true;
}

std::size_t PartialOp::defined_count() const {
  return static_cast<std::size_t>(std::count_if(
      table_.begin(), table_.end(), [](Elem e) { return e != kUndef; }));
}

PartialOp compose(const PartialOp& f, std::span<const PartialOp> gs,
                  const Budget& budget) {
  if (static_cast<int>(gs.size()) != f.arity())
    throw UsageError("compose: outer arity " + std::to_string(f.arity()) +
                     " but " + std::to_string(gs.size()) + " inner operations");
  const int n = f.carrier_size();
  int m = 0;
  std::string name = f.name() + "(";
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (gs[i].carrier_size() != n)
      throw UsageError("compose: operations on different carriers");
    m += gs[i].arity();
    name += (i ? "," : "") + gs[i].name();
  }
  name += ")";

  std::size_t size = table_size_checked(n, m, budget);
  std::vector<Elem> table(size, kUndef);
  std::vector<Elem> args(static_cast<std::size_t>(m));
  std::vector<Elem> inner(gs.size());
  for (std::size_t idx = 0; idx < size; ++idx) {
    std::size_t rest = idx;
    for (int j = m - 1; j >= 0; --j) {
      args[static_cast<std::size_t>(j)] = static_cast<Elem>(rest % n);
      rest /= static_cast<std::size_t>(n);
    }
    bool ok = true;
    int off = 0;
    for (std::size_t i = 0; i < gs.size(); ++i) {
      Elem v = gs[i].apply(std::span<const Elem>(args).subspan(
          static_cast<std::size_t>(off), static_cast<std::size_t>(gs[i].arity())));
      off += gs[i].arity();
      if (v == kUndef) { ok = false; break; }
      inner[i] = v;
    }
    if (!ok) continue;
    table[idx] = f.apply(inner);
  }
  return PartialOp(std::move(name), m, n, std::move(table));
}

bool is_restriction(const PartialOp& g, const PartialOp& f) {
  if (g.arity() != f.arity() || g.carrier_size() != f.carrier_size())
    throw UsageError("is_restriction: arity or carrier mismatch");
  for (std::size_t i = 0; i < g.table().size(); ++i) {
    Elem gv = g.table()[i];
    if (gv == kUndef) continue;
    if (f.table()[i] != gv) return false;
  }
  return true;
}

const char* to_string(Tier t) {
  switch (t) {
    case Tier::Unary: return "unary";
    case Tier::Generalized: return "generalized";
    default: return "partial_generalized";
  }
}

OpSystem::OpSystem(Carrier carrier, Tier tier, Rep rep,
                   std::vector<PartialOp> ops)
    : carrier_(std::move(carrier)), tier_(tier), rep_(rep),
      ops_(std::move(ops)) {
  for (const PartialOp& op : ops_) {
    if (op.carrier_size() != carrier_.size())
      throw UsageError("op '" + op.name() + "' not on the system carrier");
    if (tier_ == Tier::Unary && op.arity() != 1)
      throw UsageError("unary tier: op '" + op.name() + "' has arity " +
                       std::to_string(op.arity()));
    if (tier_ != Tier::PartialGeneralized && !op.is_total())
      throw UsageError("total tier: op '" + op.name() + "' has holes");
  }
}

int OpSystem::max_arity() const {
  int m = 0;
  for (const PartialOp& op : ops_) m = std::max(m, op.arity());
  return m;
}

std::optional<int> OpSystem::find_op(const std::string& name) const {
  for (int i = 0; i < op_count(); ++i)
    if (ops_[static_cast<std::size_t>(i)].name() == name) return i;
  return std::nullopt;
}

std::optional<int> OpSystem::find_table(const PartialOp& op) const {
  for (int i = 0; i < op_count(); ++i)
    if (ops_[static_cast<std::size_t>(i)].same_table(op)) return i;
  return std::nullopt;
}

bool OpSystem::admits(const PartialOp& op) const {
  if (tier_ != Tier::PartialGeneralized) return find_table(op).has_value();
  for (const PartialOp& m : ops_)
    if (m.arity() == op.arity() && is_restriction(op, m)) return true;
  return false;
}

TriBool OpSystem::has_identity(const Budget& budget) const {
  for (const PartialOp& op : ops_)
    if (op.is_identity()) return TriBool::True;
  if (rep_ == Rep::Explicit) return TriBool::False;
  if (tier_ == Tier::Unary) {
    OpSystem mat = materialize_unary(*this, budget);
    for (const PartialOp& op : mat.ops())
      if (op.is_identity()) return TriBool::True;
    return TriBool::False;
  }
  // Multi-arity generated closures are arity-infinite; without a listed
  // identity we do not decide.
  return TriBool::Indeterminate;
}

namespace {

// Worklist closure, deduplicated extensionally; order of discovery is fixed
// by the iteration order, so the result is deterministic.
std::vector<PartialOp> close_ops(const std::vector<PartialOp>& generators,
                                 Tier tier, int arity_cap,
                                 const Budget& budget) {
  std::vector<PartialOp> members = generators;
  // drop duplicate generators
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size();)
      if (members[j].same_table(members[i]))
        members.erase(members.begin() + static_cast<std::ptrdiff_t>(j));
      else
        ++j;

  auto known = [&members](const PartialOp& op) {
    return std::any_of(members.begin(), members.end(),
                       [&op](const PartialOp& m) { return m.same_table(op); });
  };

  std::size_t frontier = 0;
  while (frontier < members.size()) {
    std::size_t upto = members.size();
    for (std::size_t fi = 0; fi < upto; ++fi) {
      const int fa = members[fi].arity();
      // every tuple of inner ops whose arities fit under the cap
      std::vector<std::size_t> pick(static_cast<std::size_t>(fa), 0);
      bool more = true;
      while (more) {
        bool fresh = false;
        int total = 0;
        for (std::size_t k = 0; k < pick.size(); ++k) {
          if (fi >= frontier || pick[k] >= frontier) fresh = true;
          total += members[pick[k]].arity();
        }
        if (fresh && (tier == Tier::Unary || total <= arity_cap)) {
          std::vector<PartialOp> inner;
          inner.reserve(pick.size());
          for (std::size_t k : pick) inner.push_back(members[k]);
          PartialOp comp = compose(members[fi], inner, budget);
          if (!known(comp)) {
            members.push_back(comp);
            if (members.size() > budget.closure_ops)
              throw BudgetError("closure exceeds op budget",
                                budget.closure_ops);
          }
        }
        // odometer over member indices < upto
        more = false;
        for (int k = static_cast<int>(pick.size()) - 1; k >= 0; --k) {
          if (++pick[static_cast<std::size_t>(k)] < upto) { more = true; break; }
          pick[static_cast<std::size_t>(k)] = 0;
        }
        if (pick.empty()) break;  // arity-0 impossible; guard anyway
      }
    }
    frontier = upto;
  }
  std::sort(members.begin(), members.end(),
            [](const PartialOp& a, const PartialOp& b) { return a.table_less(b); });
  return members;
}

}  // namespace

OpSystem generate_closure(const Carrier& carrier,
                          const std::vector<PartialOp>& generators, Tier tier,
                          int arity_cap, const Budget& budget) {
  if (tier != Tier::Unary) {
    int maxg = 0;
    for (const PartialOp& g : generators) maxg = std::max(maxg, g.arity());
    if (arity_cap < maxg)
      throw UsageError("arity cap " + std::to_string(arity_cap) +
                       " below max generator arity " + std::to_string(maxg));
  }
  OpSystem out(carrier, tier, Rep::Explicit,
               close_ops(generators, tier, arity_cap, budget));
  out.set_arity_capped(tier != Tier::Unary);
  return out;
}

OpSystem generate_closure(const std::vector<PartialOp>& generators, Tier tier,
                          int arity_cap, const Budget& budget) {
  std::vector<std::string> labels;
  if (!generators.empty())
    for (int i = 0; i < generators.front().carrier_size(); ++i)
      labels.push_back(std::to_string(i));
  return generate_closure(Carrier(std::move(labels)), generators, tier,
                          arity_cap, budget);
}

OpSystem materialize_unary(const OpSystem& sys, const Budget& budget) {
  if (sys.tier() != Tier::Unary)
    throw UsageError("materialize_unary: not a unary system");
  if (sys.rep() == Rep::Explicit) return sys;
  return OpSystem(sys.carrier(), Tier::Unary, Rep::Explicit,
                  close_ops(sys.ops(), Tier::Unary, 0, budget));
}

ClosureReport validate_system(const OpSystem& sys, const Budget& budget) {
  if (sys.rep() != Rep::Explicit)
    throw UsageError("validate_system: explicit representation required");
  ClosureReport report;
  for (int fi = 0; fi < sys.op_count(); ++fi) {
    const int fa = sys.op(fi).arity();
    std::vector<int> pick(static_cast<std::size_t>(fa), 0);
    while (true) {
      std::vector<PartialOp> inner;
      inner.reserve(pick.size());
      for (int k : pick) inner.push_back(sys.op(k));
      PartialOp comp = compose(sys.op(fi), inner, budget);
      if (!sys.admits(comp))
        report.violations.push_back(
            {fi, pick, std::move(comp)});
      bool more = false;
      for (int k = fa - 1; k >= 0; --k) {
        if (++pick[static_cast<std::size_t>(k)] < sys.op_count()) {
          more = true;
          break;
        }
        pick[static_cast<std::size_t>(k)] = 0;
      }
      if (!more) break;
    }
  }
  report.closed = report.violations.empty();
  return report;
}

}  // namespace ggt
