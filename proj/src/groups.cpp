#include "scottlab/groups.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "scottlab/formula_io.hpp"
#include "scottlab/normal_form.hpp"
#include "scottlab/sexpr.hpp"

namespace scottlab {

std::string to_string(GroupKind k) {
  switch (k) {
    case GroupKind::FiniteTable:
      return "finite-table";
    case GroupKind::Abelian:
      return "abelian";
    case GroupKind::Free:
      return "free";
    case GroupKind::Dihedral:
      return "dihedral";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Smith normal form

SmithForm smith_normal_form(std::vector<std::vector<std::int64_t>> a) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  for (const auto& r : a)
    if (r.size() != cols) throw GroupError("relation rows differ in length");
  SmithForm out;
  out.v.assign(cols, std::vector<std::int64_t>(cols, 0));
  for (std::size_t i = 0; i < cols; ++i) out.v[i][i] = 1;

  auto swap_cols = [&](std::size_t i, std::size_t j) {
    for (auto& r : a) std::swap(r[i], r[j]);
    for (auto& r : out.v) std::swap(r[i], r[j]);
  };
  // column j -= q * column t
  auto sub_col = [&](std::size_t j, std::size_t t, std::int64_t q) {
    for (auto& r : a) r[j] -= q * r[t];
    for (auto& r : out.v) r[j] -= q * r[t];
  };

  const std::size_t n = std::min(rows, cols);
  for (std::size_t t = 0; t < n; ++t) {
    while (true) {
      std::size_t pi = rows, pj = cols;
      for (std::size_t i = t; i < rows; ++i)
        for (std::size_t j = t; j < cols; ++j)
          if (a[i][j] != 0 && (pi == rows || std::llabs(a[i][j]) < std::llabs(a[pi][pj]))) {
            pi = i;
            pj = j;
          }
      if (pi == rows) break;
      std::swap(a[t], a[pi]);
      if (pj != t) swap_cols(t, pj);
      bool clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        std::int64_t q = a[i][t] / a[t][t];
        for (std::size_t j = t; j < cols; ++j) a[i][j] -= q * a[t][j];
        clean &= a[i][t] == 0;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        sub_col(j, t, a[t][j] / a[t][t]);
        clean &= a[t][j] == 0;
      }
      if (!clean) continue;
      std::size_t bad = rows;
      for (std::size_t i = t + 1; i < rows && bad == rows; ++i)
        for (std::size_t j = t + 1; j < cols; ++j)
          if (a[i][j] % a[t][t] != 0) {
            bad = i;
            break;
          }
      if (bad == rows) break;
      for (std::size_t j = t; j < cols; ++j) a[t][j] += a[bad][j];
    }
  }
  out.diagonal.assign(cols, 0);
  for (std::size_t t = 0; t < n; ++t) out.diagonal[t] = std::llabs(a[t][t]);
  return out;
}

// ---------------------------------------------------------------------------
// Oracles

namespace {

std::int64_t reduce_mod(std::int64_t x, std::int64_t m) {
  if (m == 0) return x;
  x %= m;
  return x < 0 ? x + m : x;
}

GroupElement letter_element(int l) { return {l}; }

}  // namespace

GroupOracle GroupOracle::finite_table(std::vector<std::vector<std::size_t>> table, std::vector<std::size_t> gens) {
  const std::size_t n = table.size();
  if (n == 0) throw GroupError("empty multiplication table");
  for (const auto& r : table) {
    if (r.size() != n) throw GroupError("multiplication table is not square");
    for (auto x : r)
      if (x >= n) throw GroupError("table entry out of range");
  }
  GroupOracle g;
  g.kind_ = GroupKind::FiniteTable;
  g.order_ = n;
  std::size_t unit = n;
  for (std::size_t e = 0; e < n && unit == n; ++e) {
    bool ok = true;
    for (std::size_t x = 0; x < n && ok; ++x) ok = table[e][x] == x && table[x][e] == x;
    if (ok) unit = e;
  }
  if (unit == n) throw GroupError("table has no identity");
  g.unit_ = unit;
  g.inverses_.assign(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y)
      if (table[x][y] == unit && table[y][x] == unit) g.inverses_[x] = y;
    if (g.inverses_[x] == n) throw GroupError("element " + std::to_string(x) + " has no inverse");
  }
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = 0; z < n; ++z)
        if (table[table[x][y]][z] != table[x][table[y][z]])
          throw GroupError("table is not associative at (" + std::to_string(x) + "," + std::to_string(y) + "," +
                           std::to_string(z) + ")");
  g.table_ = std::move(table);
  if (gens.empty()) throw GroupError("no generators");
  for (auto x : gens) {
    if (x >= n) throw GroupError("generator out of range");
    g.generators_.push_back({static_cast<std::int64_t>(x)});
  }
  g.perm_.resize(gens.size());
  std::iota(g.perm_.begin(), g.perm_.end(), 0);
  if (g.elements().size() != n) throw GroupError("generators do not generate the table");
  return g;
}

GroupOracle GroupOracle::cyclic(std::size_t n) {
  if (n == 0) throw GroupError("cyclic group of order 0");
  std::vector<std::vector<std::size_t>> t(n, std::vector<std::size_t>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t[i][j] = (i + j) % n;
  return finite_table(std::move(t), {n == 1 ? 0u : 1u});
}

GroupOracle GroupOracle::abelian(std::size_t gens, const std::vector<std::vector<std::int64_t>>& relations) {
  if (gens == 0) throw GroupError("no generators");
  for (const auto& r : relations)
    if (r.size() != gens) throw GroupError("relation length differs from generator count");
  GroupOracle g;
  g.kind_ = GroupKind::Abelian;
  g.input_generators_ = gens;
  g.relations_ = relations;
  SmithForm snf = smith_normal_form(relations.empty() ? std::vector<std::vector<std::int64_t>>{} : relations);
  if (relations.empty()) {
    snf.diagonal.assign(gens, 0);
    snf.v.assign(gens, std::vector<std::int64_t>(gens, 0));
    for (std::size_t i = 0; i < gens; ++i) snf.v[i][i] = 1;
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < gens; ++i) {
    if (snf.diagonal[i] == 1) continue;
    keep.push_back(i);
    g.moduli_.push_back(snf.diagonal[i]);
    if (snf.diagonal[i] == 0)
      ++g.free_rank_;
    else
      g.torsion_.push_back(snf.diagonal[i]);
  }
  if (g.free_rank_ == 0) {
    std::size_t order = 1;
    for (auto d : g.torsion_) order *= static_cast<std::size_t>(d);
    g.order_ = order;
  }
  for (std::size_t j = 0; j < gens; ++j) {
    GroupElement e;
    for (std::size_t c = 0; c < keep.size(); ++c) e.push_back(reduce_mod(snf.v[j][keep[c]], g.moduli_[c]));
    g.generators_.push_back(std::move(e));
  }
  g.perm_.resize(gens);
  std::iota(g.perm_.begin(), g.perm_.end(), 0);
  return g;
}

GroupOracle GroupOracle::abelian_invariants(std::size_t rank, const std::vector<std::int64_t>& torsion) {
  const std::size_t gens = rank + torsion.size();
  std::vector<std::vector<std::int64_t>> rel;
  for (std::size_t i = 0; i < torsion.size(); ++i) {
    if (torsion[i] < 1) throw GroupError("torsion entries must be positive");
    std::vector<std::int64_t> r(gens, 0);
    r[rank + i] = torsion[i];
    rel.push_back(std::move(r));
  }
  GroupOracle g = abelian(gens, rel);
  g.from_invariants_ = true;
  g.relations_ = {{static_cast<std::int64_t>(rank)}, torsion};
  return g;
}

GroupOracle GroupOracle::free_group(std::size_t rank) {
  if (rank == 0) throw GroupError("free group of rank 0");
  GroupOracle g;
  g.kind_ = GroupKind::Free;
  for (std::size_t j = 1; j <= rank; ++j) g.generators_.push_back(letter_element(static_cast<int>(j)));
  g.perm_.resize(rank);
  std::iota(g.perm_.begin(), g.perm_.end(), 0);
  return g;
}

GroupOracle GroupOracle::infinite_dihedral() {
  GroupOracle g;
  g.kind_ = GroupKind::Dihedral;
  g.generators_ = {{1, 0}, {0, 1}};
  g.perm_ = {0, 1};
  return g;
}

GroupElement GroupOracle::identity() const {
  switch (kind_) {
    case GroupKind::FiniteTable:
      return {static_cast<std::int64_t>(unit_)};
    case GroupKind::Abelian:
      return GroupElement(moduli_.size(), 0);
    case GroupKind::Free:
      return {};
    case GroupKind::Dihedral:
      return {0, 0};
  }
  return {};
}

GroupElement GroupOracle::multiply(const GroupElement& a, const GroupElement& b) const {
  switch (kind_) {
    case GroupKind::FiniteTable:
      return {static_cast<std::int64_t>(table_[static_cast<std::size_t>(a[0])][static_cast<std::size_t>(b[0])])};
    case GroupKind::Abelian: {
      GroupElement out(moduli_.size());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = reduce_mod(a[i] + b[i], moduli_[i]);
      return out;
    }
    case GroupKind::Free: {
      GroupElement out = a;
      std::size_t j = 0;
      while (j < b.size() && !out.empty() && out.back() == -b[j]) {
        out.pop_back();
        ++j;
      }
      out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(j), b.end());
      return out;
    }
    case GroupKind::Dihedral:
      // (a^k b^e)(a^m b^f) = a^(k + (-1)^e m) b^(e+f)
      return {a[0] + (a[1] ? -b[0] : b[0]), a[1] ^ b[1]};
  }
  return {};
}

GroupElement GroupOracle::inverse(const GroupElement& a) const {
  switch (kind_) {
    case GroupKind::FiniteTable:
      return {static_cast<std::int64_t>(inverses_[static_cast<std::size_t>(a[0])])};
    case GroupKind::Abelian: {
      GroupElement out(moduli_.size());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = reduce_mod(-a[i], moduli_[i]);
      return out;
    }
    case GroupKind::Free: {
      GroupElement out(a.rbegin(), a.rend());
      for (auto& l : out) l = -l;
      return out;
    }
    case GroupKind::Dihedral:
      return a[1] ? a : GroupElement{-a[0], 0};
  }
  return {};
}

GroupElement GroupOracle::power(const GroupElement& a, std::int64_t n) const {
  GroupElement base = n < 0 ? inverse(a) : a;
  GroupElement out = identity();
  for (std::int64_t i = 0; i < (n < 0 ? -n : n); ++i) out = multiply(out, base);
  return out;
}

GroupElement GroupOracle::eval(const Word& w) const { return eval(w, generators_); }

GroupElement GroupOracle::eval(const Word& w, const std::vector<GroupElement>& tuple) const {
  GroupElement out = identity();
  for (int l : w.letters) {
    const auto j = static_cast<std::size_t>(l > 0 ? l : -l);
    if (j == 0 || j > tuple.size()) throw GroupError("word letter " + std::to_string(l) + " out of range");
    out = multiply(out, l > 0 ? tuple[j - 1] : inverse(tuple[j - 1]));
  }
  return out;
}

namespace {

// Breadth-first ball over the letters of `tuple`, with word lengths.
std::pair<std::vector<GroupElement>, std::vector<std::size_t>> tuple_ball(const GroupOracle& g,
                                                                          const std::vector<GroupElement>& tuple,
                                                                          std::optional<std::size_t> radius) {
  std::vector<GroupElement> steps;
  for (const auto& t : tuple) {
    steps.push_back(t);
    steps.push_back(g.inverse(t));
  }
  std::vector<GroupElement> out{g.identity()};
  std::vector<std::size_t> len{0};
  std::set<GroupElement> seen{out.front()};
  std::size_t begin = 0;
  for (std::size_t r = 1; !radius || r <= *radius; ++r) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (const auto& s : steps) {
        auto x = g.multiply(out[i], s);
        if (seen.insert(x).second) {
          out.push_back(std::move(x));
          len.push_back(r);
        }
      }
    if (out.size() == end) break;
    begin = end;
  }
  return {std::move(out), std::move(len)};
}

}  // namespace

std::vector<GroupElement> GroupOracle::ball(std::size_t radius) const {
  return tuple_ball(*this, generators_, radius).first;
}

std::vector<std::size_t> GroupOracle::ball_lengths(std::size_t radius) const {
  return tuple_ball(*this, generators_, radius).second;
}

std::vector<GroupElement> GroupOracle::elements() const {
  if (!is_finite()) throw GroupError("elements() on an infinite group");
  return tuple_ball(*this, generators_, std::nullopt).first;
}

std::optional<std::string> GroupOracle::spot_check(std::size_t radius, std::size_t samples) const {
  const auto b = ball(radius);
  const auto e = identity();
  for (const auto& x : b) {
    if (multiply(e, x) != x || multiply(x, e) != x) return "identity fails at " + print_element(x);
    if (multiply(x, inverse(x)) != e || multiply(inverse(x), x) != e) return "inverse fails at " + print_element(x);
  }
  std::mt19937_64 rng(0x5eed);
  std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
  for (std::size_t s = 0; s < samples; ++s) {
    const auto& x = b[pick(rng)];
    const auto& y = b[pick(rng)];
    const auto& z = b[pick(rng)];
    if (multiply(multiply(x, y), z) != multiply(x, multiply(y, z)))
      return "associativity fails at " + print_element(x) + ", " + print_element(y) + ", " + print_element(z);
  }
  return std::nullopt;
}

GroupOracle GroupOracle::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != rank()) throw GroupError("permutation length differs from rank");
  std::vector<bool> hit(rank(), false);
  for (auto p : perm) {
    if (p >= rank() || hit[p]) throw GroupError("not a permutation");
    hit[p] = true;
  }
  GroupOracle g = *this;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    g.generators_[i] = generators_[perm[i]];
    g.perm_[i] = perm_[perm[i]];
  }
  return g;
}

std::string GroupOracle::print_element(const GroupElement& x) const {
  switch (kind_) {
    case GroupKind::FiniteTable:
      return std::to_string(x[0]);
    case GroupKind::Abelian: {
      std::string out = "(";
      for (std::size_t i = 0; i < x.size(); ++i) out += (i ? " " : "") + std::to_string(x[i]);
      return out + ")";
    }
    case GroupKind::Free: {
      Word w;
      for (auto l : x) w.letters.push_back(static_cast<int>(l));
      return to_string(w);
    }
    case GroupKind::Dihedral: {
      std::string out = x[0] == 0 && !x[1] ? "1" : "";
      if (x[0] != 0) out = "a^" + std::to_string(x[0]);
      if (x[1]) out += out.empty() ? "b" : " b";
      return out;
    }
  }
  return "?";
}

std::string GroupOracle::describe() const {
  switch (kind_) {
    case GroupKind::FiniteTable:
      return "finite-table of order " + std::to_string(*order_) + ", " + std::to_string(rank()) + " generators";
    case GroupKind::Abelian: {
      std::string out;
      if (free_rank_) out = "Z^" + std::to_string(free_rank_);
      for (auto d : torsion_) out += (out.empty() ? "Z/" : " + Z/") + std::to_string(d);
      if (out.empty()) out = "trivial";
      return "abelian " + out + ", " + std::to_string(rank()) + " generators";
    }
    case GroupKind::Free:
      return "free of rank " + std::to_string(rank());
    case GroupKind::Dihedral:
      return "infinite dihedral";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::int64_t int_of(const Sexp& s) {
  if (!s.is_atom()) s.fail("expected an integer");
  try {
    std::size_t used = 0;
    long long v = std::stoll(s.atom, &used);
    if (used != s.atom.size()) s.fail("expected an integer");
    return v;
  } catch (const std::logic_error&) {
    s.fail("expected an integer");
  }
}

std::size_t nat_of(const Sexp& s) {
  auto v = int_of(s);
  if (v < 0) s.fail("expected a natural number");
  return static_cast<std::size_t>(v);
}

std::vector<std::int64_t> ints_of(const Sexp& list, std::size_t from) {
  std::vector<std::int64_t> out;
  for (std::size_t i = from; i < list.items.size(); ++i) out.push_back(int_of(list.items[i]));
  return out;
}

std::string join(const std::vector<std::int64_t>& xs) {
  std::string out;
  for (auto x : xs) out += " " + std::to_string(x);
  return out;
}

}  // namespace

GroupOracle parse_group(std::string_view text) {
  Sexp top = read_sexp(text);
  if (top.head() != "group" || top.items.size() < 2 || !top.items[1].is_atom()) top.fail("expected (group KIND ...)");
  const std::string kind = top.items[1].atom;
  std::map<std::string, const Sexp*> fields;
  for (std::size_t i = 2; i < top.items.size(); ++i) {
    const auto& f = top.items[i];
    auto h = f.head();
    if (h.empty()) f.fail("expected a (field ...) clause");
    if (!fields.emplace(h, &f).second) f.fail("duplicate " + h);
  }
  auto need = [&](const std::string& name) -> const Sexp& {
    auto it = fields.find(name);
    if (it == fields.end()) top.fail("missing (" + name + " ...)");
    return *it->second;
  };
  auto single = [&](const std::string& name) {
    const Sexp& s = need(name);
    if (s.items.size() != 2) s.fail("expected (" + name + " N)");
    return nat_of(s.items[1]);
  };
  auto allow = [&](std::initializer_list<std::string> names) {
    for (const auto& [h, f] : fields)
      if (h != "permute" && std::find(names.begin(), names.end(), h) == names.end())
        f->fail("unexpected (" + h + " ...) for " + kind);
  };

  std::optional<GroupOracle> g;
  try {
    if (kind == "finite-table") {
      allow({"table", "generators"});
      std::vector<std::vector<std::size_t>> table;
      const Sexp& t = need("table");
      for (std::size_t i = 1; i < t.items.size(); ++i) {
        const Sexp& row = t.items[i];
        if (!row.is_list) row.fail("expected a table row");
        std::vector<std::size_t> r;
        for (const auto& x : row.items) r.push_back(nat_of(x));
        table.push_back(std::move(r));
      }
      std::vector<std::size_t> gens;
      for (auto x : ints_of(need("generators"), 1)) {
        if (x < 0) need("generators").fail("negative generator");
        gens.push_back(static_cast<std::size_t>(x));
      }
      g = GroupOracle::finite_table(std::move(table), std::move(gens));
    } else if (kind == "abelian" || kind == "fg-abelian") {
      if (fields.contains("invariants")) {
        // One cyclic factor per entry, in the listed order; 0 stands for Z.
        allow({"invariants"});
        auto inv = ints_of(need("invariants"), 1);
        std::vector<std::vector<std::int64_t>> rel;
        for (std::size_t i = 0; i < inv.size(); ++i) {
          if (inv[i] < 0) need("invariants").fail("negative invariant factor");
          if (inv[i] == 0) continue;
          rel.emplace_back(inv.size(), 0);
          rel.back()[i] = inv[i];
        }
        g = GroupOracle::abelian(inv.size(), rel);
      } else if (fields.contains("relations") || fields.contains("generators")) {
        allow({"generators", "relations"});
        std::vector<std::vector<std::int64_t>> rel;
        if (fields.contains("relations")) {
          const Sexp& r = need("relations");
          for (std::size_t i = 1; i < r.items.size(); ++i) {
            if (!r.items[i].is_list) r.items[i].fail("expected a relation row");
            rel.push_back(ints_of(r.items[i], 0));
          }
        }
        g = GroupOracle::abelian(single("generators"), rel);
      } else {
        allow({"rank", "torsion"});
        std::vector<std::int64_t> torsion;
        if (fields.contains("torsion")) torsion = ints_of(need("torsion"), 1);
        g = GroupOracle::abelian_invariants(fields.contains("rank") ? single("rank") : 0, torsion);
      }
    } else if (kind == "free") {
      allow({"rank"});
      g = GroupOracle::free_group(single("rank"));
    } else if (kind == "dihedral") {
      allow({});
      g = GroupOracle::infinite_dihedral();
    } else {
      top.items[1].fail("unknown group kind '" + kind + "'");
    }
    if (fields.contains("permute")) {
      std::vector<std::size_t> perm;
      for (auto x : ints_of(need("permute"), 1)) {
        if (x < 0) need("permute").fail("negative index");
        perm.push_back(static_cast<std::size_t>(x));
      }
      g = g->permuted(perm);
    }
  } catch (const GroupError& e) {
    top.fail(e.what());
  }
  return *g;
}

std::string print_group(const GroupOracle& g) {
  std::string out = "(group " + to_string(g.kind());
  switch (g.kind()) {
    case GroupKind::FiniteTable: {
      // Generators are printed in their current order; no permute clause.
      out += "\n  (table";
      for (const auto& row : g.table_) {
        std::vector<std::int64_t> r(row.begin(), row.end());
        out += "\n    (" + join(r).substr(1) + ")";
      }
      out += ")\n  (generators";
      for (const auto& x : g.generators()) out += " " + std::to_string(x[0]);
      return out + "))";
    }
    case GroupKind::Abelian:
      if (g.from_invariants_) {
        out += " (rank " + std::to_string(g.relations_[0][0]) + ")";
        if (!g.relations_[1].empty()) out += " (torsion" + join(g.relations_[1]) + ")";
      } else {
        out += " (generators " + std::to_string(g.input_generators_) + ")";
        if (!g.relations_.empty()) {
          out += " (relations";
          for (const auto& r : g.relations_) out += " (" + join(r).substr(1) + ")";
          out += ")";
        }
      }
      break;
    case GroupKind::Free:
      out += " (rank " + std::to_string(g.rank()) + ")";
      break;
    case GroupKind::Dihedral:
      break;
  }
  bool identity = true;
  for (std::size_t i = 0; i < g.perm_.size(); ++i) identity &= g.perm_[i] == i;
  if (!identity) {
    std::vector<std::int64_t> p(g.perm_.begin(), g.perm_.end());
    out += " (permute" + join(p) + ")";
  }
  return out + ")";
}

// ---------------------------------------------------------------------------
// Ball semantics

BallModel::BallModel(const GroupOracle& g, std::size_t radius) : g_(g) {
  for (const auto& x : g.is_finite() ? g.elements() : g.ball(radius)) domain_.push_back(intern(x));
}

BallModel::Element BallModel::intern(const GroupElement& x) const {
  auto [it, fresh] = ids_.try_emplace(x, static_cast<Element>(elements_.size()));
  if (fresh) {
    elements_.push_back(x);
    inverses_.emplace_back();
    products_.emplace_back();
  }
  return it->second;
}

BallModel::Element BallModel::constant(Symbol c) const {
  if (c == e_) return intern(g_.identity());
  throw EvalError("unknown group constant " + c.name());
}

BallModel::Element BallModel::apply(Symbol fn, std::span<const Element> args) const {
  if (fn == mul_ && args.size() == 2) {
    auto& row = products_[args[0]];
    if (args[1] < row.size() && row[args[1]] != kNone) return row[args[1]];
    Element r = intern(g_.multiply(elements_[args[0]], elements_[args[1]]));
    auto& out = products_[args[0]];  // intern may have grown products_
    if (out.size() <= args[1]) out.resize(elements_.size(), kNone);
    out[args[1]] = r;
    return r;
  }
  if (fn == inv_ && args.size() == 1) {
    if (auto r = inverses_[args[0]]) return *r;
    Element r = intern(g_.inverse(elements_[args[0]]));
    inverses_[args[0]] = r;
    return r;
  }
  throw EvalError("unknown group function " + fn.name() + "/" + std::to_string(args.size()));
}

bool BallModel::holds(Symbol rel, std::span<const Element>) const {
  throw EvalError("groups have no relation " + rel.name());
}

std::string to_string(const GroupVerdict& v) {
  if (v.value == Verdict3::True) return "True";
  if (v.value == Verdict3::False) return "False";
  return "UnknownAtBound(radius=" + std::to_string(v.radius) + ", budget=" + std::to_string(v.budget) + ")";
}

GroupVerdict bounded_model_check(const GroupOracle& g, const Formula& f, std::size_t radius, std::size_t budget,
                                 const GroupAssignment& free) {
  BallModel model(g, radius);
  Evaluator<BallModel> ev(model, budget, true);
  Env<BallModel::Element> env;
  for (const auto& [v, x] : free) env.vars[v] = model.intern(x);
  return {ev.eval(f, env), radius, budget};
}

// ---------------------------------------------------------------------------
// Sentences

std::vector<Symbol> group_vars(std::size_t k, std::string_view base) {
  std::vector<Symbol> out;
  for (std::size_t i = 1; i <= k; ++i) out.emplace_back(std::string(base) + std::to_string(i));
  return out;
}

namespace {

std::vector<Symbol> vars_or_default(const std::vector<Symbol>& vars, std::size_t k) {
  if (vars.empty()) return group_vars(k);
  if (vars.size() != k) throw GroupError("expected " + std::to_string(k) + " variables");
  return vars;
}

Formula and_schema(std::string family, std::vector<Symbol> args, bool negated) {
  return Formula::schema(Kind::And, Schema{std::move(family), std::move(args), {}, std::nullopt,
                                           Classification{Side::Both, Ordinal::finite(0)}, negated, {}});
}

// A symbol named base unless it clashes, else a fresh variant.
Symbol free_name(std::string_view base, const std::vector<Symbol>& taken) {
  std::set<Symbol> avoid(taken.begin(), taken.end());
  Symbol s{base};
  return avoid.contains(s) ? fresh_variable(s, avoid) : s;
}

}  // namespace

Formula relator_schema(const GroupOracle& g, const std::vector<GroupElement>& a, std::size_t length,
                       const std::vector<Symbol>& vars) {
  if (a.empty()) throw GroupError("relator schema needs a nonempty tuple");
  auto xs = vars_or_default(vars, a.size());
  const auto e = g.identity();
  std::vector<Formula> forms;
  for (const auto& w : reduced_words_up_to(a.size(), length)) {
    if (w.letters.empty()) continue;
    forms.push_back(Formula::equals(word_term(w, xs), identity_term(), g.eval(w, a) == e));
  }
  return Formula::schema(Kind::And, Schema{"table", xs, std::move(forms), std::nullopt,
                                           Classification{Side::Both, Ordinal::finite(0)}, false, {}});
}

Formula generation_clause(const std::vector<Symbol>& vars, Symbol y) {
  std::vector<Symbol> args = vars;
  args.push_back(y);
  return Formula::forall({y}, Formula::schema(Kind::Or, Schema{"words", std::move(args), {}, std::nullopt,
                                                               Classification{Side::Both, Ordinal::finite(0)}, false, {}}));
}

Formula sigma3_scott(const GroupOracle& g, std::size_t length) {
  auto xs = group_vars(g.rank());
  Symbol y = free_name("y", xs);
  return Formula::exists(xs, Formula::conj({relator_schema(g, g.generators(), length, xs), generation_clause(xs, y)}));
}

HoReport ho_d_sigma2(const GroupOracle& g, const Formula& phi, std::size_t length, std::size_t radius,
                     std::size_t budget, const std::vector<Symbol>& vars) {
  auto xs = vars_or_default(vars, g.rank());
  for (const auto& v : free_vars(phi))
    if (std::find(xs.begin(), xs.end(), v) == xs.end()) throw GroupError("phi has extra free variable " + v.name());
  GroupAssignment at;
  for (std::size_t i = 0; i < xs.size(); ++i) at[xs[i]] = g.generators()[i];
  HoReport r;
  r.phi_at_generators = bounded_model_check(g, phi, radius, budget, at);
  if (r.phi_at_generators.is_false()) throw GroupError("phi is false at the generating tuple");
  r.hypothesis = "every tuple satisfying phi generates the group (asserted by the caller, not checked)";
  Symbol y = free_name("y", xs);
  Formula sigma = Formula::exists(xs, sigma_and(phi, relator_schema(g, g.generators(), length, xs)));
  Formula pi = forall_implies(xs, phi, generation_clause(xs, y));
  r.sentence = Formula::conj({sigma, pi});
  return r;
}

OrbitExtraction extract_pi1_orbit(const GroupOracle& g, const Formula& sigma2, const std::vector<GroupElement>& a,
                                  std::size_t radius, std::size_t budget, const std::vector<Symbol>& vars) {
  auto xs = vars_or_default(vars, a.size());
  std::vector<Formula> disjuncts;
  if (sigma2.kind() == Kind::Or && !sigma2.is_schema())
    disjuncts = sigma2.children();
  else
    disjuncts = {sigma2};
  const auto ball = g.ball(radius);
  for (std::size_t i = 0; i < disjuncts.size(); ++i) {
    std::vector<Symbol> us;
    Formula phi = disjuncts[i];
    while (phi.kind() == Kind::Exists) {
      us.insert(us.end(), phi.vars().begin(), phi.vars().end());
      phi = phi.body();
    }
    if (!fits_pi(phi, Ordinal::finite(1))) throw GroupError("disjunct " + std::to_string(i) + " is not Pi_1 under its block");
    for (const auto& u : us)
      if (std::find(xs.begin(), xs.end(), u) != xs.end()) throw GroupError("witness variable clashes with x");
    GroupAssignment env;
    for (std::size_t j = 0; j < xs.size(); ++j) env[xs[j]] = a[j];
    // odometer over ball^|u|
    std::vector<std::size_t> at(us.size(), 0);
    while (true) {
      for (std::size_t j = 0; j < us.size(); ++j) env[us[j]] = ball[at[j]];
      if (bounded_model_check(g, phi, radius, budget, env).is_true()) {
        OrbitExtraction out;
        out.disjunct = i;
        std::map<GroupElement, Word> spelled;
        for (const auto& w : reduced_words_up_to(a.size(), radius)) spelled.try_emplace(g.eval(w, a), w);
        Assignment sub;
        for (std::size_t j = 0; j < us.size(); ++j) {
          const auto& b = ball[at[j]];
          auto it = spelled.find(b);
          if (it == spelled.end())
            throw GroupError("witness " + g.print_element(b) + " is not a word of length <= " + std::to_string(radius) +
                             " in the tuple; raise the radius");
          out.witness.push_back(b);
          out.words.push_back(it->second);
          sub[us[j]] = word_term(it->second, xs);
        }
        out.formula = substitute(phi, sub);
        return out;
      }
      std::size_t j = us.size();
      while (j > 0 && at[j - 1] + 1 == ball.size()) at[--j] = 0;
      if (j == 0) break;
      ++at[j - 1];
    }
  }
  throw GroupError("no disjunct has a witness in the ball of radius " + std::to_string(radius) +
                   "; raise the radius or budget");
}

std::optional<Formula> documented_pi1_orbit(const GroupOracle& g) {
  auto xs = group_vars(g.rank());
  const Symbol z("z");
  auto var = [](Symbol s) { return Term::var(s); };
  auto nondiv = [&](std::vector<Symbol> args) {
    args.push_back(z);
    return Formula::forall({z}, and_schema("nondiv", std::move(args), true));
  };
  if (g.kind() == GroupKind::Abelian && g.torsion().empty() && g.free_rank() == 1 && g.rank() == 1) {
    // x != e, and x^m is never z^n for 0 < m < n
    return Formula::conj({Formula::equals(var(xs[0]), identity_term(), false), nondiv(xs)});
  }
  if (g.kind() == GroupKind::Abelian && g.torsion().empty() && g.free_rank() == 2 && g.rank() == 2) {
    // commuting, independent, and no z^n lands in the span below n
    return Formula::conj({Formula::equals(mul_term(var(xs[0]), var(xs[1])), mul_term(var(xs[1]), var(xs[0]))),
                          and_schema("combos", xs, true), nondiv(xs)});
  }
  if (g.kind() == GroupKind::Dihedral) {
    const GroupElement a{1, 0}, b{0, 1};
    std::size_t ia;
    if (g.generators()[0] == a && g.generators()[1] == b)
      ia = 0;
    else if (g.generators()[0] == b && g.generators()[1] == a)
      ia = 1;
    else
      return std::nullopt;
    const Symbol x = xs[ia], y = xs[1 - ia];
    // y an involution inverting x, x of infinite order and not a proper power
    return Formula::conj({Formula::equals(mul_term(var(y), var(y)), identity_term()),
                          Formula::equals(var(y), identity_term(), false),
                          Formula::equals(mul_term(mul_term(var(y), var(x)), var(y)), inv_term(var(x))),
                          and_schema("combos", {x}, true), nondiv({x})});
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Self-reflection search

std::vector<BatteryItem> existential_battery(std::size_t k, std::size_t length) {
  const Symbol y = free_name("y", group_vars(k));
  std::vector<Symbol> letters{y};
  for (const auto& x : group_vars(k)) letters.push_back(x);
  std::vector<Word> lhs;
  for (const auto& w : reduced_words_up_to(k + 1, length))
    if (std::any_of(w.letters.begin(), w.letters.end(), [](int l) { return l == 1 || l == -1; })) lhs.push_back(w);
  std::vector<Word> rhs = reduced_words_up_to(k, length);
  for (auto& w : rhs)
    for (auto& l : w.letters) l += l > 0 ? 1 : -1;
  std::vector<BatteryItem> out;
  for (std::size_t total = 1; total <= 2 * length; ++total)
    for (const auto& u : lhs)
      for (const auto& v : rhs) {
        if (u.length() + v.length() != total) continue;
        for (bool eq : {true, false})
          out.push_back({u, v, eq,
                         Formula::exists({y}, Formula::equals(word_term(u, letters), word_term(v, letters), eq))});
      }
  return out;
}

CandidateCheck check_candidate(const GroupOracle& g, const std::vector<GroupElement>& a,
                               const std::vector<GroupElement>& b, std::size_t radius, std::size_t length,
                               const std::vector<BatteryItem>& battery) {
  if (a.size() != b.size()) throw GroupError("candidate length differs from the tuple");
  CandidateCheck c;
  c.tuple = b;
  const auto e = g.identity();
  c.relators = true;
  for (const auto& w : reduced_words_up_to(a.size(), length))
    if ((g.eval(w, a) == e) != (g.eval(w, b) == e)) {
      c.relators = false;
      break;
    }
  const auto h = tuple_ball(g, b, radius).first;
  const std::set<GroupElement> in_h(h.begin(), h.end());
  c.generates = std::all_of(g.generators().begin(), g.generators().end(),
                            [&](const GroupElement& x) { return in_h.contains(x); });
  if (!c.relators || c.generates) return c;
  const auto ys = g.is_finite() ? g.elements() : g.ball(radius);
  auto holds_over = [&](const BatteryItem& item, const std::vector<GroupElement>& range) {
    std::vector<GroupElement> tuple{GroupElement{}};
    tuple.insert(tuple.end(), b.begin(), b.end());
    for (const auto& y : range) {
      tuple[0] = y;
      if ((g.eval(item.lhs, tuple) == g.eval(item.rhs, tuple)) == item.equal) return true;
    }
    return false;
  };
  for (std::size_t i = 0; i < battery.size(); ++i)
    if (holds_over(battery[i], ys) && !holds_over(battery[i], h)) c.failed_items.push_back(i);
  return c;
}

SelfReflectiveResult self_reflective_search(const GroupOracle& g, const std::vector<GroupElement>& a,
                                            std::size_t radius, std::size_t length) {
  SelfReflectiveResult r;
  r.radius = radius;
  r.length = length;
  if (g.is_finite()) {
    r.notes.push_back("finite group of order " + std::to_string(*g.order()) +
                      ": a proper subgroup is smaller, so it is never isomorphic to the group; no search needed");
    return r;
  }
  r.battery = existential_battery(a.size(), length);
  r.notes.push_back("existential battery: one quantifier, words of length <= " + std::to_string(length) + ", " +
                    std::to_string(r.battery.size()) + " items");
  r.notes.push_back("no witness up to these bounds is evidence only, not a proof of non-self-reflectivity");
  const auto ball = g.ball(radius);
  std::vector<std::size_t> at(a.size(), 0);
  while (true) {
    std::vector<GroupElement> b;
    for (auto i : at) b.push_back(ball[i]);
    ++r.candidates;
    auto c = check_candidate(g, a, b, radius, length, r.battery);
    if (c.is_witness()) {
      r.witness_found = true;
      r.witness = b;
      return r;
    }
    if (c.relators && !c.generates) r.rejected.push_back(std::move(c));
    std::size_t j = at.size();
    while (j > 0 && at[j - 1] + 1 == ball.size()) at[--j] = 0;
    if (j == 0) break;
    ++at[j - 1];
  }
  return r;
}

}  // namespace scottlab
