#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "graphck/graph.hpp"
#include "graphck/graph_analysis.hpp"
#include "graphck/interval.hpp"

namespace graphck {

using Index = std::int64_t;
using IndexSet = std::vector<Index>;                      // sorted, unique
using IndexMap = std::vector<std::pair<Index, Index>>;    // sorted by first

class BranchingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Branching system over a graph: either the unit-interval bundle model
/// (Lebesgue measure on (0,1] per label) or the discrete counting-measure
/// model on a finite index set. Families {R_e}, {D_v} and bijections f_e;
/// derivative data is closed-form (identically 1 in the discrete model).
/// Declared truncation tails mark the unmaterialized part of an infinite
/// object so the verifier can stay exact without false failures.
struct BranchingSystem {
  enum class Model { Bundle, Discrete } model = Model::Bundle;
  Graph graph;

  // Bundle model
  std::map<std::string, Bundle> R;            // edge -> R_e
  std::map<std::string, Bundle> D;            // vertex -> D_v
  std::map<std::string, PiecewiseMap> maps;   // edge -> f_e
  std::map<std::string, Bundle> range_tails;  // edge -> unmodeled part of R_e

  // Discrete model
  IndexSet lambda;
  std::map<std::string, IndexSet> Rd, Dd;
  std::map<std::string, IndexMap> fd;
  std::map<std::string, IndexSet> domain_tails;  // edge -> unmodeled part of D_{r(e)}

  std::string note;

  json to_json() const {
    json doc;
    doc["model"] = model == Model::Bundle ? "bundle" : "discrete";
    doc["graph"] = graph.to_json();
    if (!note.empty()) doc["note"] = note;
    if (model == Model::Bundle) {
      json r = json::object(), d = json::object(), m = json::object(), t = json::object();
      for (const auto& [e, b] : R) r[e] = bundle_to_json(b);
      for (const auto& [v, b] : D) d[v] = bundle_to_json(b);
      for (const auto& [e, f] : maps) m[e] = f.to_json();
      for (const auto& [e, b] : range_tails)
        if (!b.empty()) t[e] = bundle_to_json(b);
      doc["R"] = r;
      doc["D"] = d;
      doc["maps"] = m;
      if (!t.empty()) doc["range_tails"] = t;
    } else {
      doc["lambda"] = lambda;
      json r = json::object(), d = json::object(), m = json::object(), t = json::object();
      for (const auto& [e, s] : Rd) r[e] = s;
      for (const auto& [v, s] : Dd) d[v] = s;
      for (const auto& [e, f] : fd) {
        json pairs = json::array();
        for (const auto& [a, b] : f) pairs.push_back({a, b});
        m[e] = pairs;
      }
      for (const auto& [e, s] : domain_tails)
        if (!s.empty()) t[e] = s;
      doc["R"] = r;
      doc["D"] = d;
      doc["maps"] = m;
      if (!t.empty()) doc["domain_tails"] = t;
    }
    return doc;
  }

  static BranchingSystem from_json(const json& doc) {
    BranchingSystem b;
    b.graph = Graph::from_json(doc.at("graph"));
    b.note = doc.value("note", "");
    if (doc.at("model") == "bundle") {
      b.model = Model::Bundle;
      for (const auto& [e, arr] : doc.at("R").items()) b.R[e] = bundle_from_json(arr);
      for (const auto& [v, arr] : doc.at("D").items()) b.D[v] = bundle_from_json(arr);
      for (const auto& [e, arr] : doc.at("maps").items()) b.maps[e] = PiecewiseMap::from_json(arr);
      if (doc.contains("range_tails"))
        for (const auto& [e, arr] : doc.at("range_tails").items()) b.range_tails[e] = bundle_from_json(arr);
    } else {
      b.model = Model::Discrete;
      b.lambda = doc.at("lambda").get<IndexSet>();
      for (const auto& [e, arr] : doc.at("R").items()) b.Rd[e] = arr.get<IndexSet>();
      for (const auto& [v, arr] : doc.at("D").items()) b.Dd[v] = arr.get<IndexSet>();
      for (const auto& [e, arr] : doc.at("maps").items()) {
        IndexMap m;
        for (const auto& p : arr) m.push_back({p.at(0).get<Index>(), p.at(1).get<Index>()});
        std::sort(m.begin(), m.end());
        b.fd[e] = m;
      }
      if (doc.contains("domain_tails"))
        for (const auto& [e, arr] : doc.at("domain_tails").items()) b.domain_tails[e] = arr.get<IndexSet>();
    }
    return b;
  }
};

/// The unit-interval branching system that exists for every row-countable
/// graph: R_e = (0,1]x{e}; D_v = (0,1]x{v} at sinks, (0,1] x s^{-1}(v)
/// otherwise; f_d relabels (sink range), splits (0,1] into N equal parts
/// (finite range), or into (1/(j+1), 1/j] (truncated infinite range, with
/// the tail (0, 1/(M+1)] recorded as unmodeled).
inline BranchingSystem standard_construction(const Graph& g) {
  BranchingSystem b;
  b.model = BranchingSystem::Model::Bundle;
  b.graph = g;
  for (const auto& e : g.edges()) b.R[e.id] = {LInterval::full(e.id)};
  for (const auto& v : g.vertices()) {
    if (g.is_sink(v)) {
      b.D[v] = {LInterval::full(v)};
    } else {
      Bundle d;
      for (const Edge* e : g.out_edges(v)) d.push_back(LInterval::full(e->id));
      b.D[v] = normalize_bundle(d);
    }
  }
  for (const auto& d : g.edges()) {
    const std::string& v = d.dst;  // r(d)
    PiecewiseMap f;
    if (g.is_sink(v)) {
      f.pieces.push_back(PieceMap::relabel(v, d.id));
    } else if (!g.has_family(v)) {
      auto out = g.out_edges(v);
      Rational n(static_cast<std::int64_t>(out.size()));
      for (std::size_t j = 1; j <= out.size(); ++j) {
        LInterval target(d.id, Rational(static_cast<std::int64_t>(j - 1)) / n,
                         Rational(static_cast<std::int64_t>(j)) / n);
        f.pieces.push_back(PieceMap::affine(LInterval::full(out[j - 1]->id), target));
      }
    } else {
      auto out = g.out_edges_enumeration(v);
      for (std::size_t j = 1; j <= out.size(); ++j) {
        LInterval target(d.id, make_rational(1, static_cast<std::int64_t>(j + 1)),
                         make_rational(1, static_cast<std::int64_t>(j)));
        f.pieces.push_back(PieceMap::affine(LInterval::full(out[j - 1]->id), target));
      }
      b.range_tails[d.id] = {
          LInterval(d.id, Rational(0), make_rational(1, static_cast<std::int64_t>(out.size() + 1)))};
    }
    b.maps[d.id] = f.normalized();
  }
  return b;
}

namespace detail {

/// Checks that the edge word is a directed cycle of g without exits and
/// returns the cycle vertices.
inline std::vector<std::string> validate_exitless_cycle(const Graph& g, const DirectedCycle& cycle) {
  if (cycle.edges.empty()) throw BranchingError("cycle system: empty cycle");
  std::vector<std::string> verts;
  for (std::size_t i = 0; i < cycle.edges.size(); ++i) {
    const Edge& e = g.edge(cycle.edges[i]);
    const Edge& next = g.edge(cycle.edges[(i + 1) % cycle.edges.size()]);
    if (e.dst != next.src)
      throw BranchingError("cycle system: edges " + e.id + " and " + next.id + " are not composable");
    verts.push_back(e.src);
  }
  std::set<std::string> vset(verts.begin(), verts.end());
  if (vset.size() != verts.size()) throw BranchingError("cycle system: cycle is not elementary");
  for (const auto& v : vset) {
    if (g.has_family(v))
      throw BranchingError("cycle system: cycle has an exit (infinite family at " + v + ")");
    auto out = g.out_edges(v);
    if (out.size() != 1)
      throw BranchingError("cycle system: cycle has an exit at vertex " + v);
  }
  return verts;
}

}  // namespace detail

/// Modified system along an exitless cycle for which the cycle word acts as
/// the vertex projection: sqrt on the first edge, square on the last,
/// relabelings between. For a loop the single map stays the relabeling
/// identity (degenerate one-edge case of the construction).
inline BranchingSystem cycle_collapse_system(const Graph& g, const DirectedCycle& cycle) {
  detail::validate_exitless_cycle(g, cycle);
  BranchingSystem b = standard_construction(g);
  std::size_t n = cycle.edges.size();
  if (n >= 2) {
    auto src_label = [&](std::size_t i) { return cycle.edges[(i + 1) % n]; };
    b.maps[cycle.edges[0]] = PiecewiseMap{
        {PieceMap::power(src_label(0), cycle.edges[0], make_rational(1, 2))}};
    b.maps[cycle.edges[n - 1]] = PiecewiseMap{
        {PieceMap::power(src_label(n - 1), cycle.edges[n - 1], Rational(2))}};
  }
  b.note = n == 1 ? "cycle-collapse (one-edge extension: identity map)" : "cycle-collapse";
  return b;
}

/// Modified system along an exitless cycle for which the cycle word differs
/// from the vertex projection: sqrt on both the first and last edge (the
/// single edge, for a loop).
inline BranchingSystem cycle_separating_system(const Graph& g, const DirectedCycle& cycle) {
  detail::validate_exitless_cycle(g, cycle);
  BranchingSystem b = standard_construction(g);
  std::size_t n = cycle.edges.size();
  auto src_label = [&](std::size_t i) { return cycle.edges[(i + 1) % n]; };
  b.maps[cycle.edges[0]] =
      PiecewiseMap{{PieceMap::power(src_label(0), cycle.edges[0], make_rational(1, 2))}};
  if (n >= 2)
    b.maps[cycle.edges[n - 1]] =
        PiecewiseMap{{PieceMap::power(src_label(n - 1), cycle.edges[n - 1], make_rational(1, 2))}};
  b.note = n == 1 ? "cycle-separate (one-edge extension)" : "cycle-separate";
  return b;
}

/// Composite map f_{e_1} o ... o f_{e_n} of a cycle's modified maps. Its
/// inverse is the substitution the representation applies to arguments.
inline PiecewiseMap cycle_composite(const BranchingSystem& b, const DirectedCycle& cycle) {
  PiecewiseMap acc = b.maps.at(cycle.edges.back());
  for (std::size_t i = cycle.edges.size() - 1; i-- > 0;) acc = compose(b.maps.at(cycle.edges[i]), acc);
  return acc;
}

struct AxiomCheck {
  std::string id;
  std::string status;  // "pass" | "fail" | "skipped"
  std::string detail;
};

struct AxiomReport {
  bool pass = true;
  std::vector<AxiomCheck> checks;

  void add(const std::string& id, bool ok, const std::string& detail = "") {
    checks.push_back({id, ok ? "pass" : "fail", detail});
    if (!ok) pass = false;
  }
  void skip(const std::string& id, const std::string& detail) {
    checks.push_back({id, "skipped", detail});
  }

  json to_json() const {
    json doc;
    doc["pass"] = pass;
    doc["checks"] = json::array();
    for (const auto& c : checks) {
      json j = {{"id", c.id}, {"status", c.status}};
      if (!c.detail.empty()) j["detail"] = c.detail;
      doc["checks"].push_back(j);
    }
    return doc;
  }
};

namespace detail {

inline bool sorted_unique(const IndexSet& s) {
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (s[i] >= s[i + 1]) return false;
  return true;
}
inline bool subset_of(const IndexSet& a, const IndexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}
inline IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet r;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}
inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet r;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}
inline IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet r;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

}  // namespace detail

/// Exact verification of the six branching-system conditions. In this model
/// every "mu-a.e." statement is an exact statement: half-open intervals
/// never share endpoints and the counting measure has no null sets.
/// Declared truncation tails are exempted where they must be and reported.
inline AxiomReport verify_axioms(const BranchingSystem& b, const Graph& g) {
  AxiomReport rep;

  if (b.model == BranchingSystem::Model::Bundle) {
    // 1. {R_e} pairwise disjoint
    {
      std::vector<std::pair<LInterval, std::string>> all;
      for (const auto& [e, bun] : b.R)
        for (const auto& iv : bun) all.push_back({iv, e});
      std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      bool ok = true;
      std::string witness;
      for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        const auto& [a, ea] = all[i];
        const auto& [c, ec] = all[i + 1];
        if (a.label == c.label && c.lo < a.hi && ea != ec) {
          ok = false;
          witness = "R_" + ea + " meets R_" + ec + " on " + intersect(a, c)->str();
          break;
        }
      }
      rep.add("axiom1-ranges-disjoint", ok, witness);
    }
    // 2. {D_v} pairwise disjoint
    {
      std::vector<std::pair<LInterval, std::string>> all;
      for (const auto& [v, bun] : b.D)
        for (const auto& iv : bun) all.push_back({iv, v});
      std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      bool ok = true;
      std::string witness;
      for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        const auto& [a, va] = all[i];
        const auto& [c, vc] = all[i + 1];
        if (a.label == c.label && c.lo < a.hi && va != vc) {
          ok = false;
          witness = "D_" + va + " meets D_" + vc + " on " + intersect(a, c)->str();
          break;
        }
      }
      rep.add("axiom2-domains-disjoint", ok, witness);
    }
    // 3. R_e inside D_{s(e)}
    for (const auto& e : g.edges()) {
      auto it = b.R.find(e.id);
      if (it == b.R.end()) {
        rep.add("axiom3-range-in-source[" + e.id + "]", false, "missing R_" + e.id);
        continue;
      }
      bool ok = b.D.count(e.src) && bundle_contains(b.D.at(e.src), it->second);
      rep.add("axiom3-range-in-source[" + e.id + "]", ok,
              ok ? "" : "R_" + e.id + " not inside D_" + e.src);
    }
    // 4. D_v equals the union of its out-ranges, finite nonzero out-degree only
    for (const auto& v : g.vertices()) {
      auto out = g.out_edges(v);
      if (out.empty()) continue;
      if (g.has_family(v)) {
        rep.skip("axiom4-domain-union[" + v + "]", "infinite out-degree (truncated family)");
        continue;
      }
      bool ok = b.D.count(v) > 0;
      std::string why = ok ? "" : "missing D_" + v;
      if (ok) {
        try {
          Bundle u;
          for (const Edge* e : out) {
            if (!b.R.count(e->id)) throw BranchingError("missing R_" + e->id);
            for (const auto& iv : b.R.at(e->id)) u.push_back(iv);
          }
          ok = bundles_equal(u, b.D.at(v));
          if (!ok) why = "D_" + v + " != union of R_e";
        } catch (const std::exception& ex) {  // overlapping ranges etc.
          ok = false;
          why = ex.what();
        }
      }
      rep.add("axiom4-domain-union[" + v + "]", ok, why);
    }
    // 5. f_e a measurable bijection D_{r(e)} -> R_e with exact inverse
    for (const auto& e : g.edges()) {
      auto it = b.maps.find(e.id);
      if (it == b.maps.end()) {
        rep.add("axiom5-bijection[" + e.id + "]", false, "missing f_" + e.id);
        continue;
      }
      std::string why;
      bool ok = true;
      try {
        it->second.validate();
        Bundle expect_dom = b.D.at(e.dst);
        Bundle expect_cod = b.R.at(e.id);
        auto tail = b.range_tails.find(e.id);
        if (tail != b.range_tails.end()) expect_cod = bundle_difference(expect_cod, tail->second);
        if (!bundles_equal(it->second.domain(), expect_dom)) {
          ok = false;
          why = "domain of f_" + e.id + " differs from D_" + e.dst;
        } else if (!bundles_equal(it->second.codomain(), expect_cod)) {
          ok = false;
          why = "image of f_" + e.id + " differs from R_" + e.id +
                (tail != b.range_tails.end() ? " minus its declared tail" : "");
        } else {
          PiecewiseMap round = compose(invert(it->second), it->second);
          if (!(round == PiecewiseMap::identity_on(expect_dom))) {
            ok = false;
            why = "f_" + e.id + "^{-1} o f_" + e.id + " is not the identity";
          }
        }
      } catch (const std::exception& ex) {
        ok = false;
        why = ex.what();
      }
      std::string note = b.range_tails.count(e.id) && ok
                             ? "modulo declared tail " + bundle_to_json(b.range_tails.at(e.id)).dump()
                             : why;
      rep.add("axiom5-bijection[" + e.id + "]", ok, note);
    }
    // 6. Radon-Nikodym chain rule, symbolically per piece
    for (const auto& e : g.edges()) {
      auto it = b.maps.find(e.id);
      if (it == b.maps.end()) continue;
      bool ok = radon_nikodym(it->second).chain_rule_ok;
      rep.add("axiom6-chain-rule[" + e.id + "]", ok, ok ? "" : "derivative product differs from 1");
    }
  } else {
    using namespace detail;
    // 1 & 2: disjoint index families
    {
      bool ok = true;
      std::string witness;
      std::map<Index, std::string> owner;
      for (const auto& [e, s] : b.Rd)
        for (Index i : s) {
          auto [pos, fresh] = owner.insert({i, e});
          if (!fresh && pos->second != e) {
            ok = false;
            witness = "index " + std::to_string(i) + " in R_" + pos->second + " and R_" + e;
          }
        }
      rep.add("axiom1-ranges-disjoint", ok, witness);
    }
    {
      bool ok = true;
      std::string witness;
      std::map<Index, std::string> owner;
      for (const auto& [v, s] : b.Dd)
        for (Index i : s) {
          auto [pos, fresh] = owner.insert({i, v});
          if (!fresh && pos->second != v) {
            ok = false;
            witness = "index " + std::to_string(i) + " in D_" + pos->second + " and D_" + v;
          }
        }
      rep.add("axiom2-domains-disjoint", ok, witness);
    }
    for (const auto& e : g.edges()) {
      bool ok = b.Rd.count(e.id) && b.Dd.count(e.src) && subset_of(b.Rd.at(e.id), b.Dd.at(e.src));
      rep.add("axiom3-range-in-source[" + e.id + "]", ok,
              ok ? "" : "R_" + e.id + " not inside D_" + e.src);
    }
    for (const auto& v : g.vertices()) {
      auto out = g.out_edges(v);
      if (out.empty()) continue;
      if (g.has_family(v)) {
        rep.skip("axiom4-domain-union[" + v + "]", "infinite out-degree (truncated family)");
        continue;
      }
      IndexSet u;
      bool complete = b.Dd.count(v) > 0;
      for (const Edge* e : out) {
        if (!b.Rd.count(e->id)) {
          complete = false;
          break;
        }
        u = set_union(u, b.Rd.at(e->id));
      }
      bool ok = complete && u == b.Dd.at(v);
      rep.add("axiom4-domain-union[" + v + "]", ok, ok ? "" : "D_" + v + " != union of R_e");
    }
    for (const auto& e : g.edges()) {
      auto it = b.fd.find(e.id);
      if (it == b.fd.end()) {
        rep.add("axiom5-bijection[" + e.id + "]", false, "missing f_" + e.id);
        continue;
      }
      bool ok = true;
      std::string why;
      IndexSet dom, img;
      for (const auto& [a, c] : it->second) {
        dom.push_back(a);
        img.push_back(c);
      }
      std::sort(img.begin(), img.end());
      if (!b.Dd.count(e.dst) || !b.Rd.count(e.id)) {
        ok = false;
        why = "missing D_" + e.dst + " or R_" + e.id;
      } else if (!sorted_unique(dom)) {
        ok = false;
        why = "f_" + e.id + " has a repeated source index";
      } else if (!sorted_unique(img)) {
        ok = false;
        why = "f_" + e.id + " is not injective";
      } else {
        IndexSet expect_dom = b.Dd.at(e.dst);
        auto tail = b.domain_tails.find(e.id);
        if (tail != b.domain_tails.end()) expect_dom = set_difference(expect_dom, tail->second);
        if (dom != expect_dom) {
          ok = false;
          why = "domain of f_" + e.id + " differs from D_" + e.dst +
                (tail != b.domain_tails.end() ? " minus its declared tail" : "");
        } else if (img != b.Rd.at(e.id)) {
          ok = false;
          why = "image of f_" + e.id + " differs from R_" + e.id;
        }
      }
      std::string note = b.domain_tails.count(e.id) && ok
                             ? "modulo declared domain tail (" +
                                   std::to_string(b.domain_tails.at(e.id).size()) + " indices)"
                             : why;
      rep.add("axiom5-bijection[" + e.id + "]", ok, note);
    }
    rep.add("axiom6-chain-rule", true, "counting measure: derivatives identically 1");
  }
  return rep;
}

/// Discrete branching system from explicit index data; derivative data is
/// identically 1. Throws if the data violates the axioms.
inline BranchingSystem discrete_system(const Graph& g, IndexSet lambda,
                                       std::map<std::string, IndexSet> R_sets,
                                       std::map<std::string, IndexSet> D_sets,
                                       std::map<std::string, IndexMap> f_maps,
                                       std::map<std::string, IndexSet> dom_tails = {}) {
  BranchingSystem b;
  b.model = BranchingSystem::Model::Discrete;
  b.graph = g;
  b.lambda = std::move(lambda);
  std::sort(b.lambda.begin(), b.lambda.end());
  b.Rd = std::move(R_sets);
  b.Dd = std::move(D_sets);
  b.fd = std::move(f_maps);
  b.domain_tails = std::move(dom_tails);
  for (auto& [e, s] : b.Rd) std::sort(s.begin(), s.end());
  for (auto& [v, s] : b.Dd) std::sort(s.begin(), s.end());
  for (auto& [e, m] : b.fd) std::sort(m.begin(), m.end());
  for (auto& [e, s] : b.domain_tails) std::sort(s.begin(), s.end());
  auto rep = verify_axioms(b, g);
  if (!rep.pass) {
    for (const auto& c : rep.checks)
      if (c.status == "fail") throw BranchingError("discrete system: " + c.id + ": " + c.detail);
  }
  return b;
}

}  // namespace graphck
