#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "graphck/branching.hpp"
#include "graphck/interval.hpp"
#include "graphck/scalar.hpp"

namespace graphck {

class RepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weighted partial injection on a finite index set: basis index lambda is
/// sent to weight * basis index sigma(lambda). Weights are unimodular in
/// counting-measure systems, so phases suffice.
struct WeightedPartialInjection {
  std::vector<std::tuple<Index, Index, Phase>> entries;  // sorted by source, unique

  void canonicalize() {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    for (std::size_t i = 0; i + 1 < entries.size(); ++i)
      if (std::get<0>(entries[i]) == std::get<0>(entries[i + 1]))
        throw RepError("operator: repeated source index " + std::to_string(std::get<0>(entries[i])));
    std::set<Index> targets;
    for (const auto& [s, t, w] : entries)
      if (!targets.insert(t).second)
        throw RepError("operator: not injective at target index " + std::to_string(t));
  }

  static WeightedPartialInjection identity_on(const IndexSet& s) {
    WeightedPartialInjection r;
    for (Index i : s) r.entries.push_back({i, i, Phase::one()});
    return r;
  }
  static WeightedPartialInjection zero() { return {}; }

  bool is_zero() const { return entries.empty(); }
  std::optional<std::pair<Index, Phase>> apply(Index i) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), i, [](const auto& e, Index v) {
      return std::get<0>(e) < v;
    });
    if (it == entries.end() || std::get<0>(*it) != i) return std::nullopt;
    return std::make_pair(std::get<1>(*it), std::get<2>(*it));
  }
  bool operator==(const WeightedPartialInjection& o) const { return entries == o.entries; }
};

/// Weighted substitution operator on the unit-interval bundle: on each piece,
/// phi |-> weight(x) * phi(map^{-1}(x)) for x in the piece's target. The
/// (map, weight) list is the normal form; equality is structural after
/// normalization.
struct WeightedPiece {
  PieceMap map;
  Monomial weight;  // function of the target coordinate

  bool operator==(const WeightedPiece& o) const { return map == o.map && weight == o.weight; }
};

struct BundleOperator {
  std::vector<WeightedPiece> pieces;

  static BundleOperator identity_on(const Bundle& b) {
    BundleOperator r;
    for (const auto& iv : normalize_bundle(b)) r.pieces.push_back({PieceMap::affine(iv, iv), Monomial::one()});
    return r;
  }
  static BundleOperator zero() { return {}; }
  bool is_zero() const { return pieces.empty(); }

  BundleOperator normalized() const {
    BundleOperator r = *this;
    for (auto& p : r.pieces)
      if (p.map.kind == PieceMap::Kind::Power && p.map.exponent == 1)
        p.map = PieceMap::relabel(p.map.source.label, p.map.target.label);
    std::sort(r.pieces.begin(), r.pieces.end(),
              [](const WeightedPiece& a, const WeightedPiece& b) { return a.map.source < b.map.source; });
    std::vector<WeightedPiece> merged;
    for (auto& p : r.pieces) {
      if (!merged.empty()) {
        WeightedPiece& q = merged.back();
        if (q.map.kind == PieceMap::Kind::Affine && p.map.kind == PieceMap::Kind::Affine &&
            q.map.source.label == p.map.source.label && q.map.target.label == p.map.target.label &&
            q.map.slope == p.map.slope && q.map.offset == p.map.offset &&
            q.map.source.hi == p.map.source.lo && q.weight == p.weight) {
          q.map.source.hi = p.map.source.hi;
          q.map.target.hi = p.map.target.hi;
          continue;
        }
      }
      merged.push_back(std::move(p));
    }
    r.pieces = std::move(merged);
    return r;
  }

  void validate() const {
    Bundle src, dst;
    for (const auto& p : pieces) {
      src.push_back(p.map.source);
      dst.push_back(p.map.target);
    }
    normalize_bundle(src);
    normalize_bundle(dst);
  }

  bool operator==(const BundleOperator& o) const { return normalized().pieces == o.normalized().pieces; }
};

using RepOperator = std::variant<WeightedPartialInjection, BundleOperator>;

inline bool op_is_zero(const RepOperator& a) {
  return std::visit([](const auto& x) { return x.is_zero(); }, a);
}

inline bool op_equal(const RepOperator& a, const RepOperator& b) {
  if (a.index() != b.index()) throw RepError("operator: backend mismatch");
  if (std::holds_alternative<WeightedPartialInjection>(a))
    return std::get<WeightedPartialInjection>(a) == std::get<WeightedPartialInjection>(b);
  return std::get<BundleOperator>(a) == std::get<BundleOperator>(b);
}

namespace detail {

/// weight(map^{-1}(x)) as a monomial on the piece's target; defined whenever
/// the weight is constant, the map a plain relabeling, or the map a power.
inline Monomial pull_weight_through_inverse(const Monomial& w, const PieceMap& map) {
  if (w.is_constant()) return w;
  if (map.is_identity_relabel()) return w;
  if (map.is_power()) return w.substitute_power(Rational(1) / map.exponent);
  throw RepError("operator: weight composition outside the exact algebra (" + w.str() + " through " +
                 map.str() + ")");
}

/// weight(map(t)) as a monomial on the piece's source.
inline Monomial push_weight_through(const Monomial& w, const PieceMap& map) {
  if (w.is_constant()) return w;
  if (map.is_identity_relabel()) return w;
  if (map.is_power()) return w.substitute_power(map.exponent);
  throw RepError("operator: weight composition outside the exact algebra (" + w.str() + " through " +
                 map.str() + ")");
}

}  // namespace detail

inline WeightedPartialInjection op_compose(const WeightedPartialInjection& a,
                                           const WeightedPartialInjection& b) {
  WeightedPartialInjection r;
  for (const auto& [s, mid, w] : b.entries)
    if (auto hit = a.apply(mid)) r.entries.push_back({s, hit->first, hit->second * w});
  r.canonicalize();
  return r;
}

inline BundleOperator op_compose(const BundleOperator& a, const BundleOperator& b) {
  BundleOperator r;
  for (const auto& q : b.pieces)
    for (const auto& p : a.pieces) {
      if (!intersect(p.map.source, q.map.target)) continue;
      auto cm = compose_pieces(p.map, q.map);
      if (!cm) continue;
      Monomial w = p.weight * detail::pull_weight_through_inverse(q.weight, p.map);
      r.pieces.push_back({*cm, w});
    }
  r = r.normalized();
  r.validate();
  return r;
}

inline RepOperator op_compose(const RepOperator& a, const RepOperator& b) {
  if (a.index() != b.index()) throw RepError("operator: backend mismatch");
  if (std::holds_alternative<WeightedPartialInjection>(a))
    return op_compose(std::get<WeightedPartialInjection>(a), std::get<WeightedPartialInjection>(b));
  return op_compose(std::get<BundleOperator>(a), std::get<BundleOperator>(b));
}

inline WeightedPartialInjection op_adjoint(const WeightedPartialInjection& a) {
  WeightedPartialInjection r;
  for (const auto& [s, t, w] : a.entries) r.entries.push_back({t, s, w.conj()});
  r.canonicalize();
  return r;
}

inline BundleOperator op_adjoint(const BundleOperator& a) {
  BundleOperator r;
  for (const auto& p : a.pieces) {
    Monomial w = detail::push_weight_through(p.weight, p.map).conj() * p.map.forward_density();
    r.pieces.push_back({p.map.inverted(), w});
  }
  r = r.normalized();
  r.validate();
  return r;
}

inline RepOperator op_adjoint(const RepOperator& a) {
  if (std::holds_alternative<WeightedPartialInjection>(a))
    return op_adjoint(std::get<WeightedPartialInjection>(a));
  return op_adjoint(std::get<BundleOperator>(a));
}

/// Sum of operators with pairwise disjoint domains and ranges (the only sums
/// CK words need); nullopt when the supports collide.
inline std::optional<WeightedPartialInjection> op_add_disjoint(const WeightedPartialInjection& a,
                                                               const WeightedPartialInjection& b) {
  WeightedPartialInjection r = a;
  r.entries.insert(r.entries.end(), b.entries.begin(), b.entries.end());
  try {
    r.canonicalize();
  } catch (const RepError&) {
    return std::nullopt;
  }
  return r;
}

inline std::optional<BundleOperator> op_add_disjoint(const BundleOperator& a, const BundleOperator& b) {
  BundleOperator r = a;
  r.pieces.insert(r.pieces.end(), b.pieces.begin(), b.pieces.end());
  try {
    r.validate();
  } catch (const IntervalError&) {
    return std::nullopt;
  }
  return r.normalized();
}

/// pi(S_e): discrete shadow is the index map with weight 1; on the bundle it
/// is the substitution along f_e weighted by Phi_{f_e^{-1}}^{1/2}.
inline RepOperator induced_edge_operator(const BranchingSystem& b, const std::string& edge_id) {
  if (!b.graph.has_edge(edge_id)) throw RepError("operator: unknown edge '" + edge_id + "'");
  if (b.model == BranchingSystem::Model::Discrete) {
    WeightedPartialInjection r;
    for (const auto& [s, t] : b.fd.at(edge_id)) r.entries.push_back({s, t, Phase::one()});
    r.canonicalize();
    return r;
  }
  BundleOperator r;
  for (const auto& pm : b.maps.at(edge_id).pieces)
    r.pieces.push_back({pm, pm.inverted().forward_density().sqrt()});
  return r.normalized();
}

/// pi(P_v): the identity on D_v.
inline RepOperator induced_vertex_operator(const BranchingSystem& b, const std::string& vertex_id) {
  if (!b.graph.has_vertex(vertex_id)) throw RepError("operator: unknown vertex '" + vertex_id + "'");
  if (b.model == BranchingSystem::Model::Discrete)
    return WeightedPartialInjection::identity_on(b.Dd.at(vertex_id));
  return BundleOperator::identity_on(b.D.at(vertex_id));
}

/// pi(S_{e_1}) ... pi(S_{e_n}) for a composable edge word; the empty word at
/// a vertex is pi(P_v).
inline RepOperator path_operator(const BranchingSystem& b, const std::vector<std::string>& word,
                                 const std::string& base_vertex = "") {
  if (word.empty()) {
    if (base_vertex.empty()) throw RepError("path operator: empty word needs a base vertex");
    return induced_vertex_operator(b, base_vertex);
  }
  for (std::size_t i = 0; i + 1 < word.size(); ++i)
    if (b.graph.edge(word[i]).dst != b.graph.edge(word[i + 1]).src)
      throw RepError("path operator: word not composable at " + word[i] + "," + word[i + 1]);
  RepOperator acc = induced_edge_operator(b, word.back());
  for (std::size_t i = word.size() - 1; i-- > 0;)
    acc = op_compose(induced_edge_operator(b, word[i]), acc);
  return acc;
}

struct RelationCheck {
  std::string id;
  std::string status;  // pass | fail | skipped
  std::string witness;
};

struct CkReport {
  bool pass = true;
  std::vector<RelationCheck> relations;

  void add(const std::string& id, bool ok, const std::string& witness = "") {
    relations.push_back({id, ok ? "pass" : "fail", witness});
    if (!ok) pass = false;
  }
  void skip(const std::string& id, const std::string& why) { relations.push_back({id, "skipped", why}); }

  json to_json() const {
    json doc;
    doc["pass"] = pass;
    doc["relations"] = json::array();
    for (const auto& r : relations) {
      json j = {{"id", r.id}, {"status", r.status}};
      if (!r.witness.empty()) j["witness"] = r.witness;
      doc["relations"].push_back(j);
    }
    return doc;
  }
};

namespace detail {

inline std::string first_difference(const WeightedPartialInjection& a,
                                    const WeightedPartialInjection& b) {
  std::size_t n = std::max(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= a.entries.size()) return "extra entry at index " + std::to_string(std::get<0>(b.entries[i]));
    if (i >= b.entries.size()) return "extra entry at index " + std::to_string(std::get<0>(a.entries[i]));
    if (!(a.entries[i] == b.entries[i]))
      return "differ at source index " + std::to_string(std::get<0>(a.entries[i]));
  }
  return "";
}

inline std::string first_difference(const BundleOperator& a, const BundleOperator& b) {
  auto na = a.normalized(), nb = b.normalized();
  std::size_t n = std::max(na.pieces.size(), nb.pieces.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= na.pieces.size()) return "extra piece " + nb.pieces[i].map.str();
    if (i >= nb.pieces.size()) return "extra piece " + na.pieces[i].map.str();
    if (!(na.pieces[i] == nb.pieces[i]))
      return "differ on piece " + na.pieces[i].map.str() + " vs " + nb.pieces[i].map.str();
  }
  return "";
}

inline std::string op_difference(const RepOperator& a, const RepOperator& b) {
  if (std::holds_alternative<WeightedPartialInjection>(a))
    return first_difference(std::get<WeightedPartialInjection>(a), std::get<WeightedPartialInjection>(b));
  return first_difference(std::get<BundleOperator>(a), std::get<BundleOperator>(b));
}

}  // namespace detail

/// Exact verification of the Cuntz-Krieger relations for the representation
/// induced by a branching system. Operator equality is normal-form equality.
/// CK3 is only stated at vertices with finite nonzero out-degree; declared
/// truncation tails are masked out of the projection side and reported.
inline CkReport verify_ck(const BranchingSystem& b, const Graph& g) {
  CkReport rep;
  const bool discrete = b.model == BranchingSystem::Model::Discrete;

  std::map<std::string, RepOperator> S, Sstar, P, SSstar;
  for (const auto& e : g.edges()) {
    S.emplace(e.id, induced_edge_operator(b, e.id));
    Sstar.emplace(e.id, op_adjoint(S.at(e.id)));
    SSstar.emplace(e.id, op_compose(S.at(e.id), Sstar.at(e.id)));
  }
  for (const auto& v : g.vertices()) P.emplace(v, induced_vertex_operator(b, v));

  // mutual orthogonality of the vertex projections
  for (std::size_t i = 0; i < g.vertices().size(); ++i)
    for (std::size_t j = i + 1; j < g.vertices().size(); ++j) {
      const auto& v = g.vertices()[i];
      const auto& w = g.vertices()[j];
      RepOperator prod = op_compose(P.at(v), P.at(w));
      if (!op_is_zero(prod))
        rep.add("orthogonal-projections[" + v + "," + w + "]", false, "P_" + v + " P_" + w + " != 0");
    }
  rep.add("orthogonal-projections", rep.pass, "");

  // orthogonal ranges: S_e^* S_f = 0 for e != f
  {
    bool all = true;
    std::string witness;
    for (const auto& e : g.edges())
      for (const auto& f : g.edges()) {
        if (e.id == f.id) continue;
        RepOperator prod = op_compose(Sstar.at(e.id), S.at(f.id));
        if (!op_is_zero(prod)) {
          all = false;
          witness = "S_" + e.id + "^* S_" + f.id + " != 0";
        }
      }
    rep.add("orthogonal-ranges", all, witness);
  }

  // CK1: S_e^* S_e = P_{r(e)}
  for (const auto& e : g.edges()) {
    RepOperator lhs = op_compose(Sstar.at(e.id), S.at(e.id));
    RepOperator rhs = P.at(e.dst);
    std::string note;
    if (discrete) {
      auto tail = b.domain_tails.find(e.id);
      if (tail != b.domain_tails.end() && !tail->second.empty()) {
        rhs = WeightedPartialInjection::identity_on(
            detail::set_difference(b.Dd.at(e.dst), tail->second));
        note = "modulo declared domain tail";
      }
    }
    bool ok = op_equal(lhs, rhs);
    rep.add("CK1[" + e.id + "]", ok, ok ? note : detail::op_difference(lhs, rhs));
  }

  // CK2: P_{s(e)} S_e S_e^* = S_e S_e^*
  for (const auto& e : g.edges()) {
    RepOperator lhs = op_compose(P.at(e.src), SSstar.at(e.id));
    bool ok = op_equal(lhs, SSstar.at(e.id));
    rep.add("CK2[" + e.id + "]", ok, ok ? "" : detail::op_difference(lhs, SSstar.at(e.id)));
  }

  // CK3: P_v = sum of S_e S_e^* over s^{-1}(v), finite nonzero out-degree only
  for (const auto& v : g.vertices()) {
    auto out = g.out_edges(v);
    if (out.empty()) continue;
    if (g.has_family(v)) {
      rep.skip("CK3[" + v + "]", "infinite out-degree (truncated family)");
      continue;
    }
    std::optional<RepOperator> sum;
    bool overlap = false;
    for (const Edge* e : out) {
      if (!sum) {
        sum = SSstar.at(e->id);
        continue;
      }
      if (discrete) {
        auto s = op_add_disjoint(std::get<WeightedPartialInjection>(*sum),
                                 std::get<WeightedPartialInjection>(SSstar.at(e->id)));
        if (!s) {
          overlap = true;
          break;
        }
        sum = *s;
      } else {
        auto s = op_add_disjoint(std::get<BundleOperator>(*sum),
                                 std::get<BundleOperator>(SSstar.at(e->id)));
        if (!s) {
          overlap = true;
          break;
        }
        sum = *s;
      }
    }
    if (overlap) {
      rep.add("CK3[" + v + "]", false, "range projections of s^{-1}(" + v + ") overlap");
      continue;
    }
    RepOperator rhs = P.at(v);
    std::string note;
    if (!discrete) {
      Bundle masked = b.D.at(v);
      bool any_tail = false;
      for (const Edge* e : out) {
        auto t = b.range_tails.find(e->id);
        if (t != b.range_tails.end() && !t->second.empty()) {
          masked = bundle_difference(masked, t->second);
          any_tail = true;
        }
      }
      if (any_tail) {
        rhs = BundleOperator::identity_on(masked);
        note = "modulo declared range tails";
      }
    }
    bool ok = op_equal(*sum, rhs);
    rep.add("CK3[" + v + "]", ok, ok ? note : detail::op_difference(*sum, rhs));
  }

  return rep;
}

struct NonzeroReport {
  bool pass = true;
  std::vector<RelationCheck> checks;

  void add(const std::string& id, bool ok, const std::string& witness = "") {
    checks.push_back({id, ok ? "pass" : "fail", witness});
    if (!ok) pass = false;
  }
  json to_json() const {
    json doc;
    doc["pass"] = pass;
    doc["checks"] = json::array();
    for (const auto& c : checks) {
      json j = {{"id", c.id}, {"status", c.status}};
      if (!c.witness.empty()) j["witness"] = c.witness;
      doc["checks"].push_back(j);
    }
    return doc;
  }
};

/// Nonvanishing of every vertex projection and edge isometry in the induced
/// representation, plus S_alpha S_beta^* != 0 for sampled path pairs with a
/// common range.
inline NonzeroReport check_nonzero(const BranchingSystem& b, const Graph& g,
                                   std::size_t max_path_len = 2, std::size_t pairs_per_vertex = 3) {
  NonzeroReport rep;
  for (const auto& v : g.vertices()) {
    bool ok = b.model == BranchingSystem::Model::Discrete
                  ? !b.Dd.at(v).empty()
                  : measure(b.D.at(v)) > 0;
    rep.add("P-nonzero[" + v + "]", ok, ok ? "" : "D_" + v + " is null");
  }
  for (const auto& e : g.edges()) {
    bool ok = b.model == BranchingSystem::Model::Discrete
                  ? !b.Rd.at(e.id).empty()
                  : measure(b.R.at(e.id)) > 0;
    rep.add("S-nonzero[" + e.id + "]", ok, ok ? "" : "R_" + e.id + " is null");
  }

  // directed paths of bounded length, grouped by their range vertex
  std::map<std::string, std::vector<std::vector<std::string>>> by_range;
  std::vector<std::vector<std::string>> frontier;
  for (const auto& e : g.edges()) {
    frontier.push_back({e.id});
    by_range[e.dst].push_back({e.id});
  }
  for (std::size_t len = 2; len <= max_path_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& word : frontier)
      for (const Edge* e : g.out_edges(g.edge(word.back()).dst)) {
        auto w = word;
        w.push_back(e->id);
        by_range[e->dst].push_back(w);
        next.push_back(std::move(w));
      }
    frontier = std::move(next);
  }
  for (auto& [v, paths] : by_range) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < paths.size() && count < pairs_per_vertex; ++i)
      for (std::size_t j = i; j < paths.size() && count < pairs_per_vertex; ++j) {
        RepOperator op = op_compose(path_operator(b, paths[i]), op_adjoint(path_operator(b, paths[j])));
        std::string id = "word-nonzero[";
        for (const auto& w : paths[i]) id += w;
        id += "*";
        for (const auto& w : paths[j]) id += w;
        id += "]";
        rep.add(id, !op_is_zero(op), "S_alpha S_beta^* vanished");
        ++count;
      }
  }
  return rep;
}

}  // namespace graphck
