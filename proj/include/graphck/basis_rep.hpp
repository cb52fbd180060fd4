#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "graphck/branching.hpp"
#include "graphck/graph.hpp"
#include "graphck/graph_analysis.hpp"
#include "graphck/level.hpp"
#include "graphck/operators.hpp"

namespace graphck {

class RepFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BasisArc {
  Index from, to;
  Phase weight;
};

/// Representation given by basis-index maps: the operator for S_e sends
/// basis element lambda to weight(lambda) times basis element tau_e(lambda),
/// with unimodular root-of-unity weights. Indices outside every H_v-basis
/// form the residual set where all operators vanish.
struct BasisMapRep {
  Graph graph;
  Index lambda_size = 0;
  std::map<std::string, IndexSet> vertex_basis;          // H_v indices, sorted
  std::map<std::string, std::vector<BasisArc>> edge_maps;  // tau_e, sorted by from

  void validate() const {
    std::map<Index, std::string> vertex_of;
    for (const auto& v : graph.vertices()) {
      auto it = vertex_basis.find(v);
      if (it == vertex_basis.end()) throw RepFormatError("rep: missing vertex basis for '" + v + "'");
      for (std::size_t i = 0; i < it->second.size(); ++i) {
        Index idx = it->second[i];
        if (idx < 0 || idx >= lambda_size)
          throw RepFormatError("rep: index " + std::to_string(idx) + " out of range at vertex " + v);
        if (i > 0 && it->second[i - 1] >= idx)
          throw RepFormatError("rep: vertex basis of '" + v + "' not sorted/unique");
        auto [pos, fresh] = vertex_of.insert({idx, v});
        if (!fresh)
          throw RepFormatError("rep: index " + std::to_string(idx) + " in H_" + pos->second +
                               " and H_" + v);
      }
    }
    std::map<Index, std::string> range_of;
    for (const auto& e : graph.edges()) {
      auto it = edge_maps.find(e.id);
      if (it == edge_maps.end()) throw RepFormatError("rep: missing map for edge '" + e.id + "'");
      IndexSet dom, ran;
      for (const auto& arc : it->second) {
        dom.push_back(arc.from);
        ran.push_back(arc.to);
        auto [pos, fresh] = range_of.insert({arc.to, e.id});
        if (!fresh)
          throw RepFormatError("rep: ranges of tau_" + pos->second + " and tau_" + e.id +
                               " meet at index " + std::to_string(arc.to));
        auto vo = vertex_of.find(arc.to);
        if (vo == vertex_of.end() || vo->second != e.src)
          throw RepFormatError("rep: tau_" + e.id + " maps into index " + std::to_string(arc.to) +
                               " outside H_" + e.src);
      }
      for (std::size_t i = 0; i + 1 < dom.size(); ++i)
        if (dom[i] >= dom[i + 1]) throw RepFormatError("rep: tau_" + e.id + " not sorted by source");
      // tau_e may be given on a truncated part of H_{r(e)}; the rest of the
      // orbit lies beyond the materialized index set
      const auto& full = vertex_basis.at(e.dst);
      if (!std::includes(full.begin(), full.end(), dom.begin(), dom.end()))
        throw RepFormatError("rep: domain of tau_" + e.id + " leaves H_" + e.dst);
    }
    // CK3 shadow at finite nonzero out-degree
    for (const auto& v : graph.vertices()) {
      auto out = graph.out_edges(v);
      if (out.empty() || graph.has_family(v)) continue;
      IndexSet covered;
      for (const Edge* e : out)
        for (const auto& arc : edge_maps.at(e->id)) covered.push_back(arc.to);
      std::sort(covered.begin(), covered.end());
      if (covered != vertex_basis.at(v))
        throw RepFormatError("rep: ranges over s^{-1}(" + v + ") do not cover H_" + v);
    }
  }

  IndexSet residual() const {
    std::set<Index> used;
    for (const auto& [v, s] : vertex_basis) used.insert(s.begin(), s.end());
    IndexSet r;
    for (Index i = 0; i < lambda_size; ++i)
      if (!used.count(i)) r.push_back(i);
    return r;
  }

  /// phi(S_e) as a weighted partial injection.
  WeightedPartialInjection edge_operator(const std::string& edge_id) const {
    WeightedPartialInjection r;
    for (const auto& arc : edge_maps.at(edge_id)) r.entries.push_back({arc.from, arc.to, arc.weight});
    r.canonicalize();
    return r;
  }
  /// phi(P_v) as the identity on the H_v indices.
  WeightedPartialInjection vertex_operator(const std::string& v) const {
    return WeightedPartialInjection::identity_on(vertex_basis.at(v));
  }

  json to_json() const {
    json doc;
    doc["graph"] = graph.to_json();
    doc["lambda_size"] = lambda_size;
    json vb = json::object();
    for (const auto& [v, s] : vertex_basis) vb[v] = s;
    doc["vertex_basis"] = vb;
    json em = json::object();
    for (const auto& [e, arcs] : edge_maps) {
      json a = json::array();
      for (const auto& arc : arcs) {
        json j = {{"from", arc.from}, {"to", arc.to}};
        if (!arc.weight.is_one()) j["phase"] = rat_str(arc.weight.exponent());
        a.push_back(j);
      }
      em[e] = a;
    }
    doc["edges"] = em;
    return doc;
  }

  static BasisMapRep from_json(const json& doc) {
    BasisMapRep r;
    r.graph = Graph::from_json(doc.at("graph"));
    r.lambda_size = doc.at("lambda_size").get<Index>();
    for (const auto& [v, s] : doc.at("vertex_basis").items()) {
      r.vertex_basis[v] = s.get<IndexSet>();
      std::sort(r.vertex_basis[v].begin(), r.vertex_basis[v].end());
    }
    for (const auto& [e, arcs] : doc.at("edges").items()) {
      std::vector<BasisArc> list;
      for (const auto& a : arcs) {
        BasisArc arc;
        arc.from = a.at("from").get<Index>();
        arc.to = a.at("to").get<Index>();
        if (a.contains("phase")) arc.weight = Phase(rat_parse(a.at("phase").get<std::string>()));
        list.push_back(arc);
      }
      std::sort(list.begin(), list.end(), [](const BasisArc& x, const BasisArc& y) { return x.from < y.from; });
      r.edge_maps[e] = std::move(list);
    }
    r.validate();
    return r;
  }
};

/// Outcome of the permutativity decision. In the permutative case the gauge
/// rescales every basis vector so that all edge weights become 1; otherwise
/// a cycle of transition arcs with weight product != 1 is returned.
struct PermutativityCertificate {
  bool permutative = false;
  std::vector<Phase> gauge;  // indexed by lambda, identity off the bases
  std::map<std::string, IndexSet> B_v, B_e;

  struct WitnessStep {
    std::string edge;
    Index from, to;
    bool forward;  // traversed with the arc (true) or against it
  };
  std::vector<WitnessStep> witness_cycle;
  Phase witness_product;

  json to_json() const {
    json doc;
    doc["permutative"] = permutative;
    if (permutative) {
      json g = json::array();
      for (const auto& p : gauge) g.push_back(rat_str(p.exponent()));
      doc["gauge_exponents"] = g;
      json bv = json::object(), be = json::object();
      for (const auto& [v, s] : B_v) bv[v] = s;
      for (const auto& [e, s] : B_e) be[e] = s;
      doc["B_v"] = bv;
      doc["B_e"] = be;
    } else {
      json cyc = json::array();
      for (const auto& s : witness_cycle)
        cyc.push_back({{"edge", s.edge}, {"from", s.from}, {"to", s.to}, {"forward", s.forward}});
      doc["witness_cycle"] = cyc;
      doc["witness_product"] = witness_product.str();
    }
    return doc;
  }
};

/// Gauge-cocycle permutativity decision: arcs lambda -> tau_e(lambda) with
/// weight c_e(lambda) admit a phase gauge with g(tau(lambda)) =
/// c(lambda) g(lambda) iff every cycle of the transition graph has weight
/// product 1. Gauge-fix along a BFS forest, then test the leftover arcs.
inline PermutativityCertificate check_permutative(const BasisMapRep& rep) {
  struct Arc {
    Index from, to;
    Phase w;
    std::string edge;
  };
  std::vector<Arc> arcs;
  for (const auto& [e, list] : rep.edge_maps)
    for (const auto& a : list) arcs.push_back({a.from, a.to, a.weight, e});

  std::vector<std::vector<std::pair<std::size_t, bool>>> adj(
      static_cast<std::size_t>(rep.lambda_size));  // (arc, traversed forward)
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    if (arcs[i].from == arcs[i].to) continue;  // self-loops are never tree arcs
    adj[static_cast<std::size_t>(arcs[i].from)].push_back({i, true});
    adj[static_cast<std::size_t>(arcs[i].to)].push_back({i, false});
  }

  std::vector<Phase> gauge(static_cast<std::size_t>(rep.lambda_size));
  std::vector<bool> seen(static_cast<std::size_t>(rep.lambda_size), false);
  std::vector<std::optional<std::pair<std::size_t, bool>>> parent_arc(
      static_cast<std::size_t>(rep.lambda_size));
  std::vector<Index> parent(static_cast<std::size_t>(rep.lambda_size), -1);
  std::vector<bool> is_tree(arcs.size(), false);

  for (Index root = 0; root < rep.lambda_size; ++root) {
    if (seen[static_cast<std::size_t>(root)]) continue;
    seen[static_cast<std::size_t>(root)] = true;
    std::deque<Index> queue{root};
    while (!queue.empty()) {
      Index u = queue.front();
      queue.pop_front();
      for (const auto& [ai, fwd] : adj[static_cast<std::size_t>(u)]) {
        const Arc& a = arcs[ai];
        Index w = fwd ? a.to : a.from;
        if (seen[static_cast<std::size_t>(w)]) continue;
        seen[static_cast<std::size_t>(w)] = true;
        is_tree[ai] = true;
        parent[static_cast<std::size_t>(w)] = u;
        parent_arc[static_cast<std::size_t>(w)] = {ai, fwd};
        // g(to) = c g(from)
        gauge[static_cast<std::size_t>(w)] = fwd ? a.w * gauge[static_cast<std::size_t>(u)]
                                                 : a.w.inverse() * gauge[static_cast<std::size_t>(u)];
        queue.push_back(w);
      }
    }
  }

  for (std::size_t i = 0; i < arcs.size(); ++i) {
    if (is_tree[i]) continue;
    const Arc& a = arcs[i];
    if (gauge[static_cast<std::size_t>(a.to)] == a.w * gauge[static_cast<std::size_t>(a.from)]) continue;

    // Violated: the tree path to -> ... -> from plus this arc is a cycle
    // whose weight product differs from 1.
    PermutativityCertificate bad;
    bad.permutative = false;
    // walk both endpoints up to their common ancestor
    auto depth = [&](Index x) {
      int d = 0;
      while (parent[static_cast<std::size_t>(x)] >= 0) {
        x = parent[static_cast<std::size_t>(x)];
        ++d;
      }
      return d;
    };
    Index x = a.to, y = a.from;
    int dx = depth(x), dy = depth(y);
    std::vector<PermutativityCertificate::WitnessStep> up_from_to, up_from_from;
    auto step_of = [&](Index child) {
      auto [ai, fwd] = *parent_arc[static_cast<std::size_t>(child)];
      const Arc& t = arcs[ai];
      return PermutativityCertificate::WitnessStep{t.edge, t.from, t.to, fwd};
    };
    while (dx > dy) {
      up_from_to.push_back(step_of(x));
      x = parent[static_cast<std::size_t>(x)];
      --dx;
    }
    while (dy > dx) {
      up_from_from.push_back(step_of(y));
      y = parent[static_cast<std::size_t>(y)];
      --dy;
    }
    while (x != y) {
      up_from_to.push_back(step_of(x));
      up_from_from.push_back(step_of(y));
      x = parent[static_cast<std::size_t>(x)];
      y = parent[static_cast<std::size_t>(y)];
    }
    // cycle: arc (from -> to), then from `to` up to the ancestor against the
    // tree, then down to `from` with the tree.
    PermutativityCertificate::WitnessStep closing{a.edge, a.from, a.to, true};
    bad.witness_cycle.push_back(closing);
    for (const auto& s : up_from_to) {
      auto t = s;
      // walking child -> parent: against the arc when the arc was taken
      // parent -> child (forward), with it otherwise
      t.forward = !s.forward;
      bad.witness_cycle.push_back(t);
    }
    for (auto it = up_from_from.rbegin(); it != up_from_from.rend(); ++it)
      bad.witness_cycle.push_back(*it);

    Phase prod;
    for (const auto& s : bad.witness_cycle) {
      Phase w;
      for (const auto& arc2 : rep.edge_maps.at(s.edge))
        if (arc2.from == s.from && arc2.to == s.to) w = arc2.weight;
      prod = s.forward ? prod * w : prod * w.inverse();
    }
    bad.witness_product = prod;
    return bad;
  }

  PermutativityCertificate cert;
  cert.permutative = true;
  cert.gauge = gauge;
  for (const auto& [v, s] : rep.vertex_basis) cert.B_v[v] = s;
  for (const auto& [e, list] : rep.edge_maps) {
    IndexSet r;
    for (const auto& a : list) r.push_back(a.to);
    std::sort(r.begin(), r.end());
    cert.B_e[e] = r;
  }
  return cert;
}

/// Independent oracle: search all gauges with phases drawn from the weights'
/// cyclic group. Exponential; test-scale only.
inline bool permutative_by_brute_force(const BasisMapRep& rep, const std::vector<Phase>& phase_pool) {
  std::vector<Index> nodes;
  for (const auto& [v, s] : rep.vertex_basis) nodes.insert(nodes.end(), s.begin(), s.end());
  std::sort(nodes.begin(), nodes.end());
  std::map<Index, std::size_t> pos;
  for (std::size_t i = 0; i < nodes.size(); ++i) pos[nodes[i]] = i;
  std::vector<std::size_t> choice(nodes.size(), 0);
  while (true) {
    bool ok = true;
    for (const auto& [e, list] : rep.edge_maps) {
      for (const auto& a : list) {
        Phase gf = phase_pool[choice[pos[a.from]]];
        Phase gt = phase_pool[choice[pos[a.to]]];
        if (gt != a.weight * gf) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) return true;
    std::size_t i = 0;
    for (; i < choice.size(); ++i) {
      if (++choice[i] < phase_pool.size()) break;
      choice[i] = 0;
    }
    if (i == choice.size()) return false;
  }
}

struct IndexUnitary {
  std::vector<Phase> basis_phase;  // U b_lambda = basis_phase[lambda] delta_lambda
};

/// Reads the discrete branching system off a permutativity certificate:
/// R_e and D_v are the certified families, f_e = tau_e, and the unitary is
/// the index identity composed with the inverse gauge.
inline std::pair<BranchingSystem, IndexUnitary> extract_branching_system(
    const BasisMapRep& rep, const PermutativityCertificate& cert) {
  if (!cert.permutative) throw RepError("extract: certificate is not permutative");
  BranchingSystem b;
  b.model = BranchingSystem::Model::Discrete;
  b.graph = rep.graph;
  for (Index i = 0; i < rep.lambda_size; ++i) b.lambda.push_back(i);
  for (const auto& [v, s] : cert.B_v) b.Dd[v] = s;
  for (const auto& [e, s] : cert.B_e) b.Rd[e] = s;
  for (const auto& [e, list] : rep.edge_maps) {
    IndexMap m;
    IndexSet dom;
    for (const auto& a : list) {
      m.push_back({a.from, a.to});
      dom.push_back(a.from);
    }
    std::sort(m.begin(), m.end());
    std::sort(dom.begin(), dom.end());
    b.fd[e] = m;
    // a truncated tau leaves part of D_{r(e)} unmapped
    IndexSet tail = detail::set_difference(rep.vertex_basis.at(rep.graph.edge(e).dst), dom);
    if (!tail.empty()) b.domain_tails[e] = tail;
  }
  auto axioms = verify_axioms(b, rep.graph);
  if (!axioms.pass) throw RepError("extract: extracted system violates the branching axioms");
  IndexUnitary u;
  for (const auto& p : cert.gauge) u.basis_phase.push_back(p.inverse());
  return {std::move(b), std::move(u)};
}

struct IntertwineReport {
  bool pass = true;
  std::vector<RelationCheck> checks;

  void add(const std::string& id, bool ok, const std::string& witness = "") {
    checks.push_back({id, ok ? "pass" : "fail", witness});
    if (!ok) pass = false;
  }
  json to_json() const {
    json doc;
    doc["pass"] = pass;
    json fails = json::array();
    for (const auto& c : checks)
      if (c.status == "fail") fails.push_back({{"id", c.id}, {"witness", c.witness}});
    doc["checked"] = checks.size();
    doc["failures"] = fails;
    return doc;
  }
};

/// U^* pi(x) U = phi(x) on every basis index, for every generator, including
/// the indices where both sides vanish.
inline IntertwineReport verify_intertwine(const BasisMapRep& rep, const BranchingSystem& sys,
                                          const IndexUnitary& u) {
  IntertwineReport rep_out;
  if (sys.model != BranchingSystem::Model::Discrete)
    throw RepError("intertwine: system is not discrete");

  auto phase_at = [&](Index i) { return u.basis_phase[static_cast<std::size_t>(i)]; };

  for (const auto& e : rep.graph.edges()) {
    // phi side
    std::map<Index, std::pair<Index, Phase>> phi;
    for (const auto& a : rep.edge_maps.at(e.id)) phi[a.from] = {a.to, a.weight};
    // pi side through U
    std::map<Index, std::pair<Index, Phase>> pi_conj;
    for (const auto& [s, t] : sys.fd.at(e.id))
      pi_conj[s] = {t, phase_at(s) * phase_at(t).conj()};

    bool edge_ok = true;
    for (Index i = 0; i < rep.lambda_size; ++i) {
      auto a = phi.find(i);
      auto b = pi_conj.find(i);
      bool ok;
      if (a == phi.end() || b == pi_conj.end())
        ok = a == phi.end() && b == pi_conj.end();
      else
        ok = a->second == b->second;
      if (!ok) {
        edge_ok = false;
        rep_out.add("intertwine-S[" + e.id + "]@" + std::to_string(i), false,
                    "sides disagree at basis index " + std::to_string(i));
      }
    }
    rep_out.add("intertwine-S[" + e.id + "]", edge_ok);
  }
  for (const auto& v : rep.graph.vertices()) {
    std::set<Index> hv(rep.vertex_basis.at(v).begin(), rep.vertex_basis.at(v).end());
    std::set<Index> dv(sys.Dd.at(v).begin(), sys.Dd.at(v).end());
    bool ok = hv == dv;  // U is index-preserving: both sides are the same cutoff
    rep_out.add("intertwine-P[" + v + "]", ok, ok ? "" : "projections disagree");
  }
  return rep_out;
}

}  // namespace graphck
