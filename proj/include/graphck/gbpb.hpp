#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "graphck/basis_rep.hpp"
#include "graphck/graph.hpp"
#include "graphck/graph_analysis.hpp"
#include "graphck/level.hpp"

namespace graphck {

struct ComponentVerdict {
  std::vector<std::string> vertices;
  bool p_simple = false;
  PppClassification classification{PppClassification::Kind::NotApplicable, 0, "", ""};
  bool ok = false;
  std::string reason;
};

struct GbpbHypotheses {
  bool ok = true;  // conjunction over components
  std::vector<ComponentVerdict> components;

  json to_json() const {
    json doc;
    doc["ok"] = ok;
    doc["components"] = json::array();
    for (const auto& c : components) {
      json j;
      j["vertices"] = c.vertices;
      j["p_simple"] = c.p_simple;
      j["classification"] = c.classification.to_json();
      j["ok"] = c.ok;
      if (!c.reason.empty()) j["reason"] = c.reason;
      doc["components"].push_back(j);
    }
    return doc;
  }
};

/// Componentwise hypotheses for the inductive basis assignment: each
/// connected piece of Z must be P-simple with an eventually-finite level
/// decomposition. The whole-graph verdict is the conjunction.
inline GbpbHypotheses gbpb_hypotheses(const Graph& g) {
  GbpbHypotheses rep;
  auto comps = connected_components(g);
  for (std::size_t i = 0; i < comps.components.size(); ++i) {
    ComponentVerdict cv;
    cv.vertices.assign(comps.components[i].begin(), comps.components[i].end());
    const Graph& sub = comps.subgraphs[i];
    cv.p_simple = is_P_simple(sub).p_simple;
    cv.classification = classify_ppp(sub);
    if (!cv.p_simple) {
      cv.ok = false;
      cv.reason = "not P-simple";
    } else if (!cv.classification.applicable()) {
      cv.ok = false;
      cv.reason = cv.classification.reason;
    } else {
      cv.ok = true;
    }
    if (!cv.ok) rep.ok = false;
    rep.components.push_back(std::move(cv));
  }
  return rep;
}

struct PlanStep {
  enum class Op { ChooseFree, PullbackEdge, UnionVertex, ExtendVertex } op;
  std::string target;       // vertex id, or edge id for PullbackEdge
  std::string from_vertex;  // PullbackEdge: the range vertex supplying the basis
  std::string phase;        // provenance: "vf-level-2", "vi-level-1", "extra", "cycle", "isolated"

  json to_json() const {
    json j;
    switch (op) {
      case Op::ChooseFree: j["op"] = "choose-free"; break;
      case Op::PullbackEdge: j["op"] = "pullback-edge"; break;
      case Op::UnionVertex: j["op"] = "union-vertex"; break;
      case Op::ExtendVertex: j["op"] = "extend-vertex"; break;
    }
    j["target"] = target;
    if (!from_vertex.empty()) j["from"] = from_vertex;
    j["phase"] = phase;
    return j;
  }
};

struct GbpbPlan {
  std::vector<PlanStep> steps;
  std::string strategy;  // "level-sweep", "single-cycle", or both comma-joined
  std::string note;

  json to_json() const {
    json doc;
    doc["strategy"] = strategy;
    if (!note.empty()) doc["note"] = note;
    doc["steps"] = json::array();
    for (const auto& s : steps) doc["steps"].push_back(s.to_json());
    return doc;
  }
};

namespace detail {

/// Emission-order simulator: every family is assigned exactly once and every
/// use happens after its assignment. A violation here falsifies the sweep's
/// no-overwrite claims and is a bug, not an input error.
class PlanSim {
 public:
  explicit PlanSim(const Graph& g) : g_(&g) {}

  void choose_free(const std::string& v) { assign_vertex(v, "choose-free"); }
  void union_vertex(const std::string& v) {
    for (const Edge* e : g_->out_edges(v))
      if (!edges_.count(e->id))
        throw PlanError("plan claim violation: union at " + v + " before B_" + e->id);
    assign_vertex(v, "union");
  }
  void extend_vertex(const std::string& v) { union_vertex(v); }
  void pullback(const std::string& e, const std::string& from) {
    if (g_->edge(e).dst != from)
      throw PlanError("plan claim violation: pullback of " + e + " from non-range vertex " + from);
    if (!verts_.count(from))
      throw PlanError("plan claim violation: pullback of " + e + " before B_" + from);
    if (edges_.count(e)) throw PlanError("plan claim violation: B_" + e + " assigned twice");
    edges_.insert(e);
  }
  void finish() const {
    for (const auto& v : g_->vertices())
      if (!verts_.count(v)) throw PlanError("plan claim violation: B_" + v + " never assigned");
    for (const auto& e : g_->edges())
      if (!edges_.count(e.id)) throw PlanError("plan claim violation: B_" + e.id + " never assigned");
  }

 private:
  void assign_vertex(const std::string& v, const std::string& how) {
    if (verts_.count(v)) throw PlanError("plan claim violation: B_" + v + " assigned twice (" + how + ")");
    verts_.insert(v);
  }
  const Graph* g_;
  std::set<std::string> verts_, edges_;
};

inline void emit_vertex_assignment(const Graph& g, const std::string& v, const std::string& phase,
                                   std::vector<PlanStep>& steps) {
  auto out = g.out_edges(v);
  if (out.empty() && !g.has_family(v))
    steps.push_back({PlanStep::Op::ChooseFree, v, "", phase});
  else if (g.has_family(v))
    steps.push_back({PlanStep::Op::ExtendVertex, v, "", phase});
  else
    steps.push_back({PlanStep::Op::UnionVertex, v, "", phase});
}

inline void emit_pullbacks(const Graph& g, const std::string& v, const std::string& phase,
                           std::vector<PlanStep>& steps) {
  for (const Edge* e : g.in_edges(v))
    steps.push_back({PlanStep::Op::PullbackEdge, e->id, v, phase});
}

/// The two inductive sweeps of the basis-assignment procedure for one
/// component that satisfies the hypotheses: upward over range-extreme (VF)
/// vertices by level, the extra step for the leftover vertex, then downward
/// over source-extreme (VI) vertices.
inline void plan_level_sweep(const Graph& g, const std::set<std::string>& comp,
                             const LevelDecomposition& d, std::vector<PlanStep>& steps) {
  std::optional<std::string> vbar;
  for (const auto& v : d.residual)
    if (comp.count(v)) {
      if (vbar) throw PlanError("plan: component residue exceeds one vertex");
      vbar = v;
    }
  int mcomp = 0;
  for (const auto& [v, lvl] : d.level_of)
    if (comp.count(v)) mcomp = std::max(mcomp, lvl);

  for (int i = 1; i <= mcomp; ++i)
    for (const auto& v : d.levels_x[static_cast<std::size_t>(i - 1)]) {
      if (!comp.count(v) || d.tag_of.at(v) != VTag::VF) continue;
      std::string phase = "vf-level-" + std::to_string(i);
      emit_vertex_assignment(g, v, phase, steps);
      emit_pullbacks(g, v, phase, steps);
    }
  if (vbar) {
    emit_vertex_assignment(g, *vbar, "extra", steps);
    emit_pullbacks(g, *vbar, "extra", steps);
  }
  for (int i = mcomp; i >= 1; --i)
    for (const auto& v : d.levels_x[static_cast<std::size_t>(i - 1)]) {
      if (!comp.count(v) || d.tag_of.at(v) != VTag::VI) continue;
      std::string phase = "vi-level-" + std::to_string(i);
      emit_vertex_assignment(g, v, phase, steps);
      emit_pullbacks(g, v, phase, steps);
    }
}

/// Alternative ordering for a component that is a single undirected cycle
/// with at least one in-degree-2 vertex: seed free bases at those vertices
/// and propagate pullbacks/unions around the cycle.
inline bool single_cycle_eligible(const Graph& g, const std::set<std::string>& comp) {
  std::size_t edge_count = 0;
  for (const auto& e : g.edges())
    if (comp.count(e.src)) ++edge_count;
  if (edge_count != comp.size()) return false;
  bool has_sink_of_two = false;
  for (const auto& v : comp) {
    auto cnt = g.adjacent_edge_count(v);
    if (!cnt || *cnt != 2 || g.is_loop_base(v)) return false;
    if (g.in_edges(v).size() == 2) has_sink_of_two = true;
  }
  return has_sink_of_two;
}

inline void plan_single_cycle(const Graph& g, const std::set<std::string>& comp,
                              std::vector<PlanStep>& steps) {
  std::set<std::string> vdone, edone;
  for (const auto& v : comp)
    if (g.in_edges(v).size() == 2) {
      steps.push_back({PlanStep::Op::ChooseFree, v, "", "cycle-seed"});
      vdone.insert(v);
    }
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& e : g.edges()) {
      if (!comp.count(e.src) || edone.count(e.id) || !vdone.count(e.dst)) continue;
      steps.push_back({PlanStep::Op::PullbackEdge, e.id, e.dst, "cycle"});
      edone.insert(e.id);
      progress = true;
    }
    for (const auto& v : comp) {
      if (vdone.count(v)) continue;
      bool ready = true;
      for (const Edge* e : g.out_edges(v))
        if (!edone.count(e->id)) ready = false;
      if (!ready) continue;
      steps.push_back({PlanStep::Op::UnionVertex, v, "", "cycle"});
      vdone.insert(v);
      progress = true;
    }
  }
  if (vdone.size() != comp.size())
    throw PlanError("plan: cycle propagation failed to cover the component");
}

}  // namespace detail

/// Ordered basis-assignment plan for the whole graph. Components satisfying
/// the hypotheses get the two-sweep procedure; a component that is a single
/// undirected cycle with an in-degree-2 vertex gets the seeded cycle
/// ordering; anything else is an error.
inline GbpbPlan gbpb_plan(const Graph& g) {
  GbpbPlan plan;
  auto comps = connected_components(g);
  auto d = decompose(g);
  std::set<std::string> strategies;
  for (std::size_t i = 0; i < comps.components.size(); ++i) {
    const auto& comp = comps.components[i];
    const Graph& sub = comps.subgraphs[i];
    auto cls = classify_ppp(sub);
    if (is_P_simple(sub).p_simple && cls.applicable()) {
      detail::plan_level_sweep(g, comp, d, plan.steps);
      strategies.insert("level-sweep");
    } else if (detail::single_cycle_eligible(g, comp)) {
      detail::plan_single_cycle(g, comp, plan.steps);
      strategies.insert("single-cycle");
      plan.note = "single-cycle ordering is the in-degree-2 seeding recipe, not the level sweep";
    } else {
      throw PlanError("plan: component containing '" + *comp.begin() +
                      "' fails the hypotheses: " +
                      (is_P_simple(sub).p_simple ? cls.reason : "not P-simple"));
    }
  }
  for (const auto& v : comps.isolated)
    plan.steps.push_back({PlanStep::Op::ChooseFree, v, "", "isolated"});

  detail::PlanSim sim(g);
  for (const auto& s : plan.steps) {
    switch (s.op) {
      case PlanStep::Op::ChooseFree: sim.choose_free(s.target); break;
      case PlanStep::Op::UnionVertex: sim.union_vertex(s.target); break;
      case PlanStep::Op::ExtendVertex: sim.extend_vertex(s.target); break;
      case PlanStep::Op::PullbackEdge: sim.pullback(s.target, s.from_vertex); break;
    }
  }
  sim.finish();

  std::string joined;
  for (const auto& s : strategies) joined += (joined.empty() ? "" : ",") + s;
  plan.strategy = joined.empty() ? "trivial" : joined;
  return plan;
}

/// Entry point taking precomputed analysis: validates the supplied
/// classification, then defers to the whole-graph planner (which re-derives
/// the per-component views it needs).
inline GbpbPlan gbpb_plan(const Graph& g, const LevelDecomposition&, const PppClassification& c) {
  if (c.kind == PppClassification::Kind::NotApplicable && c.reason != "Z not connected")
    throw PlanError("plan: hypotheses fail: " + c.reason);
  return gbpb_plan(g);
}

/// Runs a plan against a representation: free choices take the given index
/// sets (gauge phases 1, or seeded eighth roots of unity when seed != 0),
/// pullbacks apply tau_e with the edge weight. Asserts the nesting and
/// pullback conclusions and returns the certificate they realize.
inline PermutativityCertificate execute_plan(const GbpbPlan& plan, const BasisMapRep& rep,
                                             std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  auto fresh_phase = [&]() {
    if (seed == 0) return Phase::one();
    return Phase(make_rational(static_cast<std::int64_t>(rng() % 8), 8));
  };

  std::map<std::string, std::map<Index, Phase>> bv, be;
  auto require = [](bool cond, const std::string& msg) {
    if (!cond) throw PlanError("execute: " + msg);
  };

  for (const auto& s : plan.steps) {
    switch (s.op) {
      case PlanStep::Op::ChooseFree: {
        require(!bv.count(s.target), "B_" + s.target + " already assigned");
        std::map<Index, Phase> basis;
        for (Index i : rep.vertex_basis.at(s.target)) basis[i] = fresh_phase();
        bv[s.target] = std::move(basis);
        break;
      }
      case PlanStep::Op::PullbackEdge: {
        require(!be.count(s.target), "B_" + s.target + " already assigned");
        require(rep.graph.edge(s.target).dst == s.from_vertex,
                "pullback of " + s.target + " from a vertex other than its range");
        require(bv.count(s.from_vertex) > 0, "pullback of " + s.target + " before B_" + s.from_vertex);
        const auto& from = bv.at(s.from_vertex);
        std::map<Index, Phase> basis;
        for (const auto& arc : rep.edge_maps.at(s.target)) {
          auto it = from.find(arc.from);
          require(it != from.end(), "pullback of " + s.target + " misses index " +
                                        std::to_string(arc.from) + " in B_" + s.from_vertex);
          basis[arc.to] = it->second * arc.weight;
        }
        be[s.target] = std::move(basis);
        break;
      }
      case PlanStep::Op::UnionVertex:
      case PlanStep::Op::ExtendVertex: {
        require(!bv.count(s.target), "B_" + s.target + " already assigned");
        std::map<Index, Phase> basis;
        for (const Edge* e : rep.graph.out_edges(s.target)) {
          require(be.count(e->id) > 0, "union at " + s.target + " before B_" + e->id);
          const auto& src = be.at(e->id);
          for (const auto& [idx, ph] : src) {
            require(!basis.count(idx), "union at " + s.target + " repeats index " + std::to_string(idx));
            basis[idx] = ph;
          }
        }
        if (s.op == PlanStep::Op::ExtendVertex) {
          for (Index i : rep.vertex_basis.at(s.target))
            if (!basis.count(i)) basis[i] = fresh_phase();  // reserve indices
        } else if (!rep.graph.has_family(s.target) && !rep.graph.out_edges(s.target).empty()) {
          IndexSet keys;
          for (const auto& [idx, ph] : basis) keys.push_back(idx);
          require(keys == rep.vertex_basis.at(s.target),
                  "union at " + s.target + " is not a total orthonormal set of H_" + s.target);
        }
        bv[s.target] = std::move(basis);
        break;
      }
    }
  }

  for (const auto& v : rep.graph.vertices())
    require(bv.count(v) > 0, "plan never assigned B_" + v);
  for (const auto& e : rep.graph.edges())
    require(be.count(e.id) > 0, "plan never assigned B_" + e.id);

  // conclusion 1: B_e inside B_{s(e)}, with union when out-degree is finite
  for (const auto& e : rep.graph.edges()) {
    const auto& sub = be.at(e.id);
    const auto& sup = bv.at(e.src);
    for (const auto& [idx, ph] : sub) {
      auto it = sup.find(idx);
      if (it == sup.end() || !(it->second == ph))
        throw PlanError("execute: conclusion 1 fails: B_" + e.id + " not inside B_" + e.src);
    }
  }
  // conclusion 2: phi(S_e)(B_{r(e)}) = B_e exactly
  for (const auto& e : rep.graph.edges()) {
    std::map<Index, Phase> image;
    for (const auto& arc : rep.edge_maps.at(e.id))
      image[arc.to] = bv.at(e.dst).at(arc.from) * arc.weight;
    if (!(image == be.at(e.id)))
      throw PlanError("execute: conclusion 2 fails at edge " + e.id);
  }

  PermutativityCertificate cert;
  cert.permutative = true;
  cert.gauge.assign(static_cast<std::size_t>(rep.lambda_size), Phase::one());
  for (const auto& [v, basis] : bv)
    for (const auto& [idx, ph] : basis) cert.gauge[static_cast<std::size_t>(idx)] = ph;
  for (const auto& [v, basis] : bv) {
    IndexSet s;
    for (const auto& [idx, ph] : basis) s.push_back(idx);
    cert.B_v[v] = std::move(s);
  }
  for (const auto& [e, basis] : be) {
    IndexSet s;
    for (const auto& [idx, ph] : basis) s.push_back(idx);
    cert.B_e[e] = std::move(s);
  }
  return cert;
}

}  // namespace graphck
