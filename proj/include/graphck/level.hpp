#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "graphck/graph.hpp"
#include "graphck/graph_analysis.hpp"

namespace graphck {

enum class VTag { VF, VI };  // extreme vertex is the range / the source of its edge

inline const char* vtag_str(VTag t) { return t == VTag::VF ? "VF" : "VI"; }

namespace detail {

/// Live view of the subgraph chain: vertices/edges still present.
struct LiveGraph {
  const Graph* g;
  std::set<std::string> verts;
  std::set<std::string> edges;

  std::vector<const Edge*> adjacent(const std::string& v) const {
    std::vector<const Edge*> r;
    for (const Edge* e : g->out_edges(v))
      if (edges.count(e->id)) r.push_back(e);
    for (const Edge* e : g->in_edges(v))
      if (edges.count(e->id) && e->src != v) r.push_back(e);  // loop counted once
    return r;
  }
};

}  // namespace detail

/// Extreme vertices of a live subgraph: exactly one adjacent edge, not a
/// loop base, degree not understated by an infinite family or a declared
/// truncation boundary.
inline std::vector<std::string> extreme_vertices_live(const Graph& g, const detail::LiveGraph& lg) {
  std::vector<std::string> out;
  for (const auto& v : lg.verts) {
    if (g.boundary().count(v)) continue;
    if (g.has_family(v)) continue;
    bool family_in = false;
    for (const auto& f : g.families())
      if (f.dst == v) family_in = true;
    if (family_in) continue;
    auto adj = lg.adjacent(v);
    if (adj.size() != 1) continue;
    if (adj.front()->src == v && adj.front()->dst == v) continue;  // loop base
    out.push_back(v);
  }
  return out;
}

inline std::vector<std::string> extreme_vertices(const Graph& g) {
  detail::LiveGraph lg{&g, {}, {}};
  for (const auto& v : g.vertices()) lg.verts.insert(v);
  for (const auto& e : g.edges()) lg.edges.insert(e.id);
  return extreme_vertices_live(g, lg);
}

inline std::vector<std::string> extreme_edges(const Graph& g) {
  detail::LiveGraph lg{&g, {}, {}};
  for (const auto& v : g.vertices()) lg.verts.insert(v);
  for (const auto& e : g.edges()) lg.edges.insert(e.id);
  std::set<std::string> ids;
  for (const auto& v : extreme_vertices_live(g, lg)) ids.insert(lg.adjacent(v).front()->id);
  return {ids.begin(), ids.end()};
}

struct LevelDecomposition {
  std::vector<std::vector<std::string>> levels_x;  // X_1..X_m
  std::vector<std::vector<std::string>> levels_y;  // Y_1..Y_m
  std::vector<std::string> residual;               // Z-vertices never removed
  std::map<std::string, int> level_of;             // 1-based; only leveled vertices
  std::map<std::string, VTag> tag_of;
  std::map<std::string, std::string> extreme_edge_of;  // v in some X_i -> its unique edge
  int m = 0;

  /// i-th subgraph of the chain: the graph with levels 1..i removed
  /// (i = 0 gives the graph back).
  Graph subgraph(const Graph& g, int i) const {
    std::set<std::string> keep(g.vertices().begin(), g.vertices().end());
    for (int lvl = 0; lvl < i && lvl < m; ++lvl)
      for (const auto& v : levels_x[static_cast<std::size_t>(lvl)]) keep.erase(v);
    return g.induced(keep);
  }

  json to_json() const {
    json doc;
    doc["m"] = m;
    doc["levels"] = json::array();
    for (int i = 0; i < m; ++i) {
      json lvl;
      lvl["index"] = i + 1;
      lvl["X"] = levels_x[i];
      lvl["Y"] = levels_y[i];
      json tags = json::object();
      for (const auto& v : levels_x[i]) tags[v] = vtag_str(tag_of.at(v));
      lvl["tags"] = tags;
      doc["levels"].push_back(lvl);
    }
    doc["residual"] = residual;
    doc["tag_note"] = "VF/VI tags are a reconstruction: VF when the vertex is the range of its unique edge";
    return doc;
  }
};

/// Iterated extreme-vertex removal: X_i, Y_i are the extreme vertices/edges
/// of the (i-1)-th subgraph; stops at the first empty level. Residual keeps
/// the Z-vertices never removed.
inline LevelDecomposition decompose(const Graph& g) {
  LevelDecomposition d;
  detail::LiveGraph lg{&g, {}, {}};
  std::set<std::string> z;
  for (const auto& e : g.edges()) {
    z.insert(e.src);
    z.insert(e.dst);
  }
  for (const auto& v : g.vertices()) lg.verts.insert(v);
  for (const auto& e : g.edges()) lg.edges.insert(e.id);

  while (true) {
    auto xs = extreme_vertices_live(g, lg);
    if (xs.empty()) break;
    std::set<std::string> ys;
    int level = static_cast<int>(d.levels_x.size()) + 1;
    for (const auto& v : xs) {
      const Edge* f = lg.adjacent(v).front();
      ys.insert(f->id);
      d.level_of[v] = level;
      d.tag_of[v] = f->dst == v ? VTag::VF : VTag::VI;
      d.extreme_edge_of[v] = f->id;
    }
    for (const auto& v : xs) lg.verts.erase(v);
    for (const auto& y : ys) lg.edges.erase(y);
    d.levels_x.push_back(xs);
    d.levels_y.push_back({ys.begin(), ys.end()});
  }
  d.m = static_cast<int>(d.levels_x.size());
  for (const auto& v : z)
    if (!d.level_of.count(v)) d.residual.push_back(v);
  return d;
}

struct PppClassification {
  enum class Kind { AllLevels, AllLevelsPlusOne, NotApplicable } kind;
  int m = 0;
  std::string vbar;    // AllLevelsPlusOne only
  std::string reason;  // NotApplicable only

  bool applicable() const { return kind != Kind::NotApplicable; }
  json to_json() const {
    json doc;
    switch (kind) {
      case Kind::AllLevels:
        doc["kind"] = "all-levels";
        doc["m"] = m;
        break;
      case Kind::AllLevelsPlusOne:
        doc["kind"] = "all-levels-plus-one";
        doc["m"] = m;
        doc["vbar"] = vbar;
        break;
      case Kind::NotApplicable:
        doc["kind"] = "not-applicable";
        doc["reason"] = reason;
        break;
    }
    return doc;
  }
};

/// The level dichotomy for P-simple graphs with connected Z: either the
/// levels exhaust Z or exactly one vertex is left over.
inline PppClassification classify_ppp(const Graph& g) {
  auto ps = is_P_simple(g);
  if (!ps.p_simple) return {PppClassification::Kind::NotApplicable, 0, "", "not P-simple"};
  auto comps = connected_components(g);
  if (comps.components.size() > 1)
    return {PppClassification::Kind::NotApplicable, 0, "", "Z not connected"};
  if (!g.boundary().empty())
    return {PppClassification::Kind::NotApplicable, 0, "",
            "no finite-vertex level subgraph exists (declared-infinite model)"};
  auto d = decompose(g);
  if (d.residual.empty()) return {PppClassification::Kind::AllLevels, d.m, "", ""};
  if (d.residual.size() == 1)
    return {PppClassification::Kind::AllLevelsPlusOne, d.m, d.residual.front(), ""};
  // unreachable for finite P-simple graphs with connected Z
  return {PppClassification::Kind::NotApplicable, d.m, "", "decomposition residue exceeds one vertex"};
}

struct AuxiliarReport {
  bool pass = true;
  bool applicable = true;
  std::string failed_clause;  // "a", "b", "c-I", "c-II", "d-I", "d-II"
  std::string witness;

  json to_json() const {
    json doc;
    doc["status"] = !applicable ? "not-applicable" : (pass ? "pass" : "fail");
    if (!pass) {
      doc["clause"] = failed_clause;
      doc["witness"] = witness;
    }
    return doc;
  }
};

namespace detail {

inline std::set<std::string> adjacent_vertices(const Graph& g, const std::string& v) {
  std::set<std::string> r;
  for (const Edge* e : g.out_edges(v))
    if (e->dst != v) r.insert(e->dst);
  for (const Edge* e : g.in_edges(v))
    if (e->src != v) r.insert(e->src);
  return r;
}

inline bool connected_in_live(const Graph& g, const LiveGraph& lg, const std::set<std::string>& verts) {
  if (verts.size() <= 1) return true;
  UnionFind uf(g.vertices().size());
  for (const auto& id : lg.edges) {
    const Edge& e = g.edge(id);
    uf.unite(g.vertex_idx(e.src), g.vertex_idx(e.dst));
  }
  int root = uf.find(g.vertex_idx(*verts.begin()));
  for (const auto& v : verts)
    if (uf.find(g.vertex_idx(v)) != root) return false;
  return true;
}

}  // namespace detail

/// Structural facts about a level decomposition: connectivity of the
/// surviving Z-part, the one-higher-neighbour property, and the top-level
/// shape in each branch of the dichotomy.
inline AuxiliarReport check_auxiliar(const Graph& g, const LevelDecomposition& d) {
  AuxiliarReport rep;
  auto cls = classify_ppp(g);
  if (!cls.applicable()) {
    rep.applicable = false;
    return rep;
  }

  std::set<std::string> z;
  for (const auto& e : g.edges()) {
    z.insert(e.src);
    z.insert(e.dst);
  }

  // effective level: removed vertices have their level, survivors count as +inf
  auto level_at_least = [&](const std::string& v, int n) {
    auto it = d.level_of.find(v);
    return it == d.level_of.end() || it->second >= n;
  };
  auto level_greater = [&](const std::string& v, int n) {
    auto it = d.level_of.find(v);
    return it == d.level_of.end() || it->second > n;
  };

  // (a) Z - X_1..X_i stays connected in each subgraph of the chain
  {
    detail::LiveGraph lg{&g, {}, {}};
    for (const auto& v : g.vertices()) lg.verts.insert(v);
    for (const auto& e : g.edges()) lg.edges.insert(e.id);
    std::set<std::string> zrest = z;
    for (int i = 0; i < d.m; ++i) {
      for (const auto& v : d.levels_x[i]) {
        lg.verts.erase(v);
        zrest.erase(v);
      }
      for (const auto& y : d.levels_y[i]) lg.edges.erase(y);
      if (!detail::connected_in_live(g, lg, zrest)) {
        rep.pass = false;
        rep.failed_clause = "a";
        rep.witness = "Z minus X_1..X_" + std::to_string(i + 1) + " disconnected";
        return rep;
      }
    }
  }

  // (b) each leveled vertex has at most one adjacent vertex of level >= its own
  for (const auto& [v, n] : d.level_of) {
    int count = 0;
    for (const auto& w : detail::adjacent_vertices(g, v))
      if (level_at_least(w, n)) ++count;
    if (count > 1) {
      rep.pass = false;
      rep.failed_clause = "b";
      rep.witness = v;
      return rep;
    }
  }

  if (cls.kind == PppClassification::Kind::AllLevels) {
    // (c-I) below the top, exactly one strictly-higher neighbour
    for (const auto& [v, n] : d.level_of) {
      if (n >= d.m) continue;
      int count = 0;
      for (const auto& w : detail::adjacent_vertices(g, v))
        if (level_greater(w, n)) ++count;
      if (count != 1) {
        rep.pass = false;
        rep.failed_clause = "c-I";
        rep.witness = v;
        return rep;
      }
    }
    // (c-II) the top level is two vertices joined by exactly one edge
    if (d.m > 0) {
      const auto& top = d.levels_x[static_cast<std::size_t>(d.m - 1)];
      int joining = 0;
      if (top.size() == 2) {
        for (const auto& e : g.edges()) {
          bool touches_a = e.src == top[0] || e.dst == top[0];
          bool touches_b = e.src == top[1] || e.dst == top[1];
          if (touches_a && touches_b) ++joining;
        }
      }
      if (top.size() != 2 || joining != 1) {
        rep.pass = false;
        rep.failed_clause = "c-II";
        rep.witness = "X_" + std::to_string(d.m);
        return rep;
      }
    }
  } else {
    const std::string& vbar = cls.vbar;
    // (d-I) below the top: adjacent to vbar, or exactly one strictly-higher neighbour
    for (const auto& [v, n] : d.level_of) {
      if (n >= d.m) continue;
      auto adj = detail::adjacent_vertices(g, v);
      if (adj.count(vbar)) continue;
      int count = 0;
      for (const auto& w : adj)
        if (level_greater(w, n)) ++count;
      if (count != 1) {
        rep.pass = false;
        rep.failed_clause = "d-I";
        rep.witness = v;
        return rep;
      }
    }
    // (d-II) each top vertex joins vbar by exactly one edge
    if (d.m > 0) {
      for (const auto& v : d.levels_x[static_cast<std::size_t>(d.m - 1)]) {
        int joining = 0;
        for (const auto& e : g.edges()) {
          bool touches_v = e.src == v || e.dst == v;
          bool touches_bar = e.src == vbar || e.dst == vbar;
          if (touches_v && touches_bar) ++joining;
        }
        if (joining != 1) {
          rep.pass = false;
          rep.failed_clause = "d-II";
          rep.witness = v;
          return rep;
        }
      }
    }
  }
  return rep;
}

}  // namespace graphck
