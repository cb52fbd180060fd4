#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "graphck/graph.hpp"

namespace graphck {

/// Undirected path u_0..u_n along pairwise-distinct edges e_1..e_n.
/// forward[i] is true when r(e_i) = u_{i-1} and s(e_i) = u_i.
struct UPath {
  std::vector<std::string> vertices;
  std::vector<std::string> edges;
  std::vector<bool> forward;

  bool closed() const {
    return !vertices.empty() && vertices.front() == vertices.back() && !edges.empty();
  }

  /// Edges pairwise distinct and every step consistent with one of the two
  /// orientations.
  bool valid_in(const Graph& g) const {
    if (vertices.size() != edges.size() + 1 || forward.size() != edges.size()) return false;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (!g.has_edge(edges[i]) || !seen.insert(edges[i]).second) return false;
      const Edge& e = g.edge(edges[i]);
      const std::string& prev = vertices[i];
      const std::string& next = vertices[i + 1];
      bool fwd_ok = e.dst == prev && e.src == next;
      bool bwd_ok = e.src == prev && e.dst == next;
      if (forward[i] ? !fwd_ok : !bwd_ok) return false;
    }
    return true;
  }
};

/// Directed cycle e_1..e_n with r(e_i) = s(e_{i+1}) and r(e_n) = s(e_1),
/// stored in canonical rotation (lexicographically least edge id first).
struct DirectedCycle {
  std::vector<std::string> edges;
  std::string base;  // s(e_1)

  bool operator==(const DirectedCycle& o) const { return edges == o.edges; }
  bool operator<(const DirectedCycle& o) const {
    if (edges.size() != o.edges.size()) return edges.size() < o.edges.size();
    return edges < o.edges;
  }
};

inline DirectedCycle canonical_cycle(const Graph& g, std::vector<std::string> edge_ids) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < edge_ids.size(); ++i)
    if (edge_ids[i] < edge_ids[best]) best = i;
  std::rotate(edge_ids.begin(), edge_ids.begin() + static_cast<std::ptrdiff_t>(best), edge_ids.end());
  DirectedCycle c;
  c.base = g.edge(edge_ids.front()).src;
  c.edges = std::move(edge_ids);
  return c;
}

/// All elementary directed cycles, each once up to rotation. Exponential in
/// the worst case; intended for desk-scale graphs.
inline std::vector<DirectedCycle> directed_cycles(const Graph& g) {
  std::vector<DirectedCycle> out;
  const auto& verts = g.vertices();
  // Anchor each cycle at its least vertex; DFS only through vertices >= anchor.
  for (std::size_t a = 0; a < verts.size(); ++a) {
    std::vector<std::string> path_edges;
    std::set<std::string> on_path;  // vertices other than the anchor
    std::function<void(const std::string&)> dfs = [&](const std::string& u) {
      for (const Edge* e : g.out_edges(u)) {
        const std::string& w = e->dst;
        if (g.vertex_idx(w) < static_cast<int>(a)) continue;
        if (w == verts[a]) {
          path_edges.push_back(e->id);
          out.push_back(canonical_cycle(g, path_edges));
          path_edges.pop_back();
          continue;
        }
        if (on_path.count(w)) continue;
        on_path.insert(w);
        path_edges.push_back(e->id);
        dfs(w);
        path_edges.pop_back();
        on_path.erase(w);
      }
    };
    dfs(verts[a]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct ConditionLResult {
  bool holds = true;
  std::optional<DirectedCycle> witness;  // an exitless cycle when !holds
};

/// Condition (L): every directed cycle has an exit (an edge with source on
/// the cycle that is not a cycle edge; a truncated-infinite family counts
/// as an exit). An exitless cycle lives entirely in the subgraph of
/// out-degree-exactly-one vertices, so we walk that functional subgraph
/// instead of enumerating cycles.
inline ConditionLResult has_condition_L(const Graph& g) {
  std::map<std::string, const Edge*> next;
  for (const auto& v : g.vertices()) {
    if (g.has_family(v)) continue;
    auto out = g.out_edges(v);
    if (out.size() == 1) next[v] = out.front();
  }
  std::set<std::string> done;
  for (const auto& entry : next) {
    const std::string& start = entry.first;
    if (done.count(start)) continue;
    std::vector<std::string> order;
    std::map<std::string, std::size_t> pos;
    std::string u = start;
    while (next.count(u) && !done.count(u) && !pos.count(u)) {
      pos[u] = order.size();
      order.push_back(u);
      u = next[u]->dst;
    }
    if (pos.count(u)) {  // closed a cycle within this walk
      std::vector<std::string> cyc;
      for (std::size_t i = pos[u]; i < order.size(); ++i) cyc.push_back(next[order[i]]->id);
      return {false, canonical_cycle(g, cyc)};
    }
    for (const auto& v : order) done.insert(v);
  }
  return {true, std::nullopt};
}

struct PSimpleResult {
  bool p_simple = true;
  std::optional<UPath> witness;  // an undirected cycle when !p_simple
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<int>(i);
  }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

// BFS path between two vertices through an explicit undirected edge list.
inline std::optional<UPath> forest_path(const std::vector<const Edge*>& forest,
                                        const std::string& from, const std::string& to) {
  std::map<std::string, std::vector<const Edge*>> adj;
  for (const Edge* e : forest) {
    adj[e->src].push_back(e);
    adj[e->dst].push_back(e);
  }
  std::map<std::string, std::pair<const Edge*, std::string>> via;  // vertex -> (edge, previous)
  std::deque<std::string> q{from};
  std::set<std::string> seen{from};
  while (!q.empty()) {
    std::string u = q.front();
    q.pop_front();
    if (u == to) break;
    for (const Edge* e : adj[u]) {
      std::string w = e->src == u ? e->dst : e->src;
      if (seen.count(w)) continue;
      seen.insert(w);
      via[w] = {e, u};
      q.push_back(w);
    }
  }
  if (!seen.count(to)) return std::nullopt;
  UPath p;
  std::vector<std::pair<const Edge*, std::string>> rev;
  std::string u = to;
  while (u != from) {
    auto [e, prev] = via[u];
    rev.push_back({e, u});
    u = prev;
  }
  p.vertices.push_back(from);
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
    const Edge* e = it->first;
    const std::string& w = it->second;
    p.edges.push_back(e->id);
    p.forward.push_back(e->dst == p.vertices.back() && e->src == w);
    p.vertices.push_back(w);
  }
  return p;
}

}  // namespace detail

/// True iff the underlying undirected multigraph has no cycle (loops and
/// parallel edges count). A declared infinite family is an infinite bundle
/// of parallel edges, so it breaks P-simplicity no matter how small its
/// materialized truncation is; the witness uses the first two materialized
/// edges when they exist.
inline PSimpleResult is_P_simple(const Graph& g) {
  for (const auto& f : g.families()) {
    UPath w;
    w.vertices = {f.vertex, f.dst, f.vertex};
    if (f.truncate_at >= 2) {
      w.edges = {f.vertex + "#1", f.vertex + "#2"};
      w.forward = {false, true};
      return {false, w};
    }
    return {false, std::nullopt};  // the parallel partner is not materialized
  }
  detail::UnionFind uf(g.vertices().size());
  std::vector<const Edge*> forest;
  for (const auto& e : g.edges()) {
    if (e.src == e.dst) {
      UPath w;
      w.vertices = {e.src, e.dst};
      w.edges = {e.id};
      w.forward = {true};
      return {false, w};
    }
    int a = g.vertex_idx(e.src), b = g.vertex_idx(e.dst);
    if (uf.find(a) == uf.find(b)) {
      auto path = detail::forest_path(forest, e.dst, e.src);
      UPath w = path.value();
      // close the cycle with e itself: e connects s(e)=back to r(e)=front
      w.edges.push_back(e.id);
      w.forward.push_back(false);
      w.vertices.push_back(e.dst);
      return {false, w};
    }
    uf.unite(a, b);
    forest.push_back(&e);
  }
  return {true, std::nullopt};
}

struct Components {
  std::vector<std::set<std::string>> components;  // Z_{v_i}, sorted by least vertex
  std::set<std::string> isolated;                 // R = E^0 - Z
  std::vector<Graph> subgraphs;                   // induced E^{v_i}
};

inline Components connected_components(const Graph& g) {
  detail::UnionFind uf(g.vertices().size());
  std::set<std::string> in_z;
  for (const auto& e : g.edges()) {
    uf.unite(g.vertex_idx(e.src), g.vertex_idx(e.dst));
    in_z.insert(e.src);
    in_z.insert(e.dst);
  }
  std::map<int, std::set<std::string>> byroot;
  Components out;
  for (const auto& v : g.vertices()) {
    if (in_z.count(v))
      byroot[uf.find(g.vertex_idx(v))].insert(v);
    else
      out.isolated.insert(v);
  }
  for (auto& [root, verts] : byroot) out.components.push_back(std::move(verts));
  std::sort(out.components.begin(), out.components.end(),
            [](const auto& a, const auto& b) { return *a.begin() < *b.begin(); });
  for (const auto& c : out.components) out.subgraphs.push_back(g.induced(c));
  return out;
}

/// Exhaustive undirected-path enumeration between two vertices (edges
/// pairwise distinct). Test oracle for P-simplicity and connectivity.
inline std::vector<UPath> all_upaths(const Graph& g, const std::string& from, const std::string& to,
                                     std::size_t cap = 100000) {
  std::vector<UPath> out;
  UPath cur;
  cur.vertices.push_back(from);
  std::set<std::string> used;
  std::function<void(const std::string&)> dfs = [&](const std::string& u) {
    if (out.size() >= cap) return;
    if (u == to && !cur.edges.empty()) {
      out.push_back(cur);
      return;
    }
    for (const auto& e : g.edges()) {
      if (used.count(e.id)) continue;
      bool fwd = e.dst == u;          // r(e)=u_{i-1}, continue at s(e)
      bool bwd = e.src == u;          // s(e)=u_{i-1}, continue at r(e)
      for (int dir = 0; dir < 2; ++dir) {
        if (dir == 0 && !fwd) continue;
        if (dir == 1 && !bwd) continue;
        if (dir == 1 && e.src == e.dst) continue;  // loop already tried once
        std::string w = dir == 0 ? e.src : e.dst;
        used.insert(e.id);
        cur.edges.push_back(e.id);
        cur.forward.push_back(dir == 0);
        cur.vertices.push_back(w);
        dfs(w);
        cur.vertices.pop_back();
        cur.forward.pop_back();
        cur.edges.pop_back();
        used.erase(e.id);
      }
    }
  };
  dfs(from);
  return out;
}

}  // namespace graphck
