#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace graphck {

using json = nlohmann::json;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Edge {
  std::string id;
  std::string src;  // s(e)
  std::string dst;  // r(e)
  int family_k = 0;  // > 0 when synthesized from an infinite family
};

struct InfiniteFamily {
  std::string vertex;
  std::string dst;
  std::int64_t truncate_at = 1;
};

/// Finite directed multigraph with optional countably-infinite out-families
/// (materialized up to their truncation index) and optional truncation
/// boundary marks. Immutable after load; all enumerations are in
/// lexicographic id order so every downstream report is deterministic.
class Graph {
 public:
  Graph() = default;

  static Graph from_json(const json& doc, std::optional<std::int64_t> truncate_override = {}) {
    Graph g;
    if (!doc.is_object()) throw GraphError("graph: document is not an object");
    for (const auto& v : doc.value("vertices", json::array())) {
      if (!v.is_string() || v.get<std::string>().empty())
        throw GraphError("graph: vertex ids must be non-empty strings");
      g.vertices_.push_back(v.get<std::string>());
    }
    std::sort(g.vertices_.begin(), g.vertices_.end());
    for (std::size_t i = 0; i + 1 < g.vertices_.size(); ++i)
      if (g.vertices_[i] == g.vertices_[i + 1])
        throw GraphError("graph: duplicate vertex id '" + g.vertices_[i] + "'");
    for (std::size_t i = 0; i < g.vertices_.size(); ++i) g.vertex_index_[g.vertices_[i]] = static_cast<int>(i);

    for (const auto& e : doc.value("edges", json::array())) {
      Edge edge;
      edge.id = e.at("id").get<std::string>();
      edge.src = e.at("src").get<std::string>();
      edge.dst = e.at("dst").get<std::string>();
      if (!g.vertex_index_.count(edge.src))
        throw GraphError("graph: edge '" + edge.id + "' has dangling src '" + edge.src + "'");
      if (!g.vertex_index_.count(edge.dst))
        throw GraphError("graph: edge '" + edge.id + "' has dangling dst '" + edge.dst + "'");
      g.edges_.push_back(std::move(edge));
    }

    for (const auto& f : doc.value("infinite_families", json::array())) {
      InfiniteFamily fam;
      fam.vertex = f.at("vertex").get<std::string>();
      fam.dst = f.at("dst").get<std::string>();
      fam.truncate_at = f.at("truncate_at").get<std::int64_t>();
      if (truncate_override) fam.truncate_at = *truncate_override;
      if (!g.vertex_index_.count(fam.vertex))
        throw GraphError("graph: infinite family at dangling vertex '" + fam.vertex + "'");
      if (!g.vertex_index_.count(fam.dst))
        throw GraphError("graph: infinite family at '" + fam.vertex + "' has dangling dst '" + fam.dst + "'");
      if (fam.truncate_at < 1)
        throw GraphError("graph: infinite family at '" + fam.vertex + "' has truncate_at < 1");
      for (const auto& other : g.families_)
        if (other.vertex == fam.vertex)
          throw GraphError("graph: vertex '" + fam.vertex + "' carries two infinite families");
      // Materialize the prefix e_1..e_N with synthesized ids v#k.
      for (std::int64_t k = 1; k <= fam.truncate_at; ++k) {
        Edge edge;
        edge.id = fam.vertex + "#" + std::to_string(k);
        edge.src = fam.vertex;
        edge.dst = fam.dst;
        edge.family_k = static_cast<int>(k);
        g.edges_.push_back(std::move(edge));
      }
      g.families_.push_back(std::move(fam));
    }

    std::sort(g.edges_.begin(), g.edges_.end(),
              [](const Edge& a, const Edge& b) { return a.id < b.id; });
    for (std::size_t i = 0; i + 1 < g.edges_.size(); ++i)
      if (g.edges_[i].id == g.edges_[i + 1].id)
        throw GraphError("graph: duplicate edge id '" + g.edges_[i].id + "'");
    for (std::size_t i = 0; i < g.edges_.size(); ++i) g.edge_index_[g.edges_[i].id] = static_cast<int>(i);

    for (const auto& b : doc.value("boundary", json::array())) {
      std::string v = b.get<std::string>();
      if (!g.vertex_index_.count(v))
        throw GraphError("graph: boundary mark on unknown vertex '" + v + "'");
      g.boundary_.insert(v);
    }

    g.out_.assign(g.vertices_.size(), {});
    g.in_.assign(g.vertices_.size(), {});
    for (std::size_t i = 0; i < g.edges_.size(); ++i) {
      g.out_[g.vertex_index_[g.edges_[i].src]].push_back(static_cast<int>(i));
      g.in_[g.vertex_index_[g.edges_[i].dst]].push_back(static_cast<int>(i));
    }
    return g;
  }

  static Graph parse(const std::string& text, std::optional<std::int64_t> truncate_override = {}) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw GraphError(std::string("graph: invalid JSON: ") + e.what());
    }
    return from_json(doc, truncate_override);
  }

  json to_json() const {
    json doc;
    doc["vertices"] = vertices_;
    doc["edges"] = json::array();
    for (const auto& e : edges_) {
      if (e.family_k > 0) continue;  // regenerated from the family entry
      doc["edges"].push_back({{"id", e.id}, {"src", e.src}, {"dst", e.dst}});
    }
    if (!families_.empty()) {
      doc["infinite_families"] = json::array();
      for (const auto& f : families_)
        doc["infinite_families"].push_back(
            {{"vertex", f.vertex}, {"dst", f.dst}, {"truncate_at", f.truncate_at}});
    }
    if (!boundary_.empty()) doc["boundary"] = std::vector<std::string>(boundary_.begin(), boundary_.end());
    return doc;
  }

  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<InfiniteFamily>& families() const { return families_; }
  const std::set<std::string>& boundary() const { return boundary_; }

  bool has_vertex(const std::string& v) const { return vertex_index_.count(v) > 0; }
  bool has_edge(const std::string& e) const { return edge_index_.count(e) > 0; }

  const Edge& edge(const std::string& id) const {
    auto it = edge_index_.find(id);
    if (it == edge_index_.end()) throw GraphError("graph: unknown edge '" + id + "'");
    return edges_[it->second];
  }

  int vertex_idx(const std::string& v) const {
    auto it = vertex_index_.find(v);
    if (it == vertex_index_.end()) throw GraphError("graph: unknown vertex '" + v + "'");
    return it->second;
  }

  /// s^{-1}(v), materialized edges in lexicographic id order.
  std::vector<const Edge*> out_edges(const std::string& v) const {
    std::vector<const Edge*> r;
    for (int i : out_[vertex_idx(v)]) r.push_back(&edges_[i]);
    return r;
  }
  /// r^{-1}(v), materialized edges in lexicographic id order.
  std::vector<const Edge*> in_edges(const std::string& v) const {
    std::vector<const Edge*> r;
    for (int i : in_[vertex_idx(v)]) r.push_back(&edges_[i]);
    return r;
  }

  bool has_family(const std::string& v) const {
    for (const auto& f : families_)
      if (f.vertex == v) return true;
    return false;
  }
  const InfiniteFamily* family_at(const std::string& v) const {
    for (const auto& f : families_)
      if (f.vertex == v) return &f;
    return nullptr;
  }

  /// True when #s^{-1}(v) is declared infinite (the materialized list is a
  /// truncation).
  bool out_degree_infinite(const std::string& v) const { return has_family(v); }

  /// Out-edges in the order used by the unit-interval construction at a
  /// vertex with an infinite family: regular edges lexicographic, then the
  /// family prefix by its index k.
  std::vector<const Edge*> out_edges_enumeration(const std::string& v) const {
    std::vector<const Edge*> regular, fam;
    for (int i : out_[vertex_idx(v)]) {
      if (edges_[i].family_k > 0)
        fam.push_back(&edges_[i]);
      else
        regular.push_back(&edges_[i]);
    }
    std::sort(fam.begin(), fam.end(),
              [](const Edge* a, const Edge* b) { return a->family_k < b->family_k; });
    regular.insert(regular.end(), fam.begin(), fam.end());
    return regular;
  }

  bool is_sink(const std::string& v) const {
    return out_[vertex_idx(v)].empty() && !has_family(v);
  }

  std::vector<std::string> sinks() const {
    std::vector<std::string> r;
    for (const auto& v : vertices_)
      if (is_sink(v)) r.push_back(v);
    return r;
  }

  bool row_finite() const { return families_.empty(); }

  /// Count of distinct edges adjacent to v; nullopt when a family makes it
  /// infinite (at v itself or at the family's receiving vertex).
  std::optional<std::size_t> adjacent_edge_count(const std::string& v) const {
    if (has_family(v)) return std::nullopt;
    for (const auto& f : families_)
      if (f.dst == v) return std::nullopt;
    std::set<int> adj;
    int vi = vertex_idx(v);
    for (int i : out_[vi]) adj.insert(i);
    for (int i : in_[vi]) adj.insert(i);
    return adj.size();
  }

  bool is_loop_base(const std::string& v) const {
    for (int i : out_[vertex_idx(v)])
      if (edges_[i].dst == v) return true;
    return false;
  }

  /// Subgraph induced by a vertex subset (keeps edges with both endpoints
  /// inside, families whose vertex and dst are inside, boundary marks).
  Graph induced(const std::set<std::string>& verts) const {
    json doc;
    doc["vertices"] = json::array();
    for (const auto& v : vertices_)
      if (verts.count(v)) doc["vertices"].push_back(v);
    doc["edges"] = json::array();
    for (const auto& e : edges_) {
      if (e.family_k > 0) continue;
      if (verts.count(e.src) && verts.count(e.dst))
        doc["edges"].push_back({{"id", e.id}, {"src", e.src}, {"dst", e.dst}});
    }
    doc["infinite_families"] = json::array();
    for (const auto& f : families_)
      if (verts.count(f.vertex) && verts.count(f.dst))
        doc["infinite_families"].push_back(
            {{"vertex", f.vertex}, {"dst", f.dst}, {"truncate_at", f.truncate_at}});
    doc["boundary"] = json::array();
    for (const auto& b : boundary_)
      if (verts.count(b)) doc["boundary"].push_back(b);
    return from_json(doc);
  }

 private:
  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
  std::vector<InfiniteFamily> families_;
  std::set<std::string> boundary_;
  std::map<std::string, int> vertex_index_;
  std::map<std::string, int> edge_index_;
  std::vector<std::vector<int>> out_, in_;
};

}  // namespace graphck
