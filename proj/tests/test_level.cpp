#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "graphck/level.hpp"
#include "support/corpus.hpp"

using namespace graphck;

TEST_CASE("extreme vertices and edges") {
  CHECK(extreme_vertices(corpus::final9()) ==
        std::vector<std::string>{"v2", "v3", "v4", "v5", "v7", "v8", "v9"});
  CHECK(extreme_vertices(corpus::single_loop()).empty());  // loop base excluded
  CHECK(extreme_vertices(corpus::single_edge()) == std::vector<std::string>{"u", "v"});
  CHECK(extreme_edges(corpus::single_edge()) == std::vector<std::string>{"e"});

  // an infinite family hides the true degree on both of its endpoints
  Graph fam = Graph::parse(
      R"({"vertices":["v","w"],"edges":[],"infinite_families":[{"vertex":"v","dst":"w","truncate_at":1}]})");
  CHECK(extreme_vertices(fam).empty());
}

TEST_CASE("decompose: single edge removes both endpoints at level one") {
  auto d = decompose(corpus::single_edge());
  CHECK(d.m == 1);
  CHECK(d.levels_x[0] == std::vector<std::string>{"u", "v"});
  CHECK(d.levels_y[0] == std::vector<std::string>{"e"});
  CHECK(d.residual.empty());
  CHECK(d.tag_of.at("v") == VTag::VF);
  CHECK(d.tag_of.at("u") == VTag::VI);
}

TEST_CASE("decompose: the middle of a 3-path is left over") {
  auto d = decompose(corpus::path3());
  CHECK(d.m == 1);
  CHECK(d.levels_x[0] == std::vector<std::string>{"u", "w"});
  CHECK(d.residual == std::vector<std::string>{"v"});
  CHECK(d.tag_of.at("u") == VTag::VI);  // u is the source of e1
  CHECK(d.tag_of.at("w") == VTag::VF);  // w is the range of e2
}

TEST_CASE("decompose: declared-infinite line never starts") {
  auto d = decompose(corpus::biline(6));
  CHECK(d.m == 0);
  CHECK(d.residual.size() == 6);  // everything residual, artifacts confined to the marked ends
}

TEST_CASE("classify_ppp") {
  auto se = classify_ppp(corpus::single_edge());
  CHECK(se.kind == PppClassification::Kind::AllLevels);
  CHECK(se.m == 1);

  auto p3 = classify_ppp(corpus::path3());
  CHECK(p3.kind == PppClassification::Kind::AllLevelsPlusOne);
  CHECK(p3.m == 1);
  CHECK(p3.vbar == "v");

  auto kk = classify_ppp(corpus::example_kk());
  CHECK(kk.kind == PppClassification::Kind::NotApplicable);
  CHECK(kk.reason == "not P-simple");

  auto bl = classify_ppp(corpus::biline(6));
  CHECK(bl.kind == PppClassification::Kind::NotApplicable);
  CHECK_THAT(bl.reason, Catch::Matchers::ContainsSubstring("declared-infinite"));

  auto f9 = classify_ppp(corpus::final9());
  CHECK(f9.kind == PppClassification::Kind::NotApplicable);  // Z not connected
}

TEST_CASE("check_auxiliar on the dichotomy examples") {
  {
    Graph g = corpus::single_edge();
    auto rep = check_auxiliar(g, decompose(g));
    CHECK(rep.applicable);
    CHECK(rep.pass);  // c-II: two vertices joined by exactly one edge
  }
  {
    Graph g = corpus::path3();
    auto rep = check_auxiliar(g, decompose(g));
    CHECK(rep.applicable);
    CHECK(rep.pass);  // d-II: both level-1 vertices meet vbar by one edge
  }
  {
    Graph g = corpus::example_kk();
    auto rep = check_auxiliar(g, decompose(g));
    CHECK_FALSE(rep.applicable);
  }
}

TEST_CASE("level sets partition Z and the edge set") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Graph g = corpus::random_graph(seed, 20, 30);
    auto d = decompose(g);
    std::set<std::string> z;
    for (const auto& e : g.edges()) {
      z.insert(e.src);
      z.insert(e.dst);
    }
    std::set<std::string> covered(d.residual.begin(), d.residual.end());
    std::size_t leveled = 0;
    for (const auto& xs : d.levels_x) {
      for (const auto& v : xs) {
        CHECK(covered.insert(v).second);  // pairwise disjoint
        ++leveled;
      }
      CHECK_FALSE(xs.empty());  // monotone: strictly shrinking while nonempty
    }
    CHECK(covered == z);
    CHECK(leveled == d.level_of.size());

    std::set<std::string> removed_edges;
    for (const auto& ys : d.levels_y)
      for (const auto& y : ys) CHECK(removed_edges.insert(y).second);
    CHECK(removed_edges.size() <= g.edges().size());
  }
}

TEST_CASE("random trees always classify into the dichotomy and pass auxiliar") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    Graph g = corpus::random_tree(seed, 24);
    auto cls = classify_ppp(g);
    INFO("seed " << seed);
    CHECK(cls.applicable());
    auto rep = check_auxiliar(g, decompose(g));
    CHECK(rep.applicable);
    CHECK(rep.pass);
    if (cls.kind == PppClassification::Kind::AllLevels) {
      auto d = decompose(g);
      CHECK(d.levels_x[static_cast<std::size_t>(d.m - 1)].size() == 2);
    }
  }
}

TEST_CASE("the subgraph chain removes levels cumulatively") {
  Graph g = corpus::path3();
  auto d = decompose(g);
  Graph e0 = d.subgraph(g, 0);
  CHECK(e0.vertices().size() == 3);
  Graph e1 = d.subgraph(g, 1);
  CHECK(e1.vertices() == std::vector<std::string>{"v"});
  CHECK(e1.edges().empty());
}

TEST_CASE("decomposition json is well formed") {
  auto d = decompose(corpus::path3());
  auto doc = d.to_json();
  CHECK(doc["m"] == 1);
  CHECK(doc["levels"][0]["tags"]["u"] == "VI");
  CHECK(doc["residual"][0] == "v");
}
