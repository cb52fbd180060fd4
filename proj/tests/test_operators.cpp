#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "graphck/operators.hpp"
#include "support/corpus.hpp"

using namespace graphck;

namespace {

const WeightedPartialInjection& as_discrete(const RepOperator& op) {
  return std::get<WeightedPartialInjection>(op);
}
const BundleOperator& as_bundle(const RepOperator& op) { return std::get<BundleOperator>(op); }

/// Discrete shadow of a bundle system whose maps are all plain relabelings:
/// one index per interval label.
BranchingSystem relabel_shadow(const BranchingSystem& b) {
  std::map<std::string, Index> index_of;
  auto idx = [&](const std::string& label) {
    auto [it, fresh] = index_of.insert({label, static_cast<Index>(index_of.size())});
    return it->second;
  };
  BranchingSystem d;
  d.model = BranchingSystem::Model::Discrete;
  d.graph = b.graph;
  for (const auto& [e, bun] : b.R)
    for (const auto& iv : bun) d.Rd[e].push_back(idx(iv.label));
  for (const auto& [v, bun] : b.D)
    for (const auto& iv : bun) d.Dd[v].push_back(idx(iv.label));
  for (const auto& [e, f] : b.maps)
    for (const auto& p : f.pieces) {
      REQUIRE(p.is_identity_relabel());
      d.fd[e].push_back({idx(p.source.label), idx(p.target.label)});
    }
  for (Index i = 0; i < static_cast<Index>(index_of.size()); ++i) d.lambda.push_back(i);
  for (auto& [e, s] : d.Rd) std::sort(s.begin(), s.end());
  for (auto& [v, s] : d.Dd) std::sort(s.begin(), s.end());
  for (auto& [e, m] : d.fd) std::sort(m.begin(), m.end());
  return d;
}

}  // namespace

TEST_CASE("induced generators on the interleaved rose") {
  auto b = corpus::rose_interleave(2, 4);
  auto s1 = as_discrete(induced_edge_operator(b, "e1"));
  // index m goes to 2m: the 0-based shadow of "m maps to 2m-1"
  REQUIRE(s1.entries.size() == 4);
  CHECK(s1.apply(0)->first == 0);
  CHECK(s1.apply(1)->first == 2);
  CHECK(s1.apply(3)->first == 6);
  CHECK(s1.apply(0)->second.is_one());

  auto p = as_discrete(induced_vertex_operator(b, "v"));
  CHECK(p == WeightedPartialInjection::identity_on(b.Dd.at("v")));
}

TEST_CASE("induced bundle generator carries sqrt-slope weights") {
  Graph g = corpus::from_edges({"a", "b", "v"},
                               {{"d", "a", "v"}, {"e1", "v", "b"}, {"e2", "v", "b"}});
  auto b = standard_construction(g);
  auto sd = as_bundle(induced_edge_operator(b, "d"));
  REQUIRE(sd.pieces.size() == 2);
  // slope of f_d^{-1} is N = 2 on each piece, so the weight is sqrt(2)
  for (const auto& piece : sd.pieces)
    CHECK(piece.weight == Monomial{SqrtScalar::sqrt_of(Rational(2)), Rational(0)});
}

TEST_CASE("adjoint rules") {
  auto b = corpus::rose_interleave(2, 4);
  auto s1 = induced_edge_operator(b, "e1");
  auto p = induced_vertex_operator(b, "v");

  // S_e^* S_e = identity on the materialized domain
  auto sts = op_compose(op_adjoint(s1), s1);
  CHECK(as_discrete(sts) == WeightedPartialInjection::identity_on({0, 1, 2, 3}));

  // a composed with the identity is a
  CHECK(op_equal(op_compose(s1, p), s1));

  // disjoint ranges annihilate
  auto s2 = induced_edge_operator(b, "e2");
  CHECK(op_is_zero(op_compose(op_adjoint(s1), s2)));

  // involution and contravariance
  CHECK(op_equal(op_adjoint(op_adjoint(s1)), s1));
  auto ab = op_compose(s1, s2);
  CHECK(op_equal(op_adjoint(ab), op_compose(op_adjoint(s2), op_adjoint(s1))));
}

TEST_CASE("adjoint involution on bundle operators") {
  for (const auto& [name, g] : corpus::reference_corpus()) {
    auto b = standard_construction(g);
    for (const auto& e : g.edges()) {
      auto s = induced_edge_operator(b, e.id);
      INFO(name << " edge " << e.id);
      CHECK(op_equal(op_adjoint(op_adjoint(s)), s));
    }
  }
}

TEST_CASE("verify_ck passes on the standard systems of the corpus") {
  for (const auto& [name, g] : corpus::reference_corpus()) {
    INFO(name);
    auto b = standard_construction(g);
    auto rep = verify_ck(b, g);
    CHECK(rep.pass);
  }
}

TEST_CASE("verify_ck passes on the interleaved rose including CK3") {
  auto b = corpus::rose_interleave(2, 4);
  auto rep = verify_ck(b, b.graph);
  CHECK(rep.pass);
  bool saw_ck3 = false;
  for (const auto& r : rep.relations)
    if (r.id.rfind("CK3[v]", 0) == 0) {
      saw_ck3 = true;
      CHECK(r.status == "pass");
    }
  CHECK(saw_ck3);
}

TEST_CASE("verify_ck detects a broken CK3") {
  auto b = corpus::rose_interleave(2, 4);
  b.lambda.push_back(8);
  b.Dd["v"].push_back(8);  // D_v strictly larger than the union of ranges
  auto rep = verify_ck(b, b.graph);
  CHECK_FALSE(rep.pass);
  bool ck3_failed = false;
  for (const auto& r : rep.relations)
    if (r.id.rfind("CK3[v]", 0) == 0 && r.status == "fail" && !r.witness.empty()) ck3_failed = true;
  CHECK(ck3_failed);
}

TEST_CASE("path operators reproduce the exitless-cycle dichotomy") {
  for (int n : {1, 2, 3}) {
    Graph g = corpus::cycle(n);
    DirectedCycle cyc = *has_condition_L(g).witness;
    INFO("n = " << n);

    auto collapse = cycle_collapse_system(g, cyc);
    auto word_op = path_operator(collapse, cyc.edges);
    auto proj = induced_vertex_operator(collapse, g.edge(cyc.edges.front()).src);
    CHECK(op_equal(word_op, proj));

    auto separate = cycle_separating_system(g, cyc);
    auto sep_op = as_bundle(path_operator(separate, cyc.edges));
    REQUIRE(sep_op.pieces.size() == 1);
    REQUIRE(sep_op.pieces[0].map.kind == PieceMap::Kind::Power);
    CHECK(Rational(1) / sep_op.pieces[0].map.exponent == (n == 1 ? Rational(2) : Rational(4)));
    CHECK_FALSE(op_equal(path_operator(separate, cyc.edges),
                         induced_vertex_operator(separate, g.edge(cyc.edges.front()).src)));
  }
}

TEST_CASE("modified cycle systems stay CK-exact with an edge entering the cycle") {
  // x --d--> v1 <--> v2: the 2-cycle is exitless (d only enters it)
  Graph g = corpus::from_edges({"x", "v1", "v2"},
                               {{"d", "x", "v1"}, {"e1", "v1", "v2"}, {"e2", "v2", "v1"}});
  auto cl = has_condition_L(g);
  REQUIRE_FALSE(cl.holds);
  REQUIRE(cl.witness->edges == std::vector<std::string>{"e1", "e2"});

  for (bool collapse : {true, false}) {
    auto b = collapse ? cycle_collapse_system(g, *cl.witness)
                      : cycle_separating_system(g, *cl.witness);
    INFO((collapse ? "collapse" : "separate"));
    CHECK(verify_axioms(b, g).pass);
    CHECK(verify_ck(b, g).pass);
    CHECK(check_nonzero(b, g).pass);

    // word through the entering edge and around the cycle once
    auto word = path_operator(b, {"d", "e1", "e2"});
    auto& op = std::get<BundleOperator>(word);
    REQUIRE(op.pieces.size() == 1);
    CHECK(op.pieces[0].map.source.label == "e1");
    CHECK(op.pieces[0].map.target.label == "d");
    if (collapse) {
      CHECK(op.pieces[0].map.kind == PieceMap::Kind::Affine);  // power collapsed away
      CHECK(op.pieces[0].weight.is_one());
    } else {
      CHECK(op.pieces[0].map.kind == PieceMap::Kind::Power);
      CHECK(op.pieces[0].map.exponent == make_rational(1, 4));
    }
  }
}

TEST_CASE("empty word gives the vertex projection; bad words error") {
  auto b = standard_construction(corpus::path3());
  CHECK(op_equal(path_operator(b, {}, "v"), induced_vertex_operator(b, "v")));
  CHECK_THROWS_AS(path_operator(b, {"e2", "e1"}), RepError);  // not composable
}

TEST_CASE("check_nonzero on corpus graphs and an isolated vertex") {
  for (const auto& [name, g] : corpus::reference_corpus()) {
    INFO(name);
    auto b = standard_construction(g);
    CHECK(check_nonzero(b, g).pass);
  }
  Graph iso = corpus::from_edges({"u", "v", "w"}, {{"e", "u", "v"}});
  auto b = standard_construction(iso);
  auto rep = check_nonzero(b, iso);
  CHECK(rep.pass);  // D_w = (0,1] x {w} keeps the isolated projection alive
}

TEST_CASE("check_nonzero flags an engineered empty domain") {
  Graph iso = corpus::from_edges({"u", "v", "w"}, {{"e", "u", "v"}});
  auto b = standard_construction(iso);
  b.D["w"] = {};
  CHECK_FALSE(check_nonzero(b, iso).pass);
}

TEST_CASE("bundle and discrete backends agree on relabel-only systems") {
  // all ranges are sinks or out-degree one, so the standard maps relabel
  for (const Graph& g : {corpus::path3(), corpus::single_edge(), corpus::cycle(3)}) {
    auto bundle = standard_construction(g);
    auto discrete = relabel_shadow(bundle);
    auto rb = verify_ck(bundle, g);
    auto rd = verify_ck(discrete, g);
    CHECK(rb.pass == rd.pass);
    REQUIRE(rb.relations.size() == rd.relations.size());
    for (std::size_t i = 0; i < rb.relations.size(); ++i) {
      CHECK(rb.relations[i].id == rd.relations[i].id);
      CHECK(rb.relations[i].status == rd.relations[i].status);
    }
  }
}

TEST_CASE("weighted injections reject non-injective data") {
  WeightedPartialInjection w;
  w.entries = {{0, 5, Phase::one()}, {1, 5, Phase::one()}};
  CHECK_THROWS_AS(w.canonicalize(), RepError);
}

TEST_CASE("backend mismatch and unknown generators are errors") {
  auto discrete = corpus::rose_interleave(2, 2);
  auto bundle = standard_construction(corpus::rose(2));
  RepOperator a = induced_edge_operator(discrete, "e1");
  RepOperator b = induced_edge_operator(bundle, "e1");
  CHECK_THROWS_AS(op_compose(a, b), RepError);
  CHECK_THROWS_AS(op_equal(a, b), RepError);
  CHECK_THROWS_AS(induced_edge_operator(bundle, "nope"), RepError);
  CHECK_THROWS_AS(induced_vertex_operator(bundle, "nope"), RepError);
}
