#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "graphck/interval.hpp"

using namespace graphck;

namespace {

PiecewiseMap one_piece(PieceMap p) { return PiecewiseMap{{std::move(p)}}; }

/// Random exact bijection (0,1]x{a} -> (0,1]x{b} from a random rational
/// partition, for the round-trip properties.
PiecewiseMap random_affine_map(std::mt19937_64& rng, const std::string& src_label,
                               const std::string& dst_label) {
  int n = 1 + static_cast<int>(rng() % 4);
  std::vector<Rational> src_cuts{Rational(0)}, dst_cuts{Rational(0)};
  for (int i = 1; i < n; ++i) {
    src_cuts.push_back(make_rational(static_cast<std::int64_t>(1 + rng() % 30), 31));
    dst_cuts.push_back(make_rational(static_cast<std::int64_t>(1 + rng() % 30), 31));
  }
  std::sort(src_cuts.begin(), src_cuts.end());
  src_cuts.erase(std::unique(src_cuts.begin(), src_cuts.end()), src_cuts.end());
  dst_cuts.resize(src_cuts.size());
  std::sort(dst_cuts.begin(), dst_cuts.end());
  dst_cuts.erase(std::unique(dst_cuts.begin(), dst_cuts.end()), dst_cuts.end());
  while (dst_cuts.size() < src_cuts.size())
    dst_cuts.push_back((dst_cuts.back() + 1) / 2);
  std::sort(dst_cuts.begin(), dst_cuts.end());
  src_cuts.push_back(Rational(1));
  dst_cuts.push_back(Rational(1));
  PiecewiseMap m;
  for (std::size_t i = 0; i + 1 < src_cuts.size(); ++i)
    m.pieces.push_back(PieceMap::affine(LInterval(src_label, src_cuts[i], src_cuts[i + 1]),
                                        LInterval(dst_label, dst_cuts[i], dst_cuts[i + 1])));
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("measure sums interval lengths") {
  CHECK(measure({LInterval::full("e")}) == 1);
  CHECK(measure({}) == 0);
  CHECK(measure({LInterval("a", Rational(0), make_rational(1, 2)),
                 LInterval("b", make_rational(1, 2), Rational(1))}) == 1);
}

TEST_CASE("bundle normalization merges and rejects overlap") {
  Bundle b{LInterval("x", make_rational(1, 2), Rational(1)), LInterval("x", Rational(0), make_rational(1, 2))};
  Bundle n = normalize_bundle(b);
  REQUIRE(n.size() == 1);
  CHECK(n[0].is_full());
  CHECK_THROWS_AS(normalize_bundle(Bundle{LInterval("x", Rational(0), make_rational(2, 3)),
                                          LInterval("x", make_rational(1, 3), Rational(1))}),
                  IntervalError);
  CHECK(bundle_difference({LInterval::full("x")},
                          {LInterval("x", make_rational(1, 3), make_rational(1, 2))}) ==
        Bundle{LInterval("x", Rational(0), make_rational(1, 3)),
               LInterval("x", make_rational(1, 2), Rational(1))});
}

TEST_CASE("compose: power exponents multiply") {
  auto half = one_piece(PieceMap::power("a", "a", make_rational(1, 2)));
  auto quarter = compose(half, half);
  REQUIRE(quarter.pieces.size() == 1);
  CHECK(quarter.pieces[0].kind == PieceMap::Kind::Power);
  CHECK(quarter.pieces[0].exponent == make_rational(1, 4));
}

TEST_CASE("compose: square after square root collapses to the identity") {
  auto sq = one_piece(PieceMap::power("a", "a", Rational(2)));
  auto rt = one_piece(PieceMap::power("a", "a", make_rational(1, 2)));
  auto composite = compose(sq, rt);
  CHECK(composite.is_identity());
  CHECK(composite == PiecewiseMap::identity_on({LInterval::full("a")}));
}

TEST_CASE("compose: affine pieces compose with slope product") {
  // two half-scale maps stacked: composite slope 1/4 on the refined pieces
  auto f = one_piece(PieceMap::affine(LInterval::full("a"), LInterval("a", Rational(0), make_rational(1, 2))));
  PiecewiseMap g;
  g.pieces.push_back(PieceMap::affine(LInterval::full("b"), LInterval("a", Rational(0), make_rational(1, 2))));
  // fill the rest of f's domain so the bundles match
  g.pieces.push_back(
      PieceMap::affine(LInterval::full("c"), LInterval("a", make_rational(1, 2), Rational(1))));
  auto composite = compose(f, g);
  REQUIRE(composite.pieces.size() == 2);
  CHECK(composite.pieces[0].slope == make_rational(1, 4));
  CHECK(composite.pieces[0].source.label == "b");
  CHECK(composite.pieces[0].target == LInterval("a", Rational(0), make_rational(1, 4)));
  CHECK(composite.pieces[1].slope == make_rational(1, 4));
}

TEST_CASE("compose rejects domain mismatch and nontrivial mixed pieces") {
  auto power = one_piece(PieceMap::power("a", "a", make_rational(1, 2)));
  auto small = one_piece(
      PieceMap::affine(LInterval("a", Rational(0), make_rational(1, 2)), LInterval("a", Rational(0), make_rational(1, 2))));
  CHECK_THROWS_AS(compose(power, small), IntervalError);  // domain mismatch

  PiecewiseMap split;  // bundles match but the inner pieces are not relabelings
  split.pieces.push_back(
      PieceMap::affine(LInterval::full("b"), LInterval("a", Rational(0), make_rational(1, 2))));
  split.pieces.push_back(
      PieceMap::affine(LInterval::full("c"), LInterval("a", make_rational(1, 2), Rational(1))));
  CHECK_THROWS_WITH(compose(power, split), Catch::Matchers::ContainsSubstring("mixed"));

  auto shift = one_piece(PieceMap::affine(LInterval::full("a"), LInterval::full("a")));
  shift.pieces[0].slope = make_rational(1, 2);  // no longer onto: invalid piece
  CHECK_THROWS_AS(shift.validate(), IntervalError);
}

TEST_CASE("invert") {
  auto id = PiecewiseMap::identity_on({LInterval::full("a")});
  CHECK(invert(id) == id);

  auto rt = one_piece(PieceMap::power("a", "b", make_rational(1, 2)));
  auto sq = invert(rt);
  CHECK(sq.pieces[0].exponent == 2);
  CHECK(sq.pieces[0].source.label == "b");
  CHECK(invert(sq) == rt);

  auto aff = one_piece(PieceMap::affine(LInterval::full("a"),
                                        LInterval("a", make_rational(1, 3), make_rational(2, 3))));
  CHECK(aff.pieces[0].slope == make_rational(1, 3));
  auto inv = invert(aff);
  CHECK(inv.pieces[0].slope == 3);
  CHECK(inv.pieces[0].source == LInterval("a", make_rational(1, 3), make_rational(2, 3)));
  CHECK(inv.pieces[0].target.is_full());
}

TEST_CASE("round-trip properties on random affine maps") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_affine_map(rng, "a", "b");
    CHECK(invert(invert(f)) == f);
    CHECK(compose(f, invert(f)) == PiecewiseMap::identity_on(f.codomain()));
    CHECK(compose(invert(f), f) == PiecewiseMap::identity_on(f.domain()));
  }
}

TEST_CASE("radon-nikodym densities") {
  auto id = PiecewiseMap::identity_on({LInterval::full("a")});
  auto rn_id = radon_nikodym(id);
  CHECK(rn_id.forward.is_identically_one());
  CHECK(rn_id.chain_rule_ok);

  // affine slope 1/N: the pushforward of (a,b] has length (b-a)/N
  auto fifth = one_piece(
      PieceMap::affine(LInterval::full("a"), LInterval("b", Rational(0), make_rational(1, 5))));
  auto rn = radon_nikodym(fifth);
  REQUIRE(rn.forward.pieces.size() == 1);
  CHECK(rn.forward.pieces[0].second ==
        Monomial{SqrtScalar::from_rational(make_rational(1, 5)), Rational(0)});
  CHECK(rn.backward.pieces[0].second == Monomial{SqrtScalar::from_rational(Rational(5)), Rational(0)});
  CHECK(rn.chain_rule_ok);

  // power p: p t^{p-1}, and the chain rule holds symbolically
  auto pw = one_piece(PieceMap::power("a", "b", make_rational(1, 2)));
  auto rnp = radon_nikodym(pw);
  CHECK(rnp.forward.pieces[0].second ==
        Monomial{SqrtScalar::from_rational(make_rational(1, 2)), make_rational(-1, 2)});
  CHECK(rnp.backward.pieces[0].second == Monomial{SqrtScalar::from_rational(Rational(2)), Rational(1)});
  CHECK(rnp.chain_rule_ok);
}

TEST_CASE("pushforward measure equals the density integral on affine pieces") {
  // for constant densities the integral is density * length, exact
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    auto f = random_affine_map(rng, "a", "b");
    auto rn = radon_nikodym(f);
    Rational pushed(0), integrated(0);
    for (std::size_t i = 0; i < f.pieces.size(); ++i) {
      pushed += f.pieces[i].target.length();
      const auto& mono = rn.forward.pieces[i].second;
      REQUIRE(mono.is_constant());
      integrated += mono.coeff.coeff() * f.pieces[i].source.length();
    }
    CHECK(pushed == integrated);
    CHECK(pushed == measure(f.codomain()));

    // the same identity on a random sub-bundle A of each piece
    for (const auto& p : f.pieces) {
      Rational third = p.source.lo + p.source.length() / 3;
      Rational half = p.source.lo + p.source.length() / 2;
      LInterval a(p.source.label, third, half);
      Rational image_measure = p.apply(a.hi) - p.apply(a.lo);
      CHECK(image_measure == p.slope * a.length());
    }
  }
}

TEST_CASE("normalization merges contiguous equal-slope pieces") {
  PiecewiseMap m;
  m.pieces.push_back(PieceMap::affine(LInterval("a", Rational(0), make_rational(1, 2)),
                                      LInterval("b", Rational(0), make_rational(1, 2))));
  m.pieces.push_back(PieceMap::affine(LInterval("a", make_rational(1, 2), Rational(1)),
                                      LInterval("b", make_rational(1, 2), Rational(1))));
  auto n = m.normalized();
  REQUIRE(n.pieces.size() == 1);
  CHECK(n.pieces[0].source.is_full());
  CHECK(m == one_piece(PieceMap::relabel("a", "b")));  // equality is decided after normalization
}

TEST_CASE("json round-trip") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_affine_map(rng, "x", "y");
    CHECK(PiecewiseMap::from_json(f.to_json()) == f);
  }
  auto pw = one_piece(PieceMap::power("a", "b", make_rational(2, 3)));
  CHECK(PiecewiseMap::from_json(pw.to_json()) == pw);
}

TEST_CASE("float shadow of exact maps within 1e-12") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    auto f = random_affine_map(rng, "a", "b");
    for (const auto& p : f.pieces) {
      Rational mid = (p.source.lo + p.source.hi) / 2;
      double exact = rat_double(p.apply(mid));
      CHECK(std::abs(p.apply_double(rat_double(mid)) - exact) < 1e-12);
    }
  }
  auto pw = PieceMap::power("a", "b", make_rational(1, 2));
  CHECK(std::abs(pw.apply_double(0.25) - 0.5) < 1e-12);
}
