#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphck/rational.hpp"
#include "graphck/scalar.hpp"

namespace graphck {

using json = nlohmann::json;

class IntervalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Half-open (lo, hi] x {label} with exact rational endpoints inside (0,1].
struct LInterval {
  std::string label;
  Rational lo, hi;

  LInterval() : lo(0), hi(1) {}
  LInterval(std::string lbl, Rational a, Rational b)
      : label(std::move(lbl)), lo(std::move(a)), hi(std::move(b)) {
    if (!(Rational(0) <= lo && lo < hi && hi <= 1))
      throw IntervalError("interval: need 0 <= lo < hi <= 1, got (" + rat_str(lo) + "," + rat_str(hi) + "]");
  }
  static LInterval full(std::string label) { return LInterval(std::move(label), Rational(0), Rational(1)); }

  Rational length() const { return hi - lo; }
  bool is_full() const { return lo == 0 && hi == 1; }
  bool contains(const Rational& t) const { return lo < t && t <= hi; }

  bool operator==(const LInterval& o) const { return label == o.label && lo == o.lo && hi == o.hi; }
  bool operator<(const LInterval& o) const {
    if (label != o.label) return label < o.label;
    if (lo != o.lo) return lo < o.lo;
    return hi < o.hi;
  }
  std::string str() const { return "(" + rat_str(lo) + "," + rat_str(hi) + "]x{" + label + "}"; }
};

/// Finite union of labeled intervals. Kept in canonical form: sorted,
/// pairwise disjoint, contiguous same-label runs merged.
using Bundle = std::vector<LInterval>;

inline Bundle normalize_bundle(Bundle b) {
  std::sort(b.begin(), b.end());
  Bundle out;
  for (auto& iv : b) {
    if (!out.empty() && out.back().label == iv.label) {
      if (iv.lo < out.back().hi)
        throw IntervalError("bundle: overlapping intervals " + out.back().str() + " and " + iv.str());
      if (iv.lo == out.back().hi) {
        out.back().hi = iv.hi;
        continue;
      }
    }
    out.push_back(std::move(iv));
  }
  return out;
}

inline Rational measure(const Bundle& b) {
  Rational total(0);
  for (const auto& iv : b) total += iv.length();
  return total;
}

inline bool bundles_equal(const Bundle& a, const Bundle& b) {
  return normalize_bundle(a) == normalize_bundle(b);
}

inline std::optional<LInterval> intersect(const LInterval& a, const LInterval& b) {
  if (a.label != b.label) return std::nullopt;
  Rational lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
  if (lo >= hi) return std::nullopt;
  return LInterval(a.label, lo, hi);
}

inline Bundle bundle_intersection(const Bundle& a, const Bundle& b) {
  Bundle out;
  for (const auto& x : a)
    for (const auto& y : b)
      if (auto z = intersect(x, y)) out.push_back(*z);
  return normalize_bundle(out);
}

inline bool bundle_contains(const Bundle& outer, const Bundle& inner) {
  return measure(bundle_intersection(outer, inner)) == measure(normalize_bundle(inner));
}

/// Set difference a \ b.
inline Bundle bundle_difference(const Bundle& a, const Bundle& b) {
  Bundle nb = normalize_bundle(b);
  Bundle cur = normalize_bundle(a);
  for (const auto& cut : nb) {
    Bundle next;
    for (const auto& iv : cur) {
      if (iv.label != cut.label || cut.hi <= iv.lo || iv.hi <= cut.lo) {
        next.push_back(iv);
        continue;
      }
      if (iv.lo < cut.lo) next.push_back(LInterval(iv.label, iv.lo, std::min(iv.hi, cut.lo)));
      if (cut.hi < iv.hi) next.push_back(LInterval(iv.label, std::max(iv.lo, cut.hi), iv.hi));
    }
    cur = std::move(next);
  }
  return normalize_bundle(cur);
}

inline bool bundles_disjoint(const Bundle& a, const Bundle& b) {
  return bundle_intersection(a, b).empty();
}

inline json bundle_to_json(const Bundle& b) {
  json arr = json::array();
  for (const auto& iv : b)
    arr.push_back({{"label", iv.label}, {"lo", rat_str(iv.lo)}, {"hi", rat_str(iv.hi)}});
  return arr;
}

inline Bundle bundle_from_json(const json& arr) {
  Bundle b;
  for (const auto& iv : arr)
    b.push_back(LInterval(iv.at("label").get<std::string>(), rat_parse(iv.at("lo").get<std::string>()),
                          rat_parse(iv.at("hi").get<std::string>())));
  return normalize_bundle(b);
}

/// One piece of an exact bijection between interval bundles: an increasing
/// affine map between two labeled intervals, or t -> t^p across two full
/// (0,1] intervals.
struct PieceMap {
  enum class Kind { Affine, Power } kind = Kind::Affine;
  LInterval source, target;
  Rational slope{1}, offset{0};  // affine
  Rational exponent{1};          // power

  static PieceMap affine(LInterval src, LInterval dst) {
    PieceMap p;
    p.kind = Kind::Affine;
    p.slope = dst.length() / src.length();
    p.offset = dst.lo - p.slope * src.lo;
    p.source = std::move(src);
    p.target = std::move(dst);
    return p;
  }
  static PieceMap relabel(const std::string& src_label, const std::string& dst_label) {
    return affine(LInterval::full(src_label), LInterval::full(dst_label));
  }
  static PieceMap power(const std::string& src_label, const std::string& dst_label, Rational p) {
    if (p <= 0) throw IntervalError("piece: power exponent must be positive");
    PieceMap m;
    m.kind = Kind::Power;
    m.exponent = std::move(p);
    m.source = LInterval::full(src_label);
    m.target = LInterval::full(dst_label);
    return m;
  }

  bool is_identity_relabel() const {
    return kind == Kind::Affine && slope == 1 && offset == 0 && source.is_full() && target.is_full();
  }
  bool is_power() const { return kind == Kind::Power; }

  /// Exact image of a coordinate; power pieces only at rational-result points.
  Rational apply(const Rational& t) const {
    if (kind == Kind::Affine) return slope * t + offset;
    if (exponent == 1) return t;
    throw IntervalError("piece: exact apply on a power piece");
  }
  double apply_double(double t) const {
    if (kind == Kind::Affine) return rat_double(slope) * t + rat_double(offset);
    return std::pow(t, rat_double(exponent));
  }

  PieceMap inverted() const {
    PieceMap p;
    if (kind == Kind::Affine) {
      p.kind = Kind::Affine;
      p.slope = Rational(1) / slope;
      p.offset = -offset / slope;
    } else {
      p.kind = Kind::Power;
      p.exponent = Rational(1) / exponent;
    }
    p.source = target;
    p.target = source;
    return p;
  }

  /// Density of t -> measure of image, as a function on the source piece.
  Monomial forward_density() const {
    if (kind == Kind::Affine) return {SqrtScalar::from_rational(slope), Rational(0)};
    // d/dt t^p = p t^{p-1}
    return {SqrtScalar::from_rational(exponent), exponent - 1};
  }

  bool operator==(const PieceMap& o) const {
    if (kind != o.kind || !(source == o.source) || !(target == o.target)) return false;
    if (kind == Kind::Affine) return slope == o.slope && offset == o.offset;
    return exponent == o.exponent;
  }
  bool operator<(const PieceMap& o) const { return source < o.source; }

  std::string str() const {
    if (kind == Kind::Affine)
      return source.str() + " -> " + target.str() + " affine slope " + rat_str(slope);
    return source.str() + " -> " + target.str() + " power " + rat_str(exponent);
  }

  json to_json() const {
    json doc;
    if (kind == Kind::Affine) {
      doc["kind"] = "affine";
      doc["src"] = {{"label", source.label}, {"lo", rat_str(source.lo)}, {"hi", rat_str(source.hi)}};
      doc["dst"] = {{"label", target.label}, {"lo", rat_str(target.lo)}, {"hi", rat_str(target.hi)}};
      doc["slope"] = rat_str(slope);
      doc["offset"] = rat_str(offset);
    } else {
      doc["kind"] = "power";
      doc["src_label"] = source.label;
      doc["dst_label"] = target.label;
      doc["exponent"] = rat_str(exponent);
    }
    return doc;
  }
  static PieceMap from_json(const json& doc) {
    if (doc.at("kind") == "power")
      return power(doc.at("src_label").get<std::string>(), doc.at("dst_label").get<std::string>(),
                   rat_parse(doc.at("exponent").get<std::string>()));
    auto iv = [](const json& j) {
      return LInterval(j.at("label").get<std::string>(), rat_parse(j.at("lo").get<std::string>()),
                       rat_parse(j.at("hi").get<std::string>()));
    };
    return affine(iv(doc.at("src")), iv(doc.at("dst")));
  }
};

/// Exact bijection between two bundles, a finite disjoint union of pieces.
struct PiecewiseMap {
  std::vector<PieceMap> pieces;

  Bundle domain() const {
    Bundle b;
    for (const auto& p : pieces) b.push_back(p.source);
    return normalize_bundle(b);
  }
  Bundle codomain() const {
    Bundle b;
    for (const auto& p : pieces) b.push_back(p.target);
    return normalize_bundle(b);
  }

  /// Canonical form: trivial power pieces rewritten as affine relabelings,
  /// pieces sorted by source, adjacent affine pieces realizing the same
  /// affine map merged.
  PiecewiseMap normalized() const {
    PiecewiseMap r;
    r.pieces = pieces;
    for (auto& p : r.pieces)
      if (p.kind == PieceMap::Kind::Power && p.exponent == 1)
        p = PieceMap::relabel(p.source.label, p.target.label);
    std::sort(r.pieces.begin(), r.pieces.end());
    std::vector<PieceMap> merged;
    for (auto& p : r.pieces) {
      if (!merged.empty()) {
        PieceMap& q = merged.back();
        if (q.kind == PieceMap::Kind::Affine && p.kind == PieceMap::Kind::Affine &&
            q.source.label == p.source.label && q.target.label == p.target.label &&
            q.slope == p.slope && q.offset == p.offset && q.source.hi == p.source.lo) {
          q.source.hi = p.source.hi;
          q.target.hi = p.target.hi;
          continue;
        }
      }
      merged.push_back(std::move(p));
    }
    r.pieces = std::move(merged);
    return r;
  }

  bool operator==(const PiecewiseMap& o) const { return normalized().pieces == o.normalized().pieces; }

  /// Sources pairwise disjoint, targets pairwise disjoint, every affine
  /// piece consistent. Throws on violation.
  void validate() const {
    Bundle src, dst;
    for (const auto& p : pieces) {
      if (p.kind == PieceMap::Kind::Affine) {
        if (p.slope <= 0) throw IntervalError("piecewise: nonpositive slope in " + p.str());
        if (p.slope * p.source.lo + p.offset != p.target.lo ||
            p.slope * p.source.hi + p.offset != p.target.hi)
          throw IntervalError("piecewise: affine piece does not map source onto target: " + p.str());
      } else {
        if (!p.source.is_full() || !p.target.is_full())
          throw IntervalError("piecewise: power piece must span (0,1]: " + p.str());
      }
      src.push_back(p.source);
      dst.push_back(p.target);
    }
    normalize_bundle(src);  // throws on overlap
    normalize_bundle(dst);
  }

  static PiecewiseMap identity_on(const Bundle& b) {
    PiecewiseMap m;
    for (const auto& iv : normalize_bundle(b)) m.pieces.push_back(PieceMap::affine(iv, iv));
    return m;
  }
  bool is_identity() const {
    for (const auto& p : pieces) {
      if (p.kind != PieceMap::Kind::Affine || p.slope != 1 || p.offset != 0 ||
          p.source.label != p.target.label)
        return false;
    }
    return true;
  }

  json to_json() const {
    json arr = json::array();
    for (const auto& p : normalized().pieces) arr.push_back(p.to_json());
    return arr;
  }
  static PiecewiseMap from_json(const json& arr) {
    PiecewiseMap m;
    for (const auto& p : arr) m.pieces.push_back(PieceMap::from_json(p));
    m.validate();
    return m;
  }
};

/// Composite piece f o g on the overlap of g's target with f's source.
/// Mixed affine/power composition is only defined when the affine side is a
/// plain relabeling of (0,1]; anything else is outside the exact algebra.
inline std::optional<PieceMap> compose_pieces(const PieceMap& f, const PieceMap& g) {
  auto overlap = intersect(f.source, g.target);
  if (!overlap) return std::nullopt;
  if (f.kind == PieceMap::Kind::Affine && g.kind == PieceMap::Kind::Affine) {
    // pull the overlap back through g, push forward through f
    Rational pre_lo = (overlap->lo - g.offset) / g.slope;
    Rational pre_hi = (overlap->hi - g.offset) / g.slope;
    Rational post_lo = f.slope * overlap->lo + f.offset;
    Rational post_hi = f.slope * overlap->hi + f.offset;
    return PieceMap::affine(LInterval(g.source.label, pre_lo, pre_hi),
                            LInterval(f.target.label, post_lo, post_hi));
  }
  if (f.is_power() && g.is_power())
    return PieceMap::power(g.source.label, f.target.label, f.exponent * g.exponent);
  if (f.is_power() && g.is_identity_relabel())
    return PieceMap::power(g.source.label, f.target.label, f.exponent);
  if (g.is_power() && f.is_identity_relabel())
    return PieceMap::power(g.source.label, f.target.label, g.exponent);
  throw IntervalError("compose: unsupported mixed affine/power composition between " + f.str() +
                      " and " + g.str());
}

/// Exact composite f o g (apply g first). Requires codomain(g) = domain(f).
inline PiecewiseMap compose(const PiecewiseMap& f, const PiecewiseMap& g) {
  if (!bundles_equal(g.codomain(), f.domain()))
    throw IntervalError("compose: codomain of inner map does not match domain of outer map");
  PiecewiseMap out;
  for (const auto& q : g.pieces)
    for (const auto& p : f.pieces)
      if (auto c = compose_pieces(p, q)) out.pieces.push_back(*c);
  out = out.normalized();
  out.validate();
  return out;
}

inline PiecewiseMap invert(const PiecewiseMap& f) {
  PiecewiseMap out;
  for (const auto& p : f.pieces) out.pieces.push_back(p.inverted());
  return out.normalized();
}

/// Piecewise density: one exact monomial per piece of the underlying map.
struct PiecewiseDensity {
  std::vector<std::pair<LInterval, Monomial>> pieces;

  bool is_identically_one() const {
    for (const auto& [iv, m] : pieces)
      if (!m.is_one()) return false;
    return true;
  }
  std::string str() const {
    std::string s;
    for (const auto& [iv, m] : pieces) s += (s.empty() ? "" : ", ") + m.str() + " on " + iv.str();
    return s.empty() ? "(empty)" : s;
  }
};

struct RadonNikodym {
  PiecewiseDensity forward;   // Phi_f on the domain
  PiecewiseDensity backward;  // Phi_{f^{-1}} on the codomain
  bool chain_rule_ok = true;  // (Phi_{f^{-1}} o f) . Phi_f == 1 symbolically
};

/// Closed-form Radon-Nikodym data of an exact piecewise map, with the
/// symbolic chain-rule identity checked piece by piece.
inline RadonNikodym radon_nikodym(const PiecewiseMap& f) {
  RadonNikodym rn;
  for (const auto& p : f.pieces) {
    Monomial fwd = p.forward_density();
    Monomial bwd = p.inverted().forward_density();
    rn.forward.pieces.push_back({p.source, fwd});
    rn.backward.pieces.push_back({p.target, bwd});
    // (Phi_{f^{-1}} o f)(t) * Phi_f(t): substitute the piece into the
    // backward density, then multiply.
    Monomial bwd_of_f;
    if (p.kind == PieceMap::Kind::Affine) {
      if (!bwd.is_constant()) throw IntervalError("radon_nikodym: non-constant density on affine piece");
      bwd_of_f = bwd;
    } else {
      bwd_of_f = bwd.substitute_power(p.exponent);
    }
    if (!(bwd_of_f * fwd).is_one()) rn.chain_rule_ok = false;
  }
  return rn;
}

}  // namespace graphck
