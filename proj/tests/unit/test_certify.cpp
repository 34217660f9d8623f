#include "doctest.h"

#include "wcert/certify.hpp"

#include <random>
#include <set>

using namespace wcert;

namespace {

const Signature W = Signature::weyl();
const Signature H1 = Signature::heisenberg(1);
const Signature H2 = Signature::heisenberg(2);

Mode a(long n) { return {0, n}; }
Mode as(long n) { return {1, n}; }

SparseVector vec(std::initializer_list<Scalar> entries) {
  // coordinates e_k = (slot 0, k copies of a*(0))
  SparseVector v;
  std::size_t k = 0;
  for (const auto& s : entries) {
    if (!s.is_zero()) v[Coord{0, Monomial{std::vector<Mode>(k, as(0))}}] = s;
    ++k;
  }
  return v;
}

std::shared_ptr<const Automorphism> gp(std::uint64_t p) {
  return std::make_shared<const Automorphism>(Automorphism::weyl_gp(W, p));
}

Scale small_scale() {
  Scale s;
  s.D = HalfInteger::from_int(1);
  s.N = 3;
  s.L = 6;
  s.L_gen = 2;
  return s;
}

CyclicityRequest single(const ModuleHandle& m, std::shared_ptr<const Automorphism> g,
                        std::optional<long> charge, Scale scale) {
  CyclicityRequest r;
  r.modules = {m};
  r.start.components = {ModuleVector::cyclic()};
  r.g = std::move(g);
  r.charge = charge;
  r.scale = scale;
  return r;
}

} // namespace

TEST_SUITE("certify") {

TEST_CASE("span_insert examples") {
  SpanBasis s;
  CHECK(s.insert(vec({Scalar(1)})));
  CHECK_FALSE(s.insert(vec({Scalar(1)})));
  CHECK(s.rank() == 1);
  CHECK(s.raw_count() == 1);

  SpanBasis t;
  CHECK(t.insert(vec({Scalar(1), Scalar(1)})));
  CHECK(t.insert(vec({Scalar(0), Scalar(1)})));
  CHECK(t.rank() == 2);
  CHECK(t.contains(vec({Scalar(1), Scalar(0)})));
  const auto c = t.express(vec({Scalar(1), Scalar(0)}));
  REQUIRE(c.has_value());
  CHECK(c->at(0) == Scalar(1));
  CHECK(c->at(1) == Scalar(-1));
  CHECK_FALSE(t.insert(SparseVector{}));
}

TEST_CASE("span_insert with zeta_3 entries") {
  const Scalar z = Scalar::zeta(3);
  const auto r1 = vec({z, Scalar(1)});
  const auto r2 = vec({Scalar(1), z * z});
  // det = z * z^2 - 1 = 0
  CHECK((z * z * z - Scalar(1)).is_zero());
  CHECK(dense_rank({{z, Scalar(1)}, {Scalar(1), z * z}}) == 1);
  SpanBasis s;
  CHECK(s.insert(r1));
  CHECK_FALSE(s.insert(r2));
  CHECK(s.rank() == 1);
  SpanBasis t;
  t.insert(vec({z, Scalar(1)}));
  CHECK(t.insert(vec({Scalar(1), z})));
  CHECK(dense_rank({{z, Scalar(1)}, {Scalar(1), z}}) == 2);
}

TEST_CASE("span agrees with dense rank on random systems over Q(zeta_3)") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::vector<Scalar>> rows;
    SpanBasis s;
    const int true_rank = 1 + static_cast<int>(rng() % 8);
    std::vector<std::vector<Scalar>> gens;
    for (int g = 0; g < true_rank; ++g) {
      std::vector<Scalar> row;
      for (int k = 0; k < 8; ++k) {
        const long u = static_cast<long>(rng() % 5) - 2, v = static_cast<long>(rng() % 5) - 2;
        row.push_back(Scalar(u) + Scalar(v) * Scalar::zeta(3));
      }
      gens.push_back(row);
    }
    for (int r = 0; r < 8; ++r) {
      std::vector<Scalar> row(8, Scalar(0));
      for (const auto& g : gens) {
        const Scalar c = Scalar(static_cast<long>(rng() % 3) - 1) + Scalar(static_cast<long>(rng() % 2)) * Scalar::zeta(3);
        for (int k = 0; k < 8; ++k) row[k] += c * g[k];
      }
      rows.push_back(row);
    }
    for (const auto& row : rows) {
      SparseVector v;
      for (std::size_t k = 0; k < row.size(); ++k)
        if (!row[k].is_zero()) v[Coord{0, Monomial{std::vector<Mode>(k, as(0))}}] = row[k];
      const bool had = s.contains(v);
      CHECK(s.insert(v) == !had);
      CHECK(s.contains(v));
    }
    CHECK(s.rank() == dense_rank(rows));
    const auto piv = s.pivots();
    for (std::size_t k = 1; k < piv.size(); ++k) CHECK(piv[k - 1] < piv[k]);
  }
}

TEST_CASE("express reconstructs the query") {
  std::mt19937_64 rng(37);
  SpanBasis s;
  std::vector<SparseVector> raw;
  for (int k = 0; k < 6; ++k) {
    SparseVector v;
    for (int j = 0; j < 5; ++j)
      if (rng() % 2) v[Coord{static_cast<std::size_t>(j % 2), Monomial{std::vector<Mode>(j, a(-1))}}] =
                         Scalar(static_cast<long>(rng() % 7) - 3);
    for (auto it = v.begin(); it != v.end();) it = it->second.is_zero() ? v.erase(it) : std::next(it);
    if (s.insert(v)) raw.push_back(v);
  }
  CHECK(raw.size() == s.raw_count());
  SparseVector q;
  for (std::size_t k = 0; k < raw.size(); ++k) axpy(q, Scalar(static_cast<long>(k) + 1), raw[k]);
  const auto c = s.express(q);
  REQUIRE(c.has_value());
  SparseVector back;
  for (const auto& [k, coeff] : *c) axpy(back, coeff, raw[k]);
  CHECK(sparse_equal(back, q));
}

TEST_CASE("distinctness examples") {
  const auto t1 = WhittakerFunction::weyl(W, {Scalar(1)}, {});
  const auto t2 = WhittakerFunction::weyl(W, {Scalar(-1)}, {});
  const auto c = distinctness({t1, t2});
  CHECK(c.distinct());
  REQUIRE(c.witnesses.size() == 1);
  CHECK(c.witnesses[0].x == a(0));
  CHECK(c.witnesses[0].value_i == Scalar(1));
  CHECK(c.witnesses[0].value_j == Scalar(-1));

  const auto h = WhittakerFunction::heisenberg(H1, {{Scalar(2), Scalar(3)}});
  const auto hm = WhittakerFunction::heisenberg(H1, {{Scalar(-2), Scalar(-3)}});
  const auto ch = distinctness({h, hm});
  CHECK(ch.distinct());
  CHECK(ch.witnesses[0].x == Mode{0, 0});

  const auto z = WhittakerFunction::zero(W);
  const auto cz = distinctness({z, z});
  CHECK_FALSE(cz.distinct());
  CHECK(cz.collisions == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
  CHECK_FALSE(first_difference(z, z).has_value());
  // the first difference sits at a higher index
  const auto u = WhittakerFunction::weyl(W, {Scalar(1), Scalar(2)}, {});
  const auto v = WhittakerFunction::weyl(W, {Scalar(1), Scalar(3)}, {});
  CHECK(first_difference(u, v) == a(1));
}

TEST_CASE("separator examples") {
  const ModuleHandle m1(WhittakerFunction::weyl(W, {Scalar(1)}, {}));
  const ModuleHandle m2(WhittakerFunction::weyl(W, {Scalar(-1)}, {}));
  const auto s = separator({m1, m2}, 1);
  CHECK(s.verified);
  CHECK(s.witnesses == std::vector<Mode>{a(0)});
  CHECK(s.exponents == std::vector<int>{1});
  CHECK(normal_form(s.expr, W) == normal_form(OperatorExpr::mode(a(0)) - OperatorExpr::identity(), W));
  CHECK(act_expr(s.expr, ModuleVector::cyclic(), m1).is_zero());
  CHECK(act_expr(s.expr, ModuleVector::cyclic(), m2) == ModuleVector::cyclic(Scalar(-2)));

  const ModuleHandle h1(WhittakerFunction::heisenberg(H1, {{Scalar(2), Scalar(3)}}));
  const ModuleHandle h2(WhittakerFunction::heisenberg(H1, {{Scalar(-2), Scalar(-3)}}));
  const auto sh = separator({h1, h2}, 0);
  CHECK(sh.verified);
  CHECK(act_expr(sh.expr, ModuleVector::cyclic(), h2).is_zero());
  CHECK(act_expr(sh.expr, ModuleVector::cyclic(), h1) == ModuleVector::cyclic(Scalar(4)));

  const auto z = WhittakerFunction::zero(W);
  CHECK_THROWS(separator({ModuleHandle(z), ModuleHandle(z)}, 0));
}

TEST_CASE("separator for three rotated types") {
  const auto g = gp(3);
  const ModuleHandle base(WhittakerFunction::weyl(W, {Scalar(1)}, {}));
  std::vector<ModuleHandle> mods;
  for (long r = 0; r < 3; ++r) mods.push_back(base.twisted_by(g, r));
  for (std::size_t t = 0; t < 3; ++t) {
    const auto s = separator(mods, t);
    CHECK(s.verified);
    CHECK(s.others.size() == 2);
    for (std::size_t j = 0; j < 3; ++j) {
      const ModuleVector img = act_expr(s.expr, ModuleVector::cyclic(), mods[j]);
      CHECK(img.is_zero() == (j != t));
      CHECK(s.images[j] == img);
    }
  }
}

TEST_CASE("separator with a nontrivial exponent") {
  // lambda agrees at a(0); a(1) acts on w with eigenvalue but a(0) - 1 needs k=1
  const ModuleHandle m1(WhittakerFunction::weyl(W, {Scalar(1), Scalar(2)}, {}));
  const ModuleHandle m2(WhittakerFunction::weyl(W, {Scalar(1), Scalar(5)}, {}));
  const auto s = separator({m1, m2}, 0);
  CHECK(s.verified);
  CHECK(s.witnesses == std::vector<Mode>{a(1)});
  CHECK(act_expr(s.expr, ModuleVector::cyclic(), m1) == ModuleVector::cyclic(Scalar(-3)));
}

TEST_CASE("invariant generators") {
  const auto g2 = gp(2);
  const auto gens = invariant_generators(W, 1, 2, g2.get(), 0);
  CHECK_FALSE(gens.empty());
  for (const auto& e : gens) {
    CHECK(average_projector(*g2, 0, e) == e);
    for (const auto& [w, c] : e.terms()) {
      CHECK(w.modes.size() == 2);
      for (const auto& x : w.modes) CHECK(std::abs(x.index) <= 1);
    }
  }
  // every mode alone: 2 species x 3 indices
  CHECK(invariant_generators(W, 1, 1, nullptr, std::nullopt).size() == 6);
  const auto gens3 = invariant_generators(W, 1, 3, gp(3).get(), 0);
  bool cubic = false;
  for (const auto& e : gens3)
    for (const auto& [w, c] : e.terms()) cubic = cubic || w.modes.size() == 3;
  CHECK(cubic);
  const auto sigma = std::make_shared<const Automorphism>(Automorphism::permutation(H2, {2, 1}));
  for (const auto& e : invariant_generators(H2, 1, 2, sigma.get(), 0))
    CHECK(normal_form(apply_automorphism(*sigma, 1, e), H2) == normal_form(e, H2));
}

TEST_CASE("cyclicity examples") {
  const auto g2 = gp(2);
  const ModuleHandle base(WhittakerFunction::weyl(W, {Scalar(1)}, {}));
  CyclicityRequest r;
  r.modules = twisted_family(base, CyclicAction(g2));
  r.start = delta_embed(ModuleVector::cyclic(), 0, CyclicAction(g2));
  r.g = g2;
  r.charge = 0;
  r.scale = small_scale();
  // V^0 keeps the diagonal image; the full algebra reaches every slot
  CHECK_FALSE(cyclicity_certificate(r).certified);
  r.charge.reset();
  const auto sum = cyclicity_certificate(r);
  CHECK(sum.certified);
  CHECK(sum.achieved.size() == 12);
  const auto one = cyclicity_certificate(single(base, g2, 0, small_scale()));
  CHECK(one.certified);
  CHECK(one.verdict == "certified");
  CHECK(one.achieved.size() == 6);
  CHECK(one.missing.empty());
  CHECK(one.expressions.size() == 6);

  const ModuleHandle vac(WhittakerFunction::zero(W));
  const auto neg = cyclicity_certificate(single(vac, g2, 0, small_scale()));
  CHECK_FALSE(neg.certified);
  CHECK(neg.verdict == "not-certified (stalled)");
  const std::set<std::string> missing(neg.missing.begin(), neg.missing.end());
  CHECK(missing == std::set<std::string>{"a*(0)", "a(-1)"});
}

TEST_CASE("cyclicity of (w, w) in a two-module sum") {
  const ModuleHandle m1(WhittakerFunction::weyl(W, {Scalar(1)}, {}));
  const ModuleHandle m2(WhittakerFunction::weyl(W, {Scalar(-1)}, {}));
  CyclicityRequest r;
  r.modules = {m1, m2};
  r.start.components = {ModuleVector::cyclic(), ModuleVector::cyclic()};
  r.scale = small_scale();
  r.scale.D = HalfInteger{1};
  const auto c = cyclicity_certificate(r);
  CHECK(c.certified);
  CHECK(c.achieved.size() == 6); // 3 monomials per slot
  CHECK(replay_certificate(c, r));
  // identical types: (w, w) cannot reach (w, 0)
  r.modules = {m1, m1};
  const auto bad = cyclicity_certificate(r);
  CHECK_FALSE(bad.certified);
}

TEST_CASE("budget and stall are told apart") {
  const auto g2 = gp(2);
  const ModuleHandle base(WhittakerFunction::weyl(W, {Scalar(1)}, {}));
  Scale s = small_scale();
  s.L = 1;
  s.D = HalfInteger::from_int(2);
  const auto c = cyclicity_certificate(single(base, g2, 0, s));
  CHECK_FALSE(c.certified);
  CHECK(c.verdict == "not-certified (budget)");
  CHECK(c.rounds == 1);
}

TEST_CASE("certificate replay") {
  const auto g3 = gp(3);
  const ModuleHandle base(WhittakerFunction::weyl(W, {Scalar(1)}, {Scalar(2)}));
  Scale s = small_scale();
  s.L_gen = 3;
  const auto req = single(base, g3, 0, s);
  const auto c = cyclicity_certificate(req);
  REQUIRE(c.certified);
  CHECK(c.provenance.size() == c.rank);
  CHECK(replay_certificate(c, req));
  // tampering with one coefficient breaks replay
  auto bad = c;
  REQUIRE_FALSE(bad.expressions.empty());
  auto& combo = bad.expressions.back().second;
  REQUIRE_FALSE(combo.empty());
  combo.begin()->second += Scalar(1);
  CHECK_FALSE(replay_certificate(bad, req));
}

TEST_CASE("threads do not change the certificate") {
  const auto g2 = gp(2);
  const ModuleHandle base(WhittakerFunction::weyl(W, {Scalar(1), Scalar(1)}, {}));
  Scale s = small_scale();
  s.D = HalfInteger::from_int(2);
  auto r1 = single(base, g2, 0, s);
  auto r4 = r1;
  r4.threads = 4;
  const auto c1 = cyclicity_certificate(r1), c4 = cyclicity_certificate(r4);
  CHECK(c1.certified == c4.certified);
  CHECK(c1.rank == c4.rank);
  CHECK(c1.achieved == c4.achieved);
  CHECK(c1.expressions.size() == c4.expressions.size());
  for (std::size_t k = 0; k < c1.expressions.size(); ++k) CHECK(c1.expressions[k] == c4.expressions[k]);
}

TEST_CASE("virasoro_check examples") {
  std::mt19937_64 rng(41);
  const ModuleHandle wv(WhittakerFunction::zero(W));
  const auto r = virasoro_check(wv, {{2, -2}}, 4, HalfInteger::from_int(2), rng);
  CHECK(r.passed());
  REQUIRE(r.inferred_c.has_value());
  CHECK(*r.inferred_c == Scalar(-1));
  CHECK(r.expected_c == Scalar(-1));
  // [L(2), L(-2)] 1 = 4 L(0) 1 - 1/2 = -1/2
  const ModuleVector one = ModuleVector::cyclic();
  CHECK(act_virasoro(2, act_virasoro(-2, one, wv), wv) == one * Scalar(Rational(-1, 2)));

  const ModuleHandle hv(WhittakerFunction::zero(H2));
  const auto rh = virasoro_check(hv, {{2, -2}}, 2, HalfInteger::from_int(1), rng);
  CHECK(rh.passed());
  CHECK(rh.inferred_c == Scalar(2));

  const auto r11 = virasoro_check(wv, {{1, 1}}, 3, HalfInteger::from_int(2), rng);
  CHECK(r11.passed());
  CHECK_FALSE(r11.inferred_c.has_value());

  const ModuleHandle wm(WhittakerFunction::weyl(W, {Scalar(1), Scalar(2)}, {Scalar(-1)}));
  CHECK(virasoro_check(wm, {{1, -1}, {2, -2}, {3, -3}, {1, 2}}, 3, HalfInteger::from_int(2), rng).passed());
}

TEST_CASE("pipeline examples") {
  PipelineOptions o;
  o.scale = small_scale();
  const auto g2 = std::make_shared<const Automorphism>(Automorphism::weyl_gp(W, 2));
  const auto rw = orbifold_irreducibility_pipeline(
      ModuleHandle(WhittakerFunction::weyl(W, {Scalar(1)}, {})), CyclicAction(g2), o);
  CHECK(rw.certified);
  CHECK(rw.verdict == "certified");
  CHECK(rw.distinctness.distinct());
  CHECK(rw.distinctness.witnesses[0].x == a(0));
  CHECK(rw.certificates.size() == 4);
  for (const auto& c : rw.certificates) CHECK(c.certificate.certified);

  const auto th = std::make_shared<const Automorphism>(Automorphism::theta(H1));
  o.scale.D = HalfInteger::from_int(2);
  const auto rh = orbifold_irreducibility_pipeline(
      ModuleHandle(WhittakerFunction::heisenberg(H1, {{Scalar(1)}})), CyclicAction(th), o);
  CHECK(rh.certified);
  CHECK(rh.types[1] == WhittakerFunction::heisenberg(H1, {{Scalar(-1)}}));

  const auto sigma = std::make_shared<const Automorphism>(Automorphism::permutation(H2, {2, 1}));
  o.scale.D = HalfInteger::from_int(1);
  const auto rs = orbifold_irreducibility_pipeline(
      ModuleHandle(WhittakerFunction::heisenberg(H2, {{Scalar(1)}, {Scalar(2)}})), CyclicAction(sigma), o);
  CHECK(rs.certified);

  const auto rv = orbifold_irreducibility_pipeline(ModuleHandle(WhittakerFunction::zero(W)),
                                                   CyclicAction(g2), o);
  CHECK_FALSE(rv.certified);
  CHECK(rv.verdict == "not-certified");
  CHECK(rv.reason == "types not distinct");
  REQUIRE(rv.decomposition.has_value());
  CHECK(rv.component_certificates.size() == 2);
  for (const auto& c : rv.component_certificates) CHECK(c.certificate.certified);
  REQUIRE(rv.compatibility.has_value());
  CHECK(rv.compatibility->passed());
}

TEST_CASE("pipeline is reproducible") {
  PipelineOptions o;
  o.scale = small_scale();
  o.scale.L_gen = 3;
  const auto g3 = std::make_shared<const Automorphism>(Automorphism::weyl_gp(W, 3));
  const ModuleHandle m(WhittakerFunction::weyl(W, {Scalar(1)}, {Scalar(1)}));
  const auto r1 = orbifold_irreducibility_pipeline(m, CyclicAction(g3), o);
  const auto r2 = orbifold_irreducibility_pipeline(m, CyclicAction(g3), o);
  REQUIRE(r1.certificates.size() == r2.certificates.size());
  for (std::size_t k = 0; k < r1.certificates.size(); ++k) {
    CHECK(r1.certificates[k].start == r2.certificates[k].start);
    CHECK(r1.certificates[k].certificate.rank == r2.certificates[k].certificate.rank);
  }
  o.seed += 1;
  const auto r3 = orbifold_irreducibility_pipeline(m, CyclicAction(g3), o);
  bool differs = false;
  for (std::size_t k = 1; k < r1.certificates.size(); ++k)
    differs = differs || !(r1.certificates[k].start == r3.certificates[k].start);
  CHECK(differs);
}

TEST_CASE("monotonicity in the scale") {
  struct Case {
    ModuleHandle m;
    std::shared_ptr<const Automorphism> g;
    Scale s;
  };
  std::vector<Case> cases;
  Scale s = small_scale();
  cases.push_back({ModuleHandle(WhittakerFunction::weyl(W, {Scalar(1)}, {})), gp(2), s});
  s.L_gen = 3;
  cases.push_back({ModuleHandle(WhittakerFunction::weyl(W, {Scalar(1)}, {})), gp(3), s});
  s = small_scale();
  s.D = HalfInteger::from_int(2);
  cases.push_back({ModuleHandle(WhittakerFunction::heisenberg(H1, {{Scalar(1)}})),
                   std::make_shared<const Automorphism>(Automorphism::theta(H1)), s});
  for (const auto& c : cases) {
    const auto base = cyclicity_certificate(single(c.m, c.g, 0, c.s));
    REQUIRE(base.certified);
    std::vector<Scale> bigger(5, c.s);
    bigger[0].N += 1;
    bigger[1].L += 2;
    bigger[2].L_gen += 1;
    bigger[3].slack_twice += 2;
    bigger[4].N += 1;
    bigger[4].L += 2;
    for (const auto& b : bigger) {
      const auto cert = cyclicity_certificate(single(c.m, c.g, 0, b));
      CHECK(cert.certified);
    }
  }
}

}
