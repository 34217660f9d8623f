#include "doctest.h"

#include "wcert/mode_algebra.hpp"

#include <random>

using namespace wcert;

namespace {

const Signature W = Signature::weyl();
const Signature H1 = Signature::heisenberg(1);
const Signature H2 = Signature::heisenberg(2);

Mode a(long n) { return {0, n}; }
Mode as(long n) { return {1, n}; }
Mode h(int i, long n) { return {i - 1, n}; }

OperatorExpr w(std::vector<Mode> modes, unsigned k = 0, Scalar c = Scalar(1)) {
  return OperatorExpr::word(Word{std::move(modes), k}, c);
}

OperatorExpr random_expr(std::mt19937_64& rng, const Signature& sig, std::size_t max_len,
                         std::size_t terms = 3, std::uint64_t order = 1) {
  OperatorExpr e;
  for (std::size_t t = 0; t < terms; ++t) {
    Word word;
    const std::size_t len = rng() % (max_len + 1);
    for (std::size_t k = 0; k < len; ++k)
      word.modes.push_back(Mode{static_cast<int>(rng() % static_cast<std::uint64_t>(sig.species_count())),
                                static_cast<long>(rng() % 7) - 3});
    e.add_term(word, Scalar::zeta(order, static_cast<long>(rng() % order)) *
                         Scalar(1 + static_cast<long>(rng() % 4)));
  }
  return e;
}

} // namespace

TEST_SUITE("mode-algebra") {

TEST_CASE("commutator examples") {
  CHECK(W.commutator(a(1), as(-1)) == Scalar(1));
  CHECK(W.commutator(as(-1), a(1)) == Scalar(-1));
  CHECK(W.commutator(a(1), a(2)).is_zero());
  CHECK(W.commutator(as(1), as(-1)).is_zero());
  CHECK(H1.commutator(h(1, 2), h(1, -2)) == Scalar(2));
  CHECK(H2.commutator(h(1, 1), h(2, -1)).is_zero());
  CHECK(H2.commutator(h(2, -3), h(2, 3)) == Scalar(-3));
  CHECK_THROWS(W.commutator(Mode{2, 0}, a(0)));
}

TEST_CASE("signature data") {
  CHECK(W.name() == "weyl");
  CHECK(H2.name() == "heisenberg(2)");
  CHECK(W.degree_twice(a(-1)) == 1);
  CHECK(W.degree_twice(as(0)) == 1);
  CHECK(W.degree_twice(as(-2)) == 5);
  CHECK(H1.degree_twice(h(1, -3)) == 6);
  CHECK(W.is_annihilation(a(0)));
  CHECK_FALSE(W.is_annihilation(as(0)));
  CHECK(W.is_annihilation(as(1)));
  CHECK(H1.is_annihilation(h(1, 0)));
  CHECK(H1.format(h(1, -1)) == "h1(-1)");
  CHECK(H1.parse_mode("h(-1)") == h(1, -1));
  CHECK(H2.format(h(2, 4)) == "h2(4)");
  CHECK(W.format(as(0)) == "a*(0)");
  CHECK(W.parse_mode("a*(-2)") == as(-2));
  CHECK(H1.parse_mode("h1(3)") == h(1, 3));
  CHECK(W.central_charge() == Scalar(-1));
  CHECK(H2.central_charge() == Scalar(2));
}

TEST_CASE("normal_form examples") {
  CHECK(normal_form(w({a(1), as(-1)}), W) == w({as(-1), a(1)}) + w({}, 1));
  CHECK(normal_form(OperatorExpr::identity(), W) == OperatorExpr::identity());
  CHECK(normal_form(w({h(1, 2), h(1, -2)}), H1) == w({h(1, -2), h(1, 2)}) + w({}, 1, Scalar(2)));
  // already sorted words are untouched
  CHECK(normal_form(w({a(-2), as(-2), a(3)}), W) == w({a(-2), as(-2), a(3)}));
}

TEST_CASE("word and expression text") {
  const Word x = parse_word("a(-1) a*(0) K^2", W);
  CHECK(x.modes == std::vector<Mode>{a(-1), as(0)});
  CHECK(x.k_power == 2);
  CHECK(format_word(x, W) == "a(-1) a*(0) K^2");
  const OperatorExpr e = parse_expr("2 * a(1) a*(-1) - 1/2 * K + z * a(0)", W, 3);
  CHECK(e.size() == 3);
  CHECK(parse_expr(format_expr(e, W, 3), W, 3) == e);
  CHECK_THROWS_AS(parse_word("b(1)", W), ParseError);
}

TEST_CASE("automorphism examples") {
  const Automorphism theta = Automorphism::theta(H1);
  CHECK(apply_automorphism(theta, 1, w({h(1, -1), h(1, -3)})) == w({h(1, -3), h(1, -1)}));
  CHECK(normal_form(w({h(1, -1), h(1, -3)}), H1) == w({h(1, -3), h(1, -1)}));
  for (std::uint64_t p : {2, 3, 5}) {
    const Automorphism g = Automorphism::weyl_gp(W, p);
    CHECK(apply_automorphism(g, 1, w({a(-1)})) == w({a(-1)}, 0, Scalar::zeta(p)));
    CHECK(apply_automorphism(g, 1, w({as(-1)})) == w({as(-1)}, 0, Scalar::zeta(p, -1)));
  }
  const Automorphism sigma = Automorphism::permutation(H2, {2, 1});
  CHECK(sigma.order() == 2);
  CHECK(apply_automorphism(sigma, 1, w({h(1, 5)})) == w({h(2, 5)}));
  CHECK(Automorphism::permutation(Signature::heisenberg(3), {2, 3, 1}).order() == 3);
  // k reduced modulo the order
  CHECK(apply_automorphism(theta, -3, w({h(1, 2)})) == w({h(1, 2)}, 0, Scalar(-1)));
}

TEST_CASE("automorphism validation") {
  // scaling h by 2 breaks the commutator rule
  CHECK_THROWS(Automorphism(H1, 2, SpeciesMatrix{{Scalar(2)}}, "bad"));
  // (-1)^3 != 1
  CHECK_THROWS(Automorphism(H1, 3, SpeciesMatrix{{Scalar(-1)}}, "bad"));
  // swapping a and a* does not preserve the bracket sign
  CHECK_THROWS(Automorphism(W, 2, SpeciesMatrix{{Scalar(0), Scalar(1)}, {Scalar(1), Scalar(0)}}, "swap"));
  CHECK_THROWS(Automorphism::weyl_gp(H1, 2));
  CHECK_THROWS(Automorphism::permutation(H2, {1, 1}));
  // a rational rotation of order 4 on heisenberg(2)
  CHECK_NOTHROW(Automorphism(H2, 4, SpeciesMatrix{{Scalar(0), Scalar(-1)}, {Scalar(1), Scalar(0)}}, "rot"));
}

TEST_CASE("average projector examples") {
  const Automorphism g2 = Automorphism::weyl_gp(W, 2);
  CHECK(average_projector(g2, 0, w({a(-2), a(-1)})) == w({a(-2), a(-1)}));
  CHECK(average_projector(g2, 0, w({a(-1)})).is_zero());
  const Automorphism theta = Automorphism::theta(H1);
  CHECK(average_projector(theta, 1, w({h(1, -1)})) == w({h(1, -1)}));
  const Automorphism sigma = Automorphism::permutation(H2, {2, 1});
  const Scalar half(Rational(1, 2));
  CHECK(average_projector(sigma, 0, w({h(1, -1)})) == w({h(1, -1)}, 0, half) + w({h(2, -1)}, 0, half));
  CHECK(average_projector(sigma, 1, w({h(1, -1)})) == w({h(1, -1)}, 0, half) - w({h(2, -1)}, 0, half));
}

TEST_CASE("word charge examples") {
  for (std::uint64_t p : {2, 3, 4, 5}) {
    const Automorphism g = Automorphism::weyl_gp(W, p);
    CHECK(word_charge(Word{{a(-2), a(-1), as(0)}, 0}, g) == 1 % static_cast<long>(p));
  }
  CHECK(word_charge(Word{{h(1, -2), h(1, -1)}, 0}, Automorphism::theta(H1)) == 0);
  CHECK(word_charge(Word{{h(1, -2)}, 0}, Automorphism::theta(H1)) == 1);
  CHECK_FALSE(word_charge(Word{{h(1, -1)}, 0}, Automorphism::permutation(H2, {2, 1})).has_value());
}

TEST_CASE("normal_form is idempotent and multiplicative") {
  std::mt19937_64 rng(3);
  for (const Signature* sig : {&W, &H2}) {
    for (int trial = 0; trial < 60; ++trial) {
      const OperatorExpr u = random_expr(rng, *sig, 5, 2);
      const OperatorExpr v = random_expr(rng, *sig, 5, 2);
      const OperatorExpr nu = normal_form(u, *sig);
      CHECK(normal_form(nu, *sig) == nu);
      for (const auto& [word, c] : nu.terms()) CHECK(word.is_sorted());
      CHECK(normal_form(u * v, *sig) == normal_form(nu * normal_form(v, *sig), *sig));
    }
  }
}

TEST_CASE("Lie-level Jacobi identity") {
  std::mt19937_64 rng(5);
  for (const Signature* sig : {&W, &H2}) {
    for (int trial = 0; trial < 200; ++trial) {
      auto pick = [&]() {
        return Mode{static_cast<int>(rng() % static_cast<std::uint64_t>(sig->species_count())),
                    static_cast<long>(rng() % 9) - 4};
      };
      const Mode x = pick(), y = pick(), z = pick();
      // [x, y] = c K and K is central, so each double bracket is c [K, z] = 0.
      auto bracket_with_central = [&](Mode p, Mode q, Mode r) {
        const OperatorExpr pq = w({}, 1, sig->commutator(p, q));
        return normal_form(pq * w({r}) - w({r}) * pq, *sig);
      };
      const OperatorExpr sum =
          bracket_with_central(x, y, z) + bracket_with_central(y, z, x) + bracket_with_central(z, x, y);
      CHECK(sum.is_zero());
      // antisymmetry and support on m + n = 0
      CHECK(sig->commutator(x, y) == -sig->commutator(y, x));
      if (x.index + y.index != 0) CHECK(sig->commutator(x, y).is_zero());
    }
  }
}

TEST_CASE("group action and projector properties") {
  std::mt19937_64 rng(9);
  const Automorphism g3 = Automorphism::weyl_gp(W, 3);
  const Automorphism g4 = Automorphism::weyl_gp(W, 4);
  const Automorphism sigma = Automorphism::permutation(H2, {2, 1});
  const Automorphism rot(H2, 4, SpeciesMatrix{{Scalar(0), Scalar(-1)}, {Scalar(1), Scalar(0)}}, "rot");
  for (const Automorphism* g : {&g3, &g4, &sigma, &rot}) {
    const Signature& sig = g->signature();
    const long p = static_cast<long>(g->order());
    for (int trial = 0; trial < 15; ++trial) {
      const OperatorExpr e = random_expr(rng, sig, 3, 3, g->order());
      const OperatorExpr ne = normal_form(e, sig);
      CHECK(apply_automorphism(*g, p, e) == ne);
      OperatorExpr total;
      for (long j = 0; j < p; ++j) {
        const OperatorExpr pj = average_projector(*g, j, e);
        total += pj;
        CHECK(average_projector(*g, j, pj) == pj);
        // image is a zeta^j eigenvector
        CHECK(apply_automorphism(*g, 1, pj) == pj * Scalar::zeta(g->order(), j));
      }
      CHECK(total == ne);
    }
  }
}

TEST_CASE("diagonal projector agrees with word charge") {
  std::mt19937_64 rng(13);
  for (std::uint64_t p : {2, 3}) {
    const Automorphism g = Automorphism::weyl_gp(W, p);
    for (int trial = 0; trial < 40; ++trial) {
      Word word;
      const std::size_t len = 1 + rng() % 4;
      for (std::size_t k = 0; k < len; ++k)
        word.modes.push_back(Mode{static_cast<int>(rng() % 2), -static_cast<long>(rng() % 3)});
      std::sort(word.modes.begin(), word.modes.end());
      const long c = *word_charge(word, g);
      for (long j = 0; j < static_cast<long>(p); ++j) {
        const OperatorExpr pj = average_projector(g, j, OperatorExpr::word(word));
        if (j == c) CHECK(pj == OperatorExpr::word(word));
        else CHECK(pj.is_zero());
      }
    }
  }
}

}
