#pragma once

#include "wcert/cyclotomic.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wcert {

/// A mode x_s(n) of generator species s.
struct Mode {
  int species = 0;
  long index = 0;

  friend constexpr bool operator==(const Mode&, const Mode&) = default;
  // Canonical order: index ascending, species id as tiebreak.
  friend constexpr std::strong_ordering operator<=>(const Mode& a, const Mode& b) {
    if (auto c = a.index <=> b.index; c != 0) return c;
    return a.species <=> b.species;
  }
};

enum class AlgebraKind { Heisenberg, Weyl };

/// The mode Lie algebra of a free-field vertex algebra together with its
/// Whittaker pair: species, central commutator rule, degree table and the
/// annihilation subalgebra n.
///
/// Every bracket is a multiple of the central element K; the rewriting engine
/// relies on this and the constructor checks it on a window of indices.
class Signature {
public:
  static Signature heisenberg(int rank);
  static Signature weyl();

  AlgebraKind kind() const { return kind_; }
  int rank() const { return rank_; }
  int species_count() const { return static_cast<int>(names_.size()); }
  const std::string& species_name(int id) const;
  std::optional<int> species_id(std::string_view name) const;
  /// `heisenberg(2)` or `weyl`.
  std::string name() const;

  /// c such that [x, y] = c K.
  long commutator_value(Mode x, Mode y) const;
  Scalar commutator(Mode x, Mode y) const { return Scalar(commutator_value(x, y)); }

  /// Twice the degree; Weyl modes have half-integer degrees.
  long degree_twice(Mode x) const;
  bool is_annihilation(Mode x) const;
  bool is_creation(Mode x) const { return !is_annihilation(x); }

  Scalar central_charge() const;

  std::string format(Mode x) const;
  Mode parse_mode(std::string_view text) const;

  friend bool operator==(const Signature& a, const Signature& b) {
    return a.kind_ == b.kind_ && a.rank_ == b.rank_;
  }

private:
  Signature(AlgebraKind kind, int rank, std::vector<std::string> names);
  void check_species(Mode x) const;
  void check_quasi_commutative() const;

  AlgebraKind kind_;
  int rank_;
  std::vector<std::string> names_;
};

/// Ordered product of modes times K^k_power.
struct Word {
  std::vector<Mode> modes;
  unsigned k_power = 0;

  bool is_identity() const { return modes.empty() && k_power == 0; }
  bool is_sorted() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;
};

/// Finite formal sum of words with Scalar coefficients, an element of U(L).
/// Zero coefficients are never stored.
class OperatorExpr {
public:
  using Terms = std::map<Word, Scalar>;

  OperatorExpr() = default;
  static OperatorExpr identity() { return constant(Scalar(1)); }
  static OperatorExpr constant(const Scalar& c);
  static OperatorExpr mode(Mode x, const Scalar& c = Scalar(1));
  static OperatorExpr word(Word w, const Scalar& c = Scalar(1));

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add_term(const Word& w, const Scalar& c);

  OperatorExpr& operator+=(const OperatorExpr& o);
  OperatorExpr& operator-=(const OperatorExpr& o);
  OperatorExpr& operator*=(const Scalar& c);
  friend OperatorExpr operator+(OperatorExpr a, const OperatorExpr& b) { return a += b; }
  friend OperatorExpr operator-(OperatorExpr a, const OperatorExpr& b) { return a -= b; }
  friend OperatorExpr operator*(OperatorExpr a, const Scalar& c) { return a *= c; }
  friend OperatorExpr operator*(const Scalar& c, OperatorExpr a) { return a *= c; }
  /// Concatenation product; not normal ordered.
  friend OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b);

  /// Literal comparison of stored terms; normal-order both sides first to
  /// compare elements of U(L).
  friend bool operator==(const OperatorExpr& a, const OperatorExpr& b);

private:
  Terms terms_;
};

/// PBW rewriting: swaps adjacent out-of-order modes, x y -> y x + [x,y],
/// until every word is canonically sorted.
OperatorExpr normal_form(const OperatorExpr& e, const Signature& sig);

Word parse_word(std::string_view text, const Signature& sig);
/// `coeff * word +/- ...`; coefficients use the Scalar text format.
OperatorExpr parse_expr(std::string_view text, const Signature& sig, std::uint64_t order);
std::string format_word(const Word& w, const Signature& sig);
std::string format_expr(const OperatorExpr& e, const Signature& sig, std::uint64_t order);

using SpeciesMatrix = std::vector<std::vector<Scalar>>;

/// Finite-order automorphism acting linearly on species, index preserving:
/// g(x_s(n)) = sum_t M[t][s] x_t(n).
class Automorphism {
public:
  /// Validates M^order = I, invariance of the commutator rule and that n is
  /// mapped into itself.
  Automorphism(Signature sig, std::uint64_t order, SpeciesMatrix matrix, std::string name);

  static Automorphism identity(const Signature& sig);
  /// x -> -x on every species (order 2).
  static Automorphism theta(const Signature& sig);
  /// Weyl only: a(n) -> zeta_p a(n), a*(n) -> zeta_p^{-1} a*(n).
  static Automorphism weyl_gp(const Signature& sig, std::uint64_t p);
  /// Heisenberg only: h_i -> h_{images[i-1]}, one-based.
  static Automorphism permutation(const Signature& sig, const std::vector<int>& images);

  const Signature& signature() const { return sig_; }
  std::uint64_t order() const { return order_; }
  const std::string& name() const { return name_; }
  const SpeciesMatrix& matrix() const { return powers_[1 % powers_.size()]; }
  const SpeciesMatrix& matrix_power(long k) const { return powers_[reduce_power(k)]; }
  std::size_t reduce_power(long k) const;

  /// g^k x as a species-linear combination with nonzero coefficients.
  std::vector<std::pair<Mode, Scalar>> image(Mode x, long k) const;

  /// For a diagonal matrix with entries zeta_p^{e_s}, the exponents e_s.
  const std::optional<std::vector<long>>& diagonal_exponents() const { return diag_; }

private:
  Signature sig_;
  std::uint64_t order_;
  std::string name_;
  std::vector<SpeciesMatrix> powers_;
  std::optional<std::vector<long>> diag_;
};

OperatorExpr apply_automorphism(const Automorphism& g, long k, const OperatorExpr& e);
/// (1/p) sum_k zeta_p^{-jk} g^k(e): the zeta^j-eigencomponent of e.
OperatorExpr average_projector(const Automorphism& g, long j, const OperatorExpr& e);
/// Total eigen-exponent mod p for diagonal g; nullopt ("mixed") otherwise.
std::optional<long> word_charge(const Word& w, const Automorphism& g);

} // namespace wcert
