#pragma once

#include "wcert/cyclotomic.hpp"
#include "wcert/mode_algebra.hpp"

#include <compare>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wcert {

/// Degrees of Weyl modes are half-integers; stored doubled.
struct HalfInteger {
  long twice = 0;

  static HalfInteger from_int(long n) { return HalfInteger{2 * n}; }
  /// Accepts `2`, `3/2`, `1.5`.
  static HalfInteger parse(std::string_view text);
  std::string to_string() const;

  friend constexpr auto operator<=>(const HalfInteger&, const HalfInteger&) = default;
};

/// lambda: n -> scalars with finite support and level (value on K).
class WhittakerFunction {
public:
  /// Rejects modes outside n and levels other than 1.
  WhittakerFunction(Signature sig, std::map<Mode, Scalar> values, Scalar level = Scalar(1));

  static WhittakerFunction zero(const Signature& sig);
  /// Heisenberg: per_species[i][n] = lambda(h_{i+1}(n)).
  static WhittakerFunction heisenberg(const Signature& sig,
                                      const std::vector<std::vector<Scalar>>& per_species);
  /// Weyl: lambda[n] = value on a(n) (n >= 0), mu[n-1] = value on a*(n) (n >= 1).
  static WhittakerFunction weyl(const Signature& sig, const std::vector<Scalar>& lambda,
                                const std::vector<Scalar>& mu);

  const Signature& signature() const { return sig_; }
  const std::map<Mode, Scalar>& values() const { return values_; }
  Scalar value(Mode x) const;
  const Scalar& level() const { return level_; }
  /// Largest index carrying a nonzero value (0 for the zero function).
  long support_bound() const;
  bool is_zero() const { return values_.empty(); }

  std::string to_string(std::uint64_t order) const;

  friend bool operator==(const WhittakerFunction& a, const WhittakerFunction& b);

private:
  Signature sig_;
  std::map<Mode, Scalar> values_;
  Scalar level_;
};

/// Canonically sorted multiset of creation modes; the empty monomial is the
/// cyclic vector.
struct Monomial {
  std::vector<Mode> modes;

  std::size_t length() const { return modes.size(); }
  friend bool operator==(const Monomial&, const Monomial&) = default;
  friend auto operator<=>(const Monomial&, const Monomial&) = default;
};

long degree_twice(const Monomial& u, const Signature& sig);
/// Filtration order: degree first, then lexicographic reading modes from
/// the highest index down.
bool filtration_less(const Monomial& a, const Monomial& b, const Signature& sig);
std::string format_monomial(const Monomial& u, const Signature& sig);

class ModuleVector {
public:
  using Terms = std::map<Monomial, Scalar>;

  ModuleVector() = default;
  static ModuleVector cyclic(const Scalar& c = Scalar(1));
  static ModuleVector monomial(Monomial u, const Scalar& c = Scalar(1));

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  Scalar coefficient(const Monomial& u) const;

  void add_term(const Monomial& u, const Scalar& c);
  ModuleVector& operator+=(const ModuleVector& o);
  ModuleVector& operator-=(const ModuleVector& o);
  ModuleVector& operator*=(const Scalar& c);
  friend ModuleVector operator+(ModuleVector a, const ModuleVector& b) { return a += b; }
  friend ModuleVector operator-(ModuleVector a, const ModuleVector& b) { return a -= b; }
  friend ModuleVector operator*(ModuleVector a, const Scalar& c) { return a *= c; }
  friend ModuleVector operator*(const Scalar& c, ModuleVector a) { return a *= c; }
  friend bool operator==(const ModuleVector& a, const ModuleVector& b);

  /// Largest |index| among creation modes present (0 if none).
  long max_creation_index() const;
  std::size_t max_length() const;
  long max_degree_twice(const Signature& sig) const;

private:
  Terms terms_;
};

std::string format_vector(const ModuleVector& v, const Signature& sig, std::uint64_t order);

/// A standard Whittaker module M_lambda, optionally twisted: with twist
/// (g, k) the mode x acts as g^k x does on the base module.
class ModuleHandle {
public:
  explicit ModuleHandle(WhittakerFunction whittaker,
                        std::shared_ptr<const Automorphism> twist = nullptr, long power = 0);

  const Signature& signature() const { return base_.signature(); }
  const WhittakerFunction& base_whittaker() const { return base_; }
  const std::shared_ptr<const Automorphism>& twist() const { return twist_; }
  long twist_power() const { return power_; }
  bool is_twisted() const { return twist_ && power_ != 0; }

  /// W o g^k for this handle's own automorphism; composes powers.
  ModuleHandle twisted_by(const std::shared_ptr<const Automorphism>& g, long k) const;

private:
  WhittakerFunction base_;
  std::shared_ptr<const Automorphism> twist_;
  long power_ = 0;
};

ModuleHandle build_module(const WhittakerFunction& whittaker,
                          std::shared_ptr<const Automorphism> twist = nullptr, long power = 0);

ModuleVector act_mode(Mode x, const ModuleVector& v, const ModuleHandle& m);
ModuleVector act_expr(const OperatorExpr& e, const ModuleVector& v, const ModuleHandle& m);

/// L(n) v with the normally ordered sum truncated to the window where a
/// summand can act nonzero; `extra_width` widens the window.
ModuleVector act_virasoro(long n, const ModuleVector& v, const ModuleHandle& m,
                          long extra_width = 0);
/// Half-width of the summation window used by act_virasoro.
long virasoro_window(long n, const ModuleVector& v, const ModuleHandle& m);

/// lambda o g^k for a handle twisted by (g, k).
WhittakerFunction whittaker_type(const ModuleHandle& m);

/// Least k with (x - lambda(x))^k v = 0.
int generalized_eigen_degree(Mode x, const ModuleVector& v, const ModuleHandle& m);

/// Monomials of degree <= D in filtration order.
std::vector<Monomial> filtration_basis(const Signature& sig, HalfInteger max_degree);
inline std::vector<Monomial> filtration_basis(const ModuleHandle& m, HalfInteger max_degree) {
  return filtration_basis(m.signature(), max_degree);
}

struct ConformalData {
  Scalar central_charge;
  std::string recipe;
};
ConformalData conformal_data(const Signature& sig);

/// Up to `max_terms` distinct monomials from `basis` with coefficients in
/// {1, ..., 5}. Draws only through operator() of the engine, so sequences
/// are reproducible across standard libraries.
ModuleVector random_combination(std::span<const Monomial> basis, std::mt19937_64& rng,
                                std::size_t max_terms);

} // namespace wcert
