#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wcert {

using Rational = mpq_class;
using Integer = mpz_class;

/// Thrown when inverting (or dividing by) an exact zero.
class DivisionByZero : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class ParseError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

std::uint64_t euler_phi(std::uint64_t n);
std::uint64_t lcm_order(std::uint64_t a, std::uint64_t b);

/// The n-th cyclotomic polynomial, monic with integer coefficients listed
/// in ascending degree.
struct CyclotomicPolynomial {
  std::uint64_t order = 1;
  std::vector<Integer> coefficients;

  std::size_t degree() const { return coefficients.size() - 1; }
  std::string to_string() const;
};

/// Returns a cached reference; entries live for the whole process.
const CyclotomicPolynomial& cyclotomic_polynomial(std::uint64_t n);

/// Exact element of Q(zeta_n), stored as the reduced residue of a polynomial
/// in zeta_n modulo Phi_n, coefficients ascending.
///
/// Values that happen to be rational are always stored at order 1, so the
/// rational fast paths stay cheap. Operands of different order are lifted to
/// the lcm order before combining.
class Scalar {
public:
  Scalar();
  Scalar(long value); // NOLINT(google-explicit-constructor)
  Scalar(const Rational& value); // NOLINT(google-explicit-constructor)

  /// zeta_n^k, any integer k.
  static Scalar zeta(std::uint64_t n, long k = 1);
  /// Reduces an arbitrary-length polynomial in zeta_n modulo Phi_n.
  static Scalar from_polynomial(std::uint64_t n, std::vector<Rational> coeffs);

  /// Parses `3/2 + z - 1/4*z^2` with z read as zeta_n.
  static Scalar parse(std::string_view text, std::uint64_t session_order);

  std::uint64_t order() const { return order_; }
  std::span<const Rational> coeffs() const { return coeffs_; }

  bool is_zero() const;
  bool is_one() const;
  bool is_rational() const { return order_ == 1; }
  /// Only valid when is_rational().
  const Rational& rational_value() const { return coeffs_.front(); }

  /// Representation in Q(zeta_target); requires order() | target.
  std::vector<Rational> coeffs_at(std::uint64_t target) const;

  Scalar inverse() const;
  Scalar pow(long k) const;

  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar& operator*=(const Scalar& o);
  Scalar& operator/=(const Scalar& o);

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }
  Scalar operator-() const;

  friend bool operator==(const Scalar& a, const Scalar& b);

  /// Canonical ascending form in the symbol z = zeta_{session_order}.
  /// Requires order() | session_order.
  std::string to_string(std::uint64_t session_order) const;
  /// Uses the scalar's own order.
  std::string to_string() const { return to_string(order_); }

private:
  Scalar(std::uint64_t order, std::vector<Rational> coeffs);
  void normalize();
  void lift_to(std::uint64_t target);

  std::uint64_t order_ = 1;
  std::vector<Rational> coeffs_;
};

std::ostream& operator<<(std::ostream& os, const Scalar& s);

/// Formats a rational as `p` or `p/q`.
std::string rational_to_string(const Rational& q);

} // namespace wcert
