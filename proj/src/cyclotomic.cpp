#include "wcert/cyclotomic.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>

namespace wcert {

namespace {

using Poly = std::vector<Rational>;

void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

// Reduces p in place modulo the monic polynomial phi; result has exactly
// deg(phi) coefficients.
void reduce_mod(Poly& p, const CyclotomicPolynomial& phi) {
  const std::size_t d = phi.degree();
  for (std::size_t k = p.size(); k-- > d;) {
    if (p[k] == 0) continue;
    const Rational c = p[k];
    for (std::size_t j = 0; j < d; ++j) {
      if (phi.coefficients[j] != 0) p[k - d + j] -= c * phi.coefficients[j];
    }
    p[k] = 0;
  }
  p.resize(d);
}

// Polynomial long division over Q. Returns quotient, leaves remainder in num.
Poly divide(Poly& num, const Poly& den) {
  trim(num);
  Poly q;
  const std::size_t dd = den.size() - 1;
  if (num.size() < den.size()) return q;
  q.assign(num.size() - dd, Rational(0));
  const Rational lead_inv = 1 / den.back();
  for (std::size_t k = num.size(); k-- > dd;) {
    if (num[k] == 0) continue;
    const Rational c = num[k] * lead_inv;
    q[k - dd] = c;
    for (std::size_t j = 0; j <= dd; ++j) num[k - dd + j] -= c * den[j];
  }
  trim(num);
  return q;
}

Poly mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly r(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (b[j] != 0) r[i + j] += a[i] * b[j];
    }
  }
  return r;
}

Poly sub(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  trim(r);
  return r;
}

std::vector<Integer> int_poly_divide_exact(std::vector<Integer> num,
                                           const std::vector<Integer>& den) {
  // den is monic.
  const std::size_t dd = den.size() - 1;
  std::vector<Integer> q(num.size() - dd, Integer(0));
  for (std::size_t k = num.size(); k-- > dd;) {
    if (num[k] == 0) continue;
    const Integer c = num[k];
    q[k - dd] = c;
    for (std::size_t j = 0; j <= dd; ++j) num[k - dd + j] -= c * den[j];
  }
  for (const auto& r : num) {
    if (r != 0) throw std::logic_error("cyclotomic division left a remainder");
  }
  return q;
}

std::vector<Integer> int_poly_mul(const std::vector<Integer>& a,
                                  const std::vector<Integer>& b) {
  std::vector<Integer> r(a.size() + b.size() - 1, Integer(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::uint64_t, std::unique_ptr<CyclotomicPolynomial>>& cache() {
  static std::map<std::uint64_t, std::unique_ptr<CyclotomicPolynomial>> c;
  return c;
}

CyclotomicPolynomial compute_cyclotomic(std::uint64_t n) {
  CyclotomicPolynomial out;
  out.order = n;
  if (n == 1) {
    out.coefficients = {Integer(-1), Integer(1)};
    return out;
  }
  std::vector<Integer> num(n + 1, Integer(0));
  num[0] = -1;
  num[n] = 1;
  std::vector<Integer> den{Integer(1)};
  for (std::uint64_t d = 1; d < n; ++d) {
    if (n % d == 0) den = int_poly_mul(den, cyclotomic_polynomial(d).coefficients);
  }
  out.coefficients = int_poly_divide_exact(std::move(num), den);
  return out;
}

} // namespace

std::uint64_t euler_phi(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("euler_phi: n must be positive");
  std::uint64_t result = n;
  std::uint64_t m = n;
  for (std::uint64_t p = 2; p * p <= m; ++p) {
    if (m % p != 0) continue;
    while (m % p == 0) m /= p;
    result -= result / p;
  }
  if (m > 1) result -= result / m;
  return result;
}

std::uint64_t lcm_order(std::uint64_t a, std::uint64_t b) { return std::lcm(a, b); }

std::string CyclotomicPolynomial::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t k = coefficients.size(); k-- > 0;) {
    const Integer& c = coefficients[k];
    if (c == 0) continue;
    const bool neg = c < 0;
    const Integer mag = neg ? Integer(-c) : c;
    if (first) {
      if (neg) os << "-";
    } else {
      os << (neg ? " - " : " + ");
    }
    if (mag != 1 || k == 0) os << mag.get_str();
    if (k > 0) {
      if (mag != 1) os << "*";
      os << "x";
      if (k > 1) os << "^" << k;
    }
    first = false;
  }
  return first ? "0" : os.str();
}

const CyclotomicPolynomial& cyclotomic_polynomial(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("cyclotomic_polynomial: order must be >= 1");
  {
    std::lock_guard lock(cache_mutex());
    auto it = cache().find(n);
    if (it != cache().end()) return *it->second;
  }
  // Computed outside the lock: the recursion re-enters for divisors.
  auto computed = std::make_unique<CyclotomicPolynomial>(compute_cyclotomic(n));
  std::lock_guard lock(cache_mutex());
  auto [it, inserted] = cache().emplace(n, std::move(computed));
  return *it->second;
}

// ---------------------------------------------------------------------------

Scalar::Scalar() : order_(1), coeffs_{Rational(0)} {}
Scalar::Scalar(long value) : order_(1), coeffs_{Rational(value)} {}
Scalar::Scalar(const Rational& value) : order_(1), coeffs_{value} { coeffs_[0].canonicalize(); }

Scalar::Scalar(std::uint64_t order, std::vector<Rational> coeffs)
    : order_(order), coeffs_(std::move(coeffs)) {
  normalize();
}

void Scalar::normalize() {
  if (order_ == 1 || coeffs_.size() <= 1) {
    coeffs_.resize(1);
    order_ = 1;
    return;
  }
  for (std::size_t k = 1; k < coeffs_.size(); ++k) {
    if (coeffs_[k] != 0) return;
  }
  coeffs_.resize(1);
  order_ = 1;
}

Scalar Scalar::from_polynomial(std::uint64_t n, std::vector<Rational> coeffs) {
  if (n == 0) throw std::invalid_argument("Scalar: order must be >= 1");
  const auto& phi = cyclotomic_polynomial(n);
  if (coeffs.empty()) return Scalar();
  for (auto& c : coeffs) c.canonicalize();
  reduce_mod(coeffs, phi);
  return Scalar(n, std::move(coeffs));
}

Scalar Scalar::zeta(std::uint64_t n, long k) {
  if (n == 0) throw std::invalid_argument("zeta: order must be >= 1");
  const long nn = static_cast<long>(n);
  const long e = ((k % nn) + nn) % nn;
  std::vector<Rational> c(static_cast<std::size_t>(e) + 1, Rational(0));
  c[static_cast<std::size_t>(e)] = 1;
  return from_polynomial(n, std::move(c));
}

bool Scalar::is_zero() const { return order_ == 1 && coeffs_.front() == 0; }
bool Scalar::is_one() const { return order_ == 1 && coeffs_.front() == 1; }

std::vector<Rational> Scalar::coeffs_at(std::uint64_t target) const {
  if (target == 0 || target % order_ != 0) {
    throw std::invalid_argument("Scalar: cannot express zeta_" + std::to_string(order_) +
                                " in Q(zeta_" + std::to_string(target) + ")");
  }
  const std::size_t d = euler_phi(target);
  if (target == order_) return coeffs_;
  if (order_ == 1) {
    std::vector<Rational> out(d, Rational(0));
    out[0] = coeffs_.front();
    return out;
  }
  const std::uint64_t ratio = target / order_;
  Poly p((coeffs_.size() - 1) * ratio + 1, Rational(0));
  for (std::size_t k = 0; k < coeffs_.size(); ++k) p[k * ratio] = coeffs_[k];
  if (p.size() < d) p.resize(d, Rational(0));
  reduce_mod(p, cyclotomic_polynomial(target));
  return p;
}

void Scalar::lift_to(std::uint64_t target) {
  if (target == order_) return;
  coeffs_ = coeffs_at(target);
  order_ = target;
}

Scalar& Scalar::operator+=(const Scalar& o) {
  if (order_ == 1 && o.order_ == 1) {
    coeffs_.front() += o.coeffs_.front();
    return *this;
  }
  if (o.order_ == 1) {
    coeffs_.front() += o.coeffs_.front();
    normalize();
    return *this;
  }
  const std::uint64_t target = lcm_order(order_, o.order_);
  lift_to(target);
  if (o.order_ == target) {
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  } else {
    const auto oc = o.coeffs_at(target);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += oc[k];
  }
  normalize();
  return *this;
}

Scalar Scalar::operator-() const {
  Scalar r = *this;
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

Scalar& Scalar::operator-=(const Scalar& o) { return *this += -o; }

Scalar& Scalar::operator*=(const Scalar& o) {
  if (o.order_ == 1) {
    const Rational f = o.coeffs_.front();
    if (f == 0) {
      *this = Scalar();
      return *this;
    }
    for (auto& c : coeffs_) c *= f;
    return *this;
  }
  if (order_ == 1) {
    const Rational f = coeffs_.front();
    *this = o;
    if (f == 0) {
      *this = Scalar();
      return *this;
    }
    for (auto& c : coeffs_) c *= f;
    return *this;
  }
  const std::uint64_t target = lcm_order(order_, o.order_);
  lift_to(target);
  Poly prod = mul(coeffs_, o.order_ == target ? o.coeffs_ : o.coeffs_at(target));
  if (prod.size() < coeffs_.size()) prod.resize(coeffs_.size(), Rational(0));
  reduce_mod(prod, cyclotomic_polynomial(target));
  coeffs_ = std::move(prod);
  normalize();
  return *this;
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw DivisionByZero("Scalar: inverse of zero");
  if (order_ == 1) return Scalar(Rational(1 / coeffs_.front()));
  const auto& phi = cyclotomic_polynomial(order_);
  // Extended Euclid on (Phi_n, a); tracks the cofactor of a only.
  Poly r0(phi.coefficients.begin(), phi.coefficients.end());
  Poly r1 = coeffs_;
  trim(r1);
  Poly s0;
  Poly s1{Rational(1)};
  while (!r1.empty()) {
    Poly rem = r0;
    Poly q = divide(rem, r1);
    Poly s2 = sub(s0, mul(q, s1));
    r0 = std::move(r1);
    r1 = std::move(rem);
    s0 = std::move(s1);
    s1 = std::move(s2);
  }
  // r0 is a nonzero constant because Phi_n is irreducible.
  if (r0.size() != 1) throw std::logic_error("Scalar::inverse: gcd is not constant");
  const Rational inv = 1 / r0.front();
  for (auto& c : s0) c *= inv;
  return from_polynomial(order_, std::move(s0));
}

Scalar& Scalar::operator/=(const Scalar& o) { return *this *= o.inverse(); }

Scalar Scalar::pow(long k) const {
  if (k < 0) return inverse().pow(-k);
  Scalar result(1);
  Scalar base = *this;
  while (k > 0) {
    if (k & 1) result *= base;
    k >>= 1;
    if (k) base *= base;
  }
  return result;
}

bool operator==(const Scalar& a, const Scalar& b) {
  if (a.order_ == b.order_) return a.coeffs_ == b.coeffs_;
  if (a.order_ == 1 || b.order_ == 1) return false;
  const std::uint64_t target = lcm_order(a.order_, b.order_);
  return a.coeffs_at(target) == b.coeffs_at(target);
}

std::string rational_to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string Scalar::to_string(std::uint64_t session_order) const {
  const auto c = coeffs_at(session_order);
  std::ostringstream os;
  bool first = true;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] == 0) continue;
    const bool neg = c[k] < 0;
    const Rational mag = neg ? Rational(-c[k]) : c[k];
    if (first) {
      if (neg) os << "-";
    } else {
      os << (neg ? " - " : " + ");
    }
    if (k == 0) {
      os << rational_to_string(mag);
    } else {
      if (mag != 1) os << rational_to_string(mag) << "*";
      os << "z";
      if (k > 1) os << "^" << k;
    }
    first = false;
  }
  return first ? "0" : os.str();
}

std::ostream& operator<<(std::ostream& os, const Scalar& s) {
  os << s.to_string();
  if (s.order() > 1) os << " [z=zeta_" << s.order() << "]";
  return os;
}

// ---------------------------------------------------------------------------
// Text format: sum of terms `c`, `c*z^k`, `z^k`, `c*z`; c rational.

namespace {

class ScalarParser {
public:
  ScalarParser(std::string_view text, std::uint64_t order) : s_(text), order_(order) {}

  Scalar parse() {
    skip_ws();
    if (at_end()) fail("empty scalar");
    Scalar total;
    bool first = true;
    while (true) {
      skip_ws();
      if (at_end()) break;
      int sign = 1;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
        skip_ws();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      Scalar term = parse_term();
      total += sign < 0 ? -term : term;
      first = false;
    }
    return total;
  }

private:
  Scalar parse_term() {
    Scalar value(1);
    bool any = false;
    while (true) {
      skip_ws();
      if (at_end()) break;
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        value *= Scalar(parse_rational());
      } else if (c == 'z') {
        ++pos_;
        long e = 1;
        skip_ws();
        if (!at_end() && peek() == '^') {
          ++pos_;
          e = parse_signed_int();
        }
        value *= Scalar::zeta(order_, e);
      } else if (c == '(') {
        ++pos_;
        const std::size_t start = pos_;
        int depth = 1;
        while (!at_end() && depth > 0) {
          if (peek() == '(') ++depth;
          if (peek() == ')') --depth;
          ++pos_;
        }
        if (depth != 0) fail("unbalanced parenthesis");
        value *= ScalarParser(s_.substr(start, pos_ - start - 1), order_).parse();
      } else {
        break;
      }
      any = true;
      skip_ws();
      if (!at_end() && peek() == '*') {
        ++pos_;
        continue;
      }
      if (!at_end() && (peek() == '+' || peek() == '-')) break;
      if (!at_end() && peek() != 'z' && peek() != '(' &&
          !std::isdigit(static_cast<unsigned char>(peek())))
        fail(std::string("unexpected character '") + peek() + "'");
    }
    if (!any) fail("expected a term");
    return value;
  }

  Rational parse_rational() {
    Integer num(parse_digits());
    skip_ws();
    if (!at_end() && peek() == '/') {
      ++pos_;
      skip_ws();
      Integer den(parse_digits());
      if (den == 0) throw DivisionByZero("scalar literal with zero denominator");
      Rational q(num, den);
      q.canonicalize();
      return q;
    }
    return Rational(num);
  }

  std::string parse_digits() {
    const std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (start == pos_) fail("expected digits");
    return std::string(s_.substr(start, pos_ - start));
  }

  long parse_signed_int() {
    skip_ws();
    long sign = 1;
    if (!at_end() && (peek() == '-' || peek() == '+')) {
      sign = peek() == '-' ? -1 : 1;
      ++pos_;
    }
    return sign * std::stol(parse_digits());
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("scalar '" + std::string(s_) + "': " + why + " at offset " +
                     std::to_string(pos_));
  }

  std::string_view s_;
  std::uint64_t order_;
  std::size_t pos_ = 0;
};

} // namespace

Scalar Scalar::parse(std::string_view text, std::uint64_t session_order) {
  if (session_order == 0) throw std::invalid_argument("Scalar::parse: order must be >= 1");
  return ScalarParser(text, session_order).parse();
}

} // namespace wcert
