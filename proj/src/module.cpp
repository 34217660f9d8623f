#include "wcert/module.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

namespace wcert {

HalfInteger HalfInteger::parse(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
          s.end());
  auto bad = [&]() { return ParseError("half-integer '" + std::string(text) + "' is invalid"); };
  if (s.empty()) throw bad();
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      const long num = std::stol(s.substr(0, slash));
      const long den = std::stol(s.substr(slash + 1));
      if (den == 1) return HalfInteger{2 * num};
      if (den == 2) return HalfInteger{num};
      throw bad();
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
      const std::string frac = s.substr(dot + 1);
      const long whole = std::stol(s.substr(0, dot));
      const bool neg = !s.empty() && s[0] == '-';
      if (frac.find_first_not_of('0') == std::string::npos) return HalfInteger{2 * whole};
      if (frac == "5" || frac.find_first_not_of('0', 1) == std::string::npos) {
        if (frac[0] != '5') throw bad();
        return HalfInteger{2 * whole + (neg ? -1 : 1)};
      }
      throw bad();
    }
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw bad();
    return HalfInteger{2 * v};
  } catch (const std::logic_error&) {
    throw bad();
  }
}

std::string HalfInteger::to_string() const {
  if (twice % 2 == 0) return std::to_string(twice / 2);
  return std::to_string(twice) + "/2";
}

// ---------------------------------------------------------------------------

WhittakerFunction::WhittakerFunction(Signature sig, std::map<Mode, Scalar> values, Scalar level)
    : sig_(std::move(sig)), level_(std::move(level)) {
  if (!level_.is_one())
    throw std::invalid_argument("only level-1 Whittaker modules are supported");
  for (auto& [x, c] : values) {
    if (!sig_.is_annihilation(x))
      throw std::invalid_argument("Whittaker function support must lie in n; got " +
                                  sig_.format(x));
    if (!c.is_zero()) values_.emplace(x, std::move(c));
  }
}

WhittakerFunction WhittakerFunction::zero(const Signature& sig) { return WhittakerFunction(sig, {}); }

WhittakerFunction WhittakerFunction::heisenberg(const Signature& sig,
                                                const std::vector<std::vector<Scalar>>& per_species) {
  if (sig.kind() != AlgebraKind::Heisenberg)
    throw std::invalid_argument("heisenberg Whittaker data for a non-Heisenberg algebra");
  if (static_cast<int>(per_species.size()) > sig.species_count())
    throw std::invalid_argument("more lambda sequences than Heisenberg generators");
  std::map<Mode, Scalar> values;
  for (std::size_t i = 0; i < per_species.size(); ++i)
    for (std::size_t n = 0; n < per_species[i].size(); ++n)
      values.emplace(Mode{static_cast<int>(i), static_cast<long>(n)}, per_species[i][n]);
  return WhittakerFunction(sig, std::move(values));
}

WhittakerFunction WhittakerFunction::weyl(const Signature& sig, const std::vector<Scalar>& lambda,
                                          const std::vector<Scalar>& mu) {
  if (sig.kind() != AlgebraKind::Weyl)
    throw std::invalid_argument("weyl Whittaker data for a non-Weyl algebra");
  std::map<Mode, Scalar> values;
  for (std::size_t n = 0; n < lambda.size(); ++n)
    values.emplace(Mode{0, static_cast<long>(n)}, lambda[n]);
  for (std::size_t n = 0; n < mu.size(); ++n)
    values.emplace(Mode{1, static_cast<long>(n) + 1}, mu[n]);
  return WhittakerFunction(sig, std::move(values));
}

Scalar WhittakerFunction::value(Mode x) const {
  if (!sig_.is_annihilation(x))
    throw std::invalid_argument("Whittaker function evaluated outside n at " + sig_.format(x));
  auto it = values_.find(x);
  return it == values_.end() ? Scalar(0) : it->second;
}

long WhittakerFunction::support_bound() const {
  long r = 0;
  for (const auto& [x, c] : values_) r = std::max(r, x.index);
  return r;
}

std::string WhittakerFunction::to_string(std::uint64_t order) const {
  std::string out = "{";
  bool first = true;
  for (const auto& [x, c] : values_) {
    if (!first) out += ", ";
    out += sig_.format(x) + ": " + c.to_string(order);
    first = false;
  }
  return out + "}";
}

bool operator==(const WhittakerFunction& a, const WhittakerFunction& b) {
  if (!(a.sig_ == b.sig_) || a.values_.size() != b.values_.size()) return false;
  auto ib = b.values_.begin();
  for (const auto& [x, c] : a.values_) {
    if (!(x == ib->first) || !(c == ib->second)) return false;
    ++ib;
  }
  return true;
}

// ---------------------------------------------------------------------------

long degree_twice(const Monomial& u, const Signature& sig) {
  long d = 0;
  for (const auto& x : u.modes) d += sig.degree_twice(x);
  return d;
}

bool filtration_less(const Monomial& a, const Monomial& b, const Signature& sig) {
  const long da = degree_twice(a, sig);
  const long db = degree_twice(b, sig);
  if (da != db) return da < db;
  return std::lexicographical_compare(a.modes.rbegin(), a.modes.rend(), b.modes.rbegin(),
                                      b.modes.rend(), std::greater<Mode>());
}

std::string format_monomial(const Monomial& u, const Signature& sig) {
  if (u.modes.empty()) return "w";
  std::string out;
  for (const auto& x : u.modes) {
    if (!out.empty()) out += ' ';
    out += sig.format(x);
  }
  return out;
}

ModuleVector ModuleVector::cyclic(const Scalar& c) { return monomial(Monomial{}, c); }

ModuleVector ModuleVector::monomial(Monomial u, const Scalar& c) {
  ModuleVector v;
  v.add_term(u, c);
  return v;
}

Scalar ModuleVector::coefficient(const Monomial& u) const {
  auto it = terms_.find(u);
  return it == terms_.end() ? Scalar(0) : it->second;
}

void ModuleVector::add_term(const Monomial& u, const Scalar& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(u, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

ModuleVector& ModuleVector::operator+=(const ModuleVector& o) {
  for (const auto& [u, c] : o.terms_) add_term(u, c);
  return *this;
}

ModuleVector& ModuleVector::operator-=(const ModuleVector& o) {
  for (const auto& [u, c] : o.terms_) add_term(u, -c);
  return *this;
}

ModuleVector& ModuleVector::operator*=(const Scalar& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& [u, v] : terms_) v *= c;
  return *this;
}

bool operator==(const ModuleVector& a, const ModuleVector& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  auto ib = b.terms_.begin();
  for (const auto& [u, c] : a.terms_) {
    if (!(u == ib->first) || !(c == ib->second)) return false;
    ++ib;
  }
  return true;
}

long ModuleVector::max_creation_index() const {
  long n = 0;
  for (const auto& [u, c] : terms_)
    for (const auto& x : u.modes) n = std::max(n, std::labs(x.index));
  return n;
}

std::size_t ModuleVector::max_length() const {
  std::size_t n = 0;
  for (const auto& [u, c] : terms_) n = std::max(n, u.length());
  return n;
}

long ModuleVector::max_degree_twice(const Signature& sig) const {
  long d = 0;
  for (const auto& [u, c] : terms_) d = std::max(d, degree_twice(u, sig));
  return d;
}

std::string format_vector(const ModuleVector& v, const Signature& sig, std::uint64_t order) {
  if (v.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [u, c] : v.terms()) {
    bool negative = false;
    std::string coeff;
    if (c.is_rational()) {
      Rational q = c.rational_value();
      negative = q < 0;
      if (negative) q = -q;
      coeff = q == 1 ? "" : rational_to_string(q) + " * ";
    } else {
      coeff = "(" + c.to_string(order) + ") * ";
    }
    const std::string term = coeff + format_monomial(u, sig);
    if (first) {
      out = (negative ? "-" : "") + term;
    } else {
      out += (negative ? " - " : " + ") + term;
    }
    first = false;
  }
  return out;
}

// ---------------------------------------------------------------------------

ModuleHandle::ModuleHandle(WhittakerFunction whittaker, std::shared_ptr<const Automorphism> twist,
                           long power)
    : base_(std::move(whittaker)), twist_(std::move(twist)), power_(0) {
  if (twist_) {
    if (!(twist_->signature() == base_.signature()))
      throw std::invalid_argument("twist automorphism acts on a different algebra");
    power_ = static_cast<long>(twist_->reduce_power(power));
  }
}

ModuleHandle ModuleHandle::twisted_by(const std::shared_ptr<const Automorphism>& g, long k) const {
  if (!g) return *this;
  if (twist_ && twist_ != g)
    throw std::invalid_argument("cannot compose twists by different automorphisms");
  return ModuleHandle(base_, g, power_ + k);
}

ModuleHandle build_module(const WhittakerFunction& whittaker,
                          std::shared_ptr<const Automorphism> twist, long power) {
  return ModuleHandle(whittaker, std::move(twist), power);
}

namespace {

// Untwisted action of a single mode on c * u.
void act_base(const Signature& sig, const WhittakerFunction& lambda, Mode x, const Monomial& u,
              const Scalar& c, ModuleVector& out) {
  if (sig.is_creation(x)) {
    Monomial w = u;
    w.modes.insert(std::upper_bound(w.modes.begin(), w.modes.end(), x), x);
    out.add_term(w, c);
    return;
  }
  // x c_1 ... c_r w = sum_i [x, c_i] (c_1 .. ^c_i .. c_r) w + lambda(x) c_1 ... c_r w.
  for (std::size_t i = 0; i < u.modes.size(); ++i) {
    const long br = sig.commutator_value(x, u.modes[i]);
    if (br == 0) continue;
    Monomial w;
    w.modes.reserve(u.modes.size() - 1);
    for (std::size_t k = 0; k < u.modes.size(); ++k)
      if (k != i) w.modes.push_back(u.modes[k]);
    out.add_term(w, c * Scalar(br) * lambda.level());
  }
  const Scalar lx = lambda.value(x);
  if (!lx.is_zero()) out.add_term(u, c * lx);
}

} // namespace

ModuleVector act_mode(Mode x, const ModuleVector& v, const ModuleHandle& m) {
  const Signature& sig = m.signature();
  ModuleVector out;
  if (m.is_twisted()) {
    const auto img = m.twist()->image(x, m.twist_power());
    for (const auto& [u, c] : v.terms())
      for (const auto& [y, yc] : img) act_base(sig, m.base_whittaker(), y, u, c * yc, out);
    return out;
  }
  for (const auto& [u, c] : v.terms()) act_base(sig, m.base_whittaker(), x, u, c, out);
  return out;
}

ModuleVector act_expr(const OperatorExpr& e, const ModuleVector& v, const ModuleHandle& m) {
  ModuleVector result;
  const Scalar& level = m.base_whittaker().level();
  for (const auto& [w, c] : e.terms()) {
    ModuleVector cur = v;
    for (auto it = w.modes.rbegin(); it != w.modes.rend() && !cur.is_zero(); ++it)
      cur = act_mode(*it, cur, m);
    if (cur.is_zero()) continue;
    result += cur * (c * level.pow(static_cast<long>(w.k_power)));
  }
  return result;
}

long virasoro_window(long n, const ModuleVector& v, const ModuleHandle& m) {
  return v.max_creation_index() + m.base_whittaker().support_bound() + std::labs(n) + 1;
}

ModuleVector act_virasoro(long n, const ModuleVector& v, const ModuleHandle& m, long extra_width) {
  const Signature& sig = m.signature();
  const long width = virasoro_window(n, v, m) + extra_width;
  ModuleVector result;
  if (sig.kind() == AlgebraKind::Heisenberg) {
    // L(n) = 1/2 sum_i sum_m :h_i(-m) h_i(m+n):
    const Scalar half(Rational(1, 2));
    for (int i = 0; i < sig.species_count(); ++i)
      for (long k = -width; k <= width; ++k) {
        Mode left{i, -k};
        Mode right{i, k + n};
        if (sig.is_annihilation(left) && sig.is_creation(right)) std::swap(left, right);
        const ModuleVector inner = act_mode(right, v, m);
        if (inner.is_zero()) continue;
        result += act_mode(left, inner, m) * half;
      }
    return result;
  }
  // Weyl: L(n) = sum_r (2r - n + 1)/2 :a(r) a*(n-r):, a(r) to the right for r >= 0.
  for (long r = -width; r <= width; ++r) {
    const long num = 2 * r - n + 1;
    if (num == 0) continue;
    Mode left{0, r};
    Mode right{1, n - r};
    if (sig.is_annihilation(left)) std::swap(left, right);
    const ModuleVector inner = act_mode(right, v, m);
    if (inner.is_zero()) continue;
    result += act_mode(left, inner, m) * Scalar(Rational(num, 2));
  }
  return result;
}

WhittakerFunction whittaker_type(const ModuleHandle& m) {
  if (!m.is_twisted()) return m.base_whittaker();
  const Signature& sig = m.signature();
  const auto& lambda = m.base_whittaker();
  const auto& g = *m.twist();
  std::map<Mode, Scalar> values;
  const long r = lambda.support_bound();
  for (int s = 0; s < sig.species_count(); ++s)
    for (long n = 0; n <= r; ++n) {
      const Mode x{s, n};
      if (!sig.is_annihilation(x)) continue;
      Scalar total;
      for (const auto& [y, c] : g.image(x, m.twist_power())) total += c * lambda.value(y);
      if (!total.is_zero()) values.emplace(x, total);
    }
  return WhittakerFunction(sig, std::move(values), lambda.level());
}

int generalized_eigen_degree(Mode x, const ModuleVector& v, const ModuleHandle& m) {
  const Signature& sig = m.signature();
  if (!sig.is_annihilation(x))
    throw std::invalid_argument("generalized_eigen_degree: " + sig.format(x) + " is not in n");
  if (v.is_zero()) throw std::invalid_argument("generalized_eigen_degree: zero vector");
  const Scalar lx = whittaker_type(m).value(x);
  const auto bound = static_cast<int>(v.max_length()) + 1;
  ModuleVector cur = v;
  for (int k = 1; k <= bound; ++k) {
    cur = act_mode(x, cur, m) - cur * lx;
    if (cur.is_zero()) return k;
  }
  throw std::logic_error("generalized_eigen_degree: exceeded the length bound");
}

std::vector<Monomial> filtration_basis(const Signature& sig, HalfInteger max_degree) {
  std::vector<Monomial> out;
  if (max_degree.twice < 0) return out;
  std::vector<Mode> creation;
  const long max_index = max_degree.twice / 2 + 1;
  for (int s = 0; s < sig.species_count(); ++s)
    for (long n = 0; n <= max_index; ++n) {
      const Mode x{s, -n};
      if (sig.is_creation(x) && sig.degree_twice(x) <= max_degree.twice) creation.push_back(x);
    }
  std::sort(creation.begin(), creation.end());
  Monomial current;
  std::function<void(std::size_t, long)> grow = [&](std::size_t from, long budget) {
    out.push_back(current);
    for (std::size_t i = from; i < creation.size(); ++i) {
      const long d = sig.degree_twice(creation[i]);
      if (d > budget) continue;
      current.modes.push_back(creation[i]);
      grow(i, budget - d);
      current.modes.pop_back();
    }
  };
  grow(0, max_degree.twice);
  std::sort(out.begin(), out.end(),
            [&sig](const Monomial& a, const Monomial& b) { return filtration_less(a, b, sig); });
  return out;
}

ConformalData conformal_data(const Signature& sig) {
  if (sig.kind() == AlgebraKind::Heisenberg)
    return {sig.central_charge(), "L(n) = 1/2 sum_i sum_m :h_i(-m) h_i(m+n):"};
  return {sig.central_charge(), "omega = 1/2 (a(-1) a*(-1) - a(-2) a*(0)) 1"};
}

ModuleVector random_combination(std::span<const Monomial> basis, std::mt19937_64& rng,
                                std::size_t max_terms) {
  if (basis.empty() || max_terms == 0) return {};
  const std::size_t terms = 1 + static_cast<std::size_t>(rng() % max_terms);
  ModuleVector v;
  std::set<std::size_t> used;
  for (std::size_t t = 0; t < terms; ++t) {
    const std::size_t idx = static_cast<std::size_t>(rng() % basis.size());
    const long coeff = 1 + static_cast<long>(rng() % 5);
    if (!used.insert(idx).second) continue;
    v.add_term(basis[idx], Scalar(coeff));
  }
  return v;
}

} // namespace wcert
