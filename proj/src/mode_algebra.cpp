#include "wcert/mode_algebra.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace wcert {

// ---------------------------------------------------------------------------
// Signature

Signature::Signature(AlgebraKind kind, int rank, std::vector<std::string> names)
    : kind_(kind), rank_(rank), names_(std::move(names)) {
  check_quasi_commutative();
}

Signature Signature::heisenberg(int rank) {
  if (rank < 1) throw std::invalid_argument("heisenberg: rank must be >= 1");
  std::vector<std::string> names;
  for (int i = 1; i <= rank; ++i) names.push_back("h" + std::to_string(i));
  return Signature(AlgebraKind::Heisenberg, rank, std::move(names));
}

Signature Signature::weyl() { return Signature(AlgebraKind::Weyl, 1, {"a", "a*"}); }

std::string Signature::name() const {
  if (kind_ == AlgebraKind::Weyl) return "weyl";
  return "heisenberg(" + std::to_string(rank_) + ")";
}

const std::string& Signature::species_name(int id) const {
  if (id < 0 || id >= species_count()) throw std::out_of_range("unknown species id");
  return names_[static_cast<std::size_t>(id)];
}

std::optional<int> Signature::species_id(std::string_view name) const {
  for (int i = 0; i < species_count(); ++i) {
    if (names_[static_cast<std::size_t>(i)] == name) return i;
  }
  if (kind_ == AlgebraKind::Heisenberg && rank_ == 1 && name == "h") return 0;
  return std::nullopt;
}

void Signature::check_species(Mode x) const {
  if (x.species < 0 || x.species >= species_count())
    throw std::out_of_range("mode species " + std::to_string(x.species) + " not in " + name());
}

long Signature::commutator_value(Mode x, Mode y) const {
  check_species(x);
  check_species(y);
  if (x.index + y.index != 0) return 0;
  if (kind_ == AlgebraKind::Heisenberg) return x.species == y.species ? x.index : 0;
  // Weyl: [a(n), a*(m)] = delta_{n+m,0}.
  if (x.species == 0 && y.species == 1) return 1;
  if (x.species == 1 && y.species == 0) return -1;
  return 0;
}

long Signature::degree_twice(Mode x) const {
  check_species(x);
  if (kind_ == AlgebraKind::Heisenberg) return -2 * x.index;
  return x.species == 0 ? -2 * x.index - 1 : -2 * x.index + 1;
}

bool Signature::is_annihilation(Mode x) const {
  check_species(x);
  if (kind_ == AlgebraKind::Heisenberg) return x.index >= 0;
  return x.species == 0 ? x.index >= 0 : x.index >= 1;
}

Scalar Signature::central_charge() const {
  return kind_ == AlgebraKind::Heisenberg ? Scalar(static_cast<long>(rank_)) : Scalar(-1);
}

void Signature::check_quasi_commutative() const {
  constexpr long window = 4;
  for (int s = 0; s < species_count(); ++s)
    for (int t = 0; t < species_count(); ++t)
      for (long m = -window; m <= window; ++m)
        for (long n = -window; n <= window; ++n) {
          const Mode x{s, m};
          const Mode y{t, n};
          const long c = commutator_value(x, y);
          if (c != -commutator_value(y, x))
            throw std::logic_error(name() + ": commutator rule is not antisymmetric");
          if (c != 0 && m + n != 0)
            throw std::logic_error(name() + ": bracket outside index sum zero");
          if (c != 0 && is_annihilation(x) && is_annihilation(y))
            throw std::logic_error(name() + ": annihilation subalgebra is not abelian");
        }
}

std::string Signature::format(Mode x) const {
  return species_name(x.species) + "(" + std::to_string(x.index) + ")";
}

Mode Signature::parse_mode(std::string_view text) const {
  auto open = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    throw ParseError("mode '" + std::string(text) + "': expected name(index)");
  std::string name(text.substr(0, open));
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();
  auto id = species_id(name);
  if (!id) throw ParseError("unknown species '" + name + "' for " + this->name());
  std::string idx(text.substr(open + 1, close - open - 1));
  try {
    std::size_t used = 0;
    long n = std::stol(idx, &used);
    if (idx.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    return Mode{*id, n};
  } catch (const std::logic_error&) {
    throw ParseError("mode '" + std::string(text) + "': bad index");
  }
}

// ---------------------------------------------------------------------------
// Word / OperatorExpr

bool Word::is_sorted() const { return std::is_sorted(modes.begin(), modes.end()); }

OperatorExpr OperatorExpr::constant(const Scalar& c) {
  OperatorExpr e;
  e.add_term(Word{}, c);
  return e;
}

OperatorExpr OperatorExpr::mode(Mode x, const Scalar& c) {
  OperatorExpr e;
  e.add_term(Word{{x}, 0}, c);
  return e;
}

OperatorExpr OperatorExpr::word(Word w, const Scalar& c) {
  OperatorExpr e;
  e.add_term(w, c);
  return e;
}

void OperatorExpr::add_term(const Word& w, const Scalar& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(w, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

OperatorExpr& OperatorExpr::operator+=(const OperatorExpr& o) {
  for (const auto& [w, c] : o.terms_) add_term(w, c);
  return *this;
}

OperatorExpr& OperatorExpr::operator-=(const OperatorExpr& o) {
  for (const auto& [w, c] : o.terms_) add_term(w, -c);
  return *this;
}

OperatorExpr& OperatorExpr::operator*=(const Scalar& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& [w, v] : terms_) v *= c;
  return *this;
}

OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b) {
  OperatorExpr r;
  for (const auto& [wa, ca] : a.terms_) {
    for (const auto& [wb, cb] : b.terms_) {
      Word w;
      w.modes.reserve(wa.modes.size() + wb.modes.size());
      w.modes.insert(w.modes.end(), wa.modes.begin(), wa.modes.end());
      w.modes.insert(w.modes.end(), wb.modes.begin(), wb.modes.end());
      w.k_power = wa.k_power + wb.k_power;
      r.add_term(w, ca * cb);
    }
  }
  return r;
}

bool operator==(const OperatorExpr& a, const OperatorExpr& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  auto ib = b.terms_.begin();
  for (const auto& [w, c] : a.terms_) {
    if (!(w == ib->first) || !(c == ib->second)) return false;
    ++ib;
  }
  return true;
}

OperatorExpr normal_form(const OperatorExpr& e, const Signature& sig) {
  OperatorExpr result;
  // Pending words; each pass resolves the first descent of one word.
  std::map<Word, Scalar> pending(e.terms().begin(), e.terms().end());
  while (!pending.empty()) {
    auto node = pending.extract(pending.begin());
    Word& w = node.key();
    const Scalar& c = node.mapped();
    std::size_t i = 0;
    while (i + 1 < w.modes.size() && !(w.modes[i + 1] < w.modes[i])) ++i;
    if (i + 1 >= w.modes.size()) {
      result.add_term(w, c);
      continue;
    }
    const long bracket = sig.commutator_value(w.modes[i], w.modes[i + 1]);
    auto push = [&pending](const Word& word, const Scalar& coeff) {
      auto [it, inserted] = pending.try_emplace(word, coeff);
      if (!inserted) {
        it->second += coeff;
        if (it->second.is_zero()) pending.erase(it);
      }
    };
    if (bracket != 0) {
      Word contracted;
      contracted.modes.reserve(w.modes.size() - 2);
      for (std::size_t k = 0; k < w.modes.size(); ++k)
        if (k != i && k != i + 1) contracted.modes.push_back(w.modes[k]);
      contracted.k_power = w.k_power + 1;
      push(contracted, c * Scalar(bracket));
    }
    std::swap(w.modes[i], w.modes[i + 1]);
    push(w, c);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

class ExprParser {
public:
  ExprParser(std::string_view text, const Signature& sig, std::uint64_t order)
      : s_(text), sig_(sig), order_(order) {
    for (int i = 0; i < sig.species_count(); ++i) names_.push_back(sig.species_name(i));
    if (sig.kind() == AlgebraKind::Heisenberg && sig.rank() == 1) names_.push_back("h");
    std::sort(names_.begin(), names_.end(),
              [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  }

  OperatorExpr parse_expr() {
    OperatorExpr result;
    skip_ws();
    if (at_end()) fail("empty expression");
    bool first = true;
    while (true) {
      skip_ws();
      if (at_end()) break;
      Scalar sign(1);
      if (peek() == '+' || peek() == '-') {
        if (peek() == '-') sign = Scalar(-1);
        ++pos_;
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      auto [w, c] = parse_term();
      result.add_term(w, c * sign);
      first = false;
    }
    return result;
  }

  Word parse_word_only() {
    auto [w, c] = parse_term();
    skip_ws();
    if (!at_end()) fail("trailing input");
    if (!c.is_one()) fail("a word may not carry a coefficient");
    return w;
  }

private:
  std::pair<Word, Scalar> parse_term() {
    Word w;
    Scalar coeff(1);
    bool any = false;
    while (true) {
      skip_ws();
      if (at_end()) break;
      const char c = peek();
      if (c == '+' || c == '-') break;
      if (c == '*') {
        if (!any) fail("unexpected '*'");
        ++pos_;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        coeff *= Scalar(parse_rational());
      } else if (c == '(') {
        coeff *= Scalar::parse(take_parenthesized(), order_);
      } else if (c == 'z' && !starts_species()) {
        ++pos_;
        long e = 1;
        skip_ws();
        if (!at_end() && peek() == '^') {
          ++pos_;
          e = parse_signed_int();
        }
        coeff *= Scalar::zeta(order_, e);
      } else if (c == 'K' && !starts_species()) {
        ++pos_;
        long e = 1;
        skip_ws();
        if (!at_end() && peek() == '^') {
          ++pos_;
          e = parse_signed_int();
          if (e < 0) fail("negative power of K");
        }
        w.k_power += static_cast<unsigned>(e);
      } else {
        w.modes.push_back(parse_mode_token());
      }
      any = true;
    }
    if (!any) fail("expected a term");
    return {w, coeff};
  }

  bool starts_species() const {
    for (const auto& n : names_) {
      if (s_.substr(pos_, n.size()) == n) {
        std::size_t k = pos_ + n.size();
        while (k < s_.size() && std::isspace(static_cast<unsigned char>(s_[k]))) ++k;
        if (k < s_.size() && s_[k] == '(') return true;
      }
    }
    return false;
  }

  Mode parse_mode_token() {
    for (const auto& n : names_) {
      if (s_.substr(pos_, n.size()) != n) continue;
      std::size_t k = pos_ + n.size();
      while (k < s_.size() && std::isspace(static_cast<unsigned char>(s_[k]))) ++k;
      if (k >= s_.size() || s_[k] != '(') continue;
      pos_ = k;
      const std::string inner = take_parenthesized();
      return sig_.parse_mode(n + "(" + inner + ")");
    }
    fail("unknown token");
  }

  std::string take_parenthesized() {
    if (peek() != '(') fail("expected '('");
    const std::size_t start = ++pos_;
    int depth = 1;
    while (!at_end() && depth > 0) {
      if (peek() == '(') ++depth;
      if (peek() == ')') --depth;
      ++pos_;
    }
    if (depth != 0) fail("unbalanced parenthesis");
    return std::string(s_.substr(start, pos_ - start - 1));
  }

  Rational parse_rational() {
    Integer num(parse_digits());
    skip_ws();
    if (!at_end() && peek() == '/') {
      ++pos_;
      skip_ws();
      Integer den(parse_digits());
      if (den == 0) throw DivisionByZero("zero denominator");
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
    throw ParseError("expression '" + std::string(s_) + "': " + why + " at offset " +
                     std::to_string(pos_));
  }

  std::string_view s_;
  const Signature& sig_;
  std::uint64_t order_;
  std::vector<std::string> names_;
  std::size_t pos_ = 0;
};


} // namespace

Word parse_word(std::string_view text, const Signature& sig) {
  return ExprParser(text, sig, 1).parse_word_only();
}

OperatorExpr parse_expr(std::string_view text, const Signature& sig, std::uint64_t order) {
  return ExprParser(text, sig, order).parse_expr();
}

std::string format_word(const Word& w, const Signature& sig) {
  if (w.is_identity()) return "1";
  std::string out;
  for (const auto& m : w.modes) {
    if (!out.empty()) out += ' ';
    out += sig.format(m);
  }
  if (w.k_power > 0) {
    if (!out.empty()) out += ' ';
    out += "K";
    if (w.k_power > 1) out += "^" + std::to_string(w.k_power);
  }
  return out;
}

std::string format_expr(const OperatorExpr& e, const Signature& sig, std::uint64_t order) {
  if (e.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [w, c] : e.terms()) {
    bool negative = false;
    std::string coeff;
    if (c.is_rational()) {
      Rational q = c.rational_value();
      negative = q < 0;
      if (negative) q = -q;
      coeff = rational_to_string(q);
    } else {
      coeff = "(" + c.to_string(order) + ")";
    }
    std::string term;
    if (w.is_identity()) {
      term = coeff;
    } else if (coeff == "1") {
      term = format_word(w, sig);
    } else {
      term = coeff + " * " + format_word(w, sig);
    }
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
// Automorphisms

namespace {

SpeciesMatrix identity_matrix(std::size_t s) {
  SpeciesMatrix m(s, std::vector<Scalar>(s, Scalar(0)));
  for (std::size_t i = 0; i < s; ++i) m[i][i] = Scalar(1);
  return m;
}

SpeciesMatrix matmul(const SpeciesMatrix& a, const SpeciesMatrix& b) {
  const std::size_t s = a.size();
  SpeciesMatrix r(s, std::vector<Scalar>(s, Scalar(0)));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t k = 0; k < s; ++k) {
      if (a[i][k].is_zero()) continue;
      for (std::size_t j = 0; j < s; ++j)
        if (!b[k][j].is_zero()) r[i][j] += a[i][k] * b[k][j];
    }
  return r;
}

bool matrices_equal(const SpeciesMatrix& a, const SpeciesMatrix& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (!(a[i][j] == b[i][j])) return false;
  return true;
}

} // namespace

Automorphism::Automorphism(Signature sig, std::uint64_t order, SpeciesMatrix matrix,
                           std::string name)
    : sig_(std::move(sig)), order_(order), name_(std::move(name)) {
  if (order_ == 0) throw std::invalid_argument("automorphism order must be >= 1");
  const auto s = static_cast<std::size_t>(sig_.species_count());
  if (matrix.size() != s)
    throw std::invalid_argument("automorphism matrix must be " + std::to_string(s) + "x" +
                                std::to_string(s));
  for (const auto& row : matrix)
    if (row.size() != s) throw std::invalid_argument("automorphism matrix is not square");

  powers_.reserve(order_);
  powers_.push_back(identity_matrix(s));
  for (std::uint64_t k = 1; k < order_; ++k) powers_.push_back(matmul(powers_.back(), matrix));
  if (!matrices_equal(matmul(powers_.back(), matrix), powers_.front()))
    throw std::invalid_argument(name_ + ": matrix power " + std::to_string(order_) +
                                " is not the identity");

  // Bilinear form check on paired indices; brackets vanish off m + n = 0.
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = 0; b < s; ++b)
      for (long m = -2; m <= 2; ++m) {
        Scalar lhs;
        for (std::size_t t = 0; t < s; ++t)
          for (std::size_t u = 0; u < s; ++u) {
            if (matrix[t][a].is_zero() || matrix[u][b].is_zero()) continue;
            const long br = sig_.commutator_value(Mode{static_cast<int>(t), m},
                                                  Mode{static_cast<int>(u), -m});
            if (br != 0) lhs += matrix[t][a] * matrix[u][b] * Scalar(br);
          }
        const Scalar rhs = sig_.commutator(Mode{static_cast<int>(a), m},
                                           Mode{static_cast<int>(b), -m});
        if (!(lhs == rhs))
          throw std::invalid_argument(name_ + ": does not preserve the commutator rule");
      }

  for (std::size_t a = 0; a < s; ++a)
    for (long n = -2; n <= 3; ++n)
      for (std::size_t t = 0; t < s; ++t) {
        if (matrix[t][a].is_zero()) continue;
        if (sig_.is_annihilation(Mode{static_cast<int>(a), n}) !=
            sig_.is_annihilation(Mode{static_cast<int>(t), n}))
          throw std::invalid_argument(name_ + ": does not preserve the annihilation subalgebra");
      }

  std::vector<long> exps(s, 0);
  bool diagonal = true;
  for (std::size_t i = 0; i < s && diagonal; ++i) {
    for (std::size_t j = 0; j < s; ++j)
      if (i != j && !matrix[i][j].is_zero()) diagonal = false;
    if (!diagonal) break;
    bool found = false;
    for (std::uint64_t e = 0; e < order_; ++e) {
      if (matrix[i][i] == Scalar::zeta(order_, static_cast<long>(e))) {
        exps[i] = static_cast<long>(e);
        found = true;
        break;
      }
    }
    if (!found) diagonal = false;
  }
  if (diagonal) diag_ = std::move(exps);
}

std::size_t Automorphism::reduce_power(long k) const {
  const long p = static_cast<long>(order_);
  return static_cast<std::size_t>(((k % p) + p) % p);
}

Automorphism Automorphism::identity(const Signature& sig) {
  return Automorphism(sig, 1, identity_matrix(static_cast<std::size_t>(sig.species_count())),
                      "identity");
}

Automorphism Automorphism::theta(const Signature& sig) {
  auto m = identity_matrix(static_cast<std::size_t>(sig.species_count()));
  for (std::size_t i = 0; i < m.size(); ++i) m[i][i] = Scalar(-1);
  return Automorphism(sig, 2, std::move(m), "theta");
}

Automorphism Automorphism::weyl_gp(const Signature& sig, std::uint64_t p) {
  if (sig.kind() != AlgebraKind::Weyl)
    throw std::invalid_argument("gp automorphism is defined for the Weyl algebra only");
  if (p == 0) throw std::invalid_argument("gp: p must be >= 1");
  SpeciesMatrix m{{Scalar::zeta(p, 1), Scalar(0)}, {Scalar(0), Scalar::zeta(p, -1)}};
  return Automorphism(sig, p, std::move(m), "g" + std::to_string(p));
}

Automorphism Automorphism::permutation(const Signature& sig, const std::vector<int>& images) {
  if (sig.kind() != AlgebraKind::Heisenberg)
    throw std::invalid_argument("permutation automorphisms act on Heisenberg species only");
  const auto s = static_cast<std::size_t>(sig.species_count());
  if (images.size() != s) throw std::invalid_argument("permutation length must equal the rank");
  std::vector<bool> seen(s, false);
  for (int v : images) {
    if (v < 1 || static_cast<std::size_t>(v) > s || seen[static_cast<std::size_t>(v - 1)])
      throw std::invalid_argument("permutation must be a bijection of 1..rank");
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
  std::uint64_t order = 1;
  std::vector<bool> visited(s, false);
  for (std::size_t i = 0; i < s; ++i) {
    if (visited[i]) continue;
    std::uint64_t len = 0;
    for (std::size_t j = i; !visited[j]; j = static_cast<std::size_t>(images[j] - 1)) {
      visited[j] = true;
      ++len;
    }
    order = std::lcm(order, len);
  }
  SpeciesMatrix m(s, std::vector<Scalar>(s, Scalar(0)));
  std::string name = "permutation(";
  for (std::size_t i = 0; i < s; ++i) {
    m[static_cast<std::size_t>(images[i] - 1)][i] = Scalar(1);
    name += (i ? "," : "") + std::to_string(images[i]);
  }
  return Automorphism(sig, order, std::move(m), name + ")");
}

std::vector<std::pair<Mode, Scalar>> Automorphism::image(Mode x, long k) const {
  const auto& m = matrix_power(k);
  std::vector<std::pair<Mode, Scalar>> out;
  for (std::size_t t = 0; t < m.size(); ++t) {
    const Scalar& c = m[t][static_cast<std::size_t>(x.species)];
    if (!c.is_zero()) out.emplace_back(Mode{static_cast<int>(t), x.index}, c);
  }
  return out;
}

OperatorExpr apply_automorphism(const Automorphism& g, long k, const OperatorExpr& e) {
  OperatorExpr result;
  for (const auto& [w, c] : e.terms()) {
    std::vector<std::pair<Word, Scalar>> partial{{Word{{}, w.k_power}, c}};
    for (const auto& x : w.modes) {
      if (x.species < 0 || x.species >= g.signature().species_count())
        throw std::out_of_range(g.name() + ": mode species outside the automorphism's algebra");
      const auto img = g.image(x, k);
      std::vector<std::pair<Word, Scalar>> next;
      next.reserve(partial.size() * img.size());
      for (const auto& [pw, pc] : partial)
        for (const auto& [y, yc] : img) {
          Word nw = pw;
          nw.modes.push_back(y);
          next.emplace_back(std::move(nw), pc * yc);
        }
      partial = std::move(next);
    }
    for (const auto& [pw, pc] : partial) result.add_term(pw, pc);
  }
  return normal_form(result, g.signature());
}

OperatorExpr average_projector(const Automorphism& g, long j, const OperatorExpr& e) {
  const long p = static_cast<long>(g.order());
  OperatorExpr sum;
  for (long k = 0; k < p; ++k) {
    sum += apply_automorphism(g, k, e) * Scalar::zeta(g.order(), -j * k);
  }
  sum *= Scalar(Rational(1, p));
  return sum;
}

std::optional<long> word_charge(const Word& w, const Automorphism& g) {
  const auto& d = g.diagonal_exponents();
  if (!d) return std::nullopt;
  long total = 0;
  for (const auto& x : w.modes) total += (*d)[static_cast<std::size_t>(x.species)];
  const long p = static_cast<long>(g.order());
  return ((total % p) + p) % p;
}

} // namespace wcert
