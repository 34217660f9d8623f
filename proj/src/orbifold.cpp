#include "wcert/orbifold.hpp"
#include "wcert/span.hpp"

#include <algorithm>
#include <sstream>

namespace wcert {

CyclicAction::CyclicAction(std::shared_ptr<const Automorphism> g) : g_(std::move(g)) {
  if (!g_) throw std::invalid_argument("CyclicAction needs an automorphism");
  p_ = static_cast<long>(g_->order());
  zeta_ = Scalar::zeta(g_->order(), 1);
  // exact multiplicative order p
  Scalar acc(1);
  for (long k = 1; k <= p_; ++k) {
    acc *= zeta_;
    if (acc.is_one() != (k == p_))
      throw std::logic_error("zeta does not have multiplicative order " + std::to_string(p_));
  }
  const auto& top = g_->matrix_power(p_);
  for (std::size_t s = 0; s < top.size(); ++s)
    for (std::size_t t = 0; t < top.size(); ++t)
      if (!(top[s][t] == Scalar(s == t ? 1 : 0)))
        throw std::invalid_argument("g^p is not the identity");
}

long CyclicAction::reduce(long k) const { return ((k % p_) + p_) % p_; }

Scalar CyclicAction::zeta_power(long k) const { return zeta_.pow(reduce(k)); }

std::vector<ModuleHandle> twisted_family(const ModuleHandle& base, const CyclicAction& act) {
  std::vector<ModuleHandle> out;
  out.reserve(static_cast<std::size_t>(act.p()));
  for (long r = 0; r < act.p(); ++r) out.push_back(base.twisted_by(act.pointer(), r));
  return out;
}

bool DirectSumVector::is_zero() const {
  for (const auto& c : components)
    if (!c.is_zero()) return false;
  return true;
}

DirectSumVector delta_embed(const ModuleVector& w, long i, const CyclicAction& act) {
  DirectSumVector v;
  for (long k = 0; k < act.p(); ++k) v.components.push_back(w * act.zeta_power(i * k));
  return v;
}

DirectSumVector act_on_sum(const OperatorExpr& e, const DirectSumVector& v,
                           const std::vector<ModuleHandle>& family) {
  if (family.size() != v.components.size())
    throw std::invalid_argument("direct sum has " + std::to_string(v.components.size()) +
                                " components but the family has " +
                                std::to_string(family.size()));
  DirectSumVector out;
  out.components.reserve(family.size());
  for (std::size_t r = 0; r < family.size(); ++r)
    out.components.push_back(act_expr(e, v.components[r], family[r]));
  return out;
}

std::optional<ModuleVector> delta_component(const DirectSumVector& v, long k,
                                            const CyclicAction& act) {
  if (static_cast<long>(v.components.size()) != act.p()) return std::nullopt;
  const ModuleVector& u = v.components.front();
  for (long r = 1; r < act.p(); ++r)
    if (!(v.components[static_cast<std::size_t>(r)] == u * act.zeta_power(k * r)))
      return std::nullopt;
  return u;
}

OperatorExpr random_charged_operator(const CyclicAction& act, long j, const SampleBounds& bounds,
                                     std::mt19937_64& rng) {
  const Signature& sig = act.g().signature();
  const auto species = static_cast<std::uint64_t>(sig.species_count());
  const auto width = static_cast<std::uint64_t>(2 * bounds.index_bound + 1);
  const std::size_t max_len = std::max<std::size_t>(1, bounds.max_word_length);
  for (int attempt = 0; attempt < 200; ++attempt) {
    Word w;
    const std::size_t len = 1 + static_cast<std::size_t>(rng() % max_len);
    for (std::size_t k = 0; k < len; ++k) {
      const int s = static_cast<int>(rng() % species);
      const long n = static_cast<long>(rng() % width) - bounds.index_bound;
      w.modes.push_back(Mode{s, n});
    }
    OperatorExpr e = average_projector(act.g(), j, OperatorExpr::word(std::move(w)));
    if (!e.is_zero()) return e;
  }
  return {};
}

DeltaLemmaReport verify_delta_lemma(const ModuleHandle& base, const CyclicAction& act, long i,
                                    long j, std::size_t samples, const SampleBounds& bounds,
                                    std::mt19937_64& rng) {
  DeltaLemmaReport report;
  report.p = act.p();
  report.i = act.reduce(i);
  report.j = act.reduce(j);
  const auto family = twisted_family(base, act);
  const auto basis = filtration_basis(base, bounds.vector_degree);
  const Signature& sig = base.signature();
  for (std::size_t s = 0; s < samples; ++s) {
    const OperatorExpr e = random_charged_operator(act, j, bounds, rng);
    ModuleVector w = random_combination(basis, rng, bounds.vector_terms);
    if (w.is_zero()) w = ModuleVector::cyclic();
    ++report.samples;
    if (e.is_zero()) {
      report.failures.push_back("no nonzero V^" + std::to_string(report.j) + " operator drawn");
      continue;
    }
    const DirectSumVector image = act_on_sum(e, delta_embed(w, i, act), family);
    if (!image.is_zero()) ++report.nonzero_images;
    if (!delta_component(image, i + j, act)) {
      std::ostringstream msg;
      msg << "sample " << s << ": (" << format_expr(e, sig, act.g().order()) << ") . Delta("
          << format_vector(w, sig, act.g().order()) << ") not in Delta^(" << act.p() << ","
          << act.reduce(i + j) << ")";
      report.failures.push_back(msg.str());
    }
  }
  return report;
}

namespace {

OperatorExpr monomial_word(const Monomial& u) { return OperatorExpr::word(Word{u.modes, 0}); }

void require_fixed_type(const ModuleHandle& m, const CyclicAction& act) {
  if (m.is_twisted()) throw std::invalid_argument("charge decomposition needs an untwisted module");
  if (!(whittaker_type(m.twisted_by(act.pointer(), 1)) == m.base_whittaker()))
    throw std::invalid_argument("Whittaker type is not g-stable; W o g is not isomorphic to W");
}

} // namespace

ModuleVector phi(const ModuleVector& v, const ModuleHandle& m, const CyclicAction& act,
                 long power) {
  ModuleVector out;
  const ModuleVector w = ModuleVector::cyclic();
  const auto diag = act.g().diagonal_exponents();
  for (const auto& [u, c] : v.terms()) {
    if (diag) {
      const auto charge = word_charge(Word{u.modes, 0}, act.g());
      out.add_term(u, c * act.zeta_power(*charge * power));
      continue;
    }
    out += act_expr(apply_automorphism(act.g(), power, monomial_word(u)), w, m) * c;
  }
  return out;
}

ChargeDecomposition charge_decompose(const ModuleHandle& m, const CyclicAction& act,
                                     HalfInteger max_degree) {
  require_fixed_type(m, act);
  ChargeDecomposition d;
  d.p = act.p();
  d.max_degree = max_degree;
  d.diagonal = act.g().diagonal_exponents().has_value();
  d.window = filtration_basis(m, max_degree);
  d.components.resize(static_cast<std::size_t>(d.p));
  for (long j = 0; j < d.p; ++j) d.components[static_cast<std::size_t>(j)].charge = j;

  const ModuleVector w = ModuleVector::cyclic();
  std::vector<SpanBasis> spans(static_cast<std::size_t>(d.p));
  for (const auto& u : d.window) {
    if (d.diagonal) {
      const long c = *word_charge(Word{u.modes, 0}, act.g());
      auto& comp = d.components[static_cast<std::size_t>(c)];
      comp.monomials.push_back(u);
      comp.vectors.push_back(ModuleVector::monomial(u));
      continue;
    }
    for (long j = 0; j < d.p; ++j) {
      ModuleVector image = act_expr(average_projector(act.g(), j, monomial_word(u)), w, m);
      if (image.is_zero()) continue;
      if (spans[static_cast<std::size_t>(j)].insert(to_sparse(image)))
        d.components[static_cast<std::size_t>(j)].vectors.push_back(std::move(image));
    }
  }

  bool ok = true;
  for (const auto& u : d.window) {
    const ModuleVector v = ModuleVector::monomial(u);
    if (!(phi(v, m, act, d.p) == v)) ok = false;
  }
  for (const auto& comp : d.components)
    for (const auto& v : comp.vectors)
      if (!(phi(v, m, act) == v * act.zeta_power(comp.charge))) ok = false;
  d.phi_checked = ok;
  return d;
}

CompatibilityReport charge_compatibility(const ModuleHandle& m, const CyclicAction& act,
                                         const ChargeDecomposition& decomposition,
                                         long operator_charge, long vector_charge,
                                         std::size_t samples, const SampleBounds& bounds,
                                         std::mt19937_64& rng) {
  require_fixed_type(m, act);
  CompatibilityReport report;
  report.operator_charge = act.reduce(operator_charge);
  report.vector_charge = act.reduce(vector_charge);
  const auto& comp = decomposition.components.at(static_cast<std::size_t>(report.vector_charge));
  const long target = act.reduce(operator_charge + vector_charge);
  const Scalar eigen = act.zeta_power(target);
  const Signature& sig = m.signature();
  const auto order = act.g().order();
  if (comp.vectors.empty()) {
    report.failures.push_back("charge component " + std::to_string(report.vector_charge) +
                              " is empty in the window");
    return report;
  }
  for (std::size_t s = 0; s < samples; ++s) {
    const OperatorExpr x = random_charged_operator(act, operator_charge, bounds, rng);
    ModuleVector v;
    const std::size_t terms = 1 + static_cast<std::size_t>(rng() % bounds.vector_terms);
    for (std::size_t t = 0; t < terms; ++t) {
      const auto& pick = comp.vectors[static_cast<std::size_t>(rng() % comp.vectors.size())];
      v += pick * Scalar(1 + static_cast<long>(rng() % 5));
    }
    ++report.samples;
    if (x.is_zero() || v.is_zero()) {
      report.failures.push_back("sample " + std::to_string(s) + ": degenerate draw");
      continue;
    }
    const ModuleVector y = act_expr(x, v, m);
    if (!y.is_zero()) ++report.nonzero_images;
    bool ok = phi(y, m, act) == y * eigen;
    if (ok && decomposition.diagonal)
      for (const auto& [u, c] : y.terms())
        if (*word_charge(Word{u.modes, 0}, act.g()) != target) ok = false;
    if (!ok)
      report.failures.push_back("sample " + std::to_string(s) + ": (" +
                                format_expr(x, sig, order) + ") . (" +
                                format_vector(v, sig, order) + ") leaves charge " +
                                std::to_string(target));
  }
  return report;
}

} // namespace wcert
