#pragma once

#include "wcert/module.hpp"

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace wcert {

/// The cyclic group <g> with the eigenvalue root zeta = zeta_p.
class CyclicAction {
public:
  explicit CyclicAction(std::shared_ptr<const Automorphism> g);

  const Automorphism& g() const { return *g_; }
  const std::shared_ptr<const Automorphism>& pointer() const { return g_; }
  long p() const { return p_; }
  const Scalar& zeta() const { return zeta_; }
  /// zeta^k with k reduced mod p.
  Scalar zeta_power(long k) const;
  long reduce(long k) const;

private:
  std::shared_ptr<const Automorphism> g_;
  long p_;
  Scalar zeta_;
};

/// W o g^r for r = 0..p-1 over one base module.
std::vector<ModuleHandle> twisted_family(const ModuleHandle& base, const CyclicAction& act);

/// Component r lives in W o g^r.
struct DirectSumVector {
  std::vector<ModuleVector> components;

  bool is_zero() const;
  friend bool operator==(const DirectSumVector&, const DirectSumVector&) = default;
};

DirectSumVector delta_embed(const ModuleVector& w, long i, const CyclicAction& act);
/// Acts on slot r through family[r].
DirectSumVector act_on_sum(const OperatorExpr& e, const DirectSumVector& v,
                           const std::vector<ModuleHandle>& family);
/// u with v = delta_embed(u, k), if v lies in that image.
std::optional<ModuleVector> delta_component(const DirectSumVector& v, long k,
                                            const CyclicAction& act);

struct SampleBounds {
  long index_bound = 3;
  std::size_t max_word_length = 2;
  HalfInteger vector_degree = HalfInteger::from_int(2);
  std::size_t vector_terms = 3;
};

/// A random word with modes in [-N, N], projected to V^j. Retries until the
/// projection is nonzero; returns zero after 200 failed draws.
OperatorExpr random_charged_operator(const CyclicAction& act, long j, const SampleBounds& bounds,
                                     std::mt19937_64& rng);

struct DeltaLemmaReport {
  long p = 0, i = 0, j = 0;
  std::size_t samples = 0;
  std::size_t nonzero_images = 0;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty() && samples > 0; }
};

DeltaLemmaReport verify_delta_lemma(const ModuleHandle& base, const CyclicAction& act, long i,
                                    long j, std::size_t samples, const SampleBounds& bounds,
                                    std::mt19937_64& rng);

struct ChargeComponent {
  long charge = 0;
  /// Diagonal g: the monomials themselves. Otherwise projector images.
  std::vector<ModuleVector> vectors;
  std::vector<Monomial> monomials;
};

struct ChargeDecomposition {
  long p = 0;
  bool diagonal = false;
  HalfInteger max_degree;
  std::vector<Monomial> window;
  std::vector<ChargeComponent> components;
  /// Phi(g)^p = id on the window and component j is fixed by zeta^{-j} Phi(g).
  bool phi_checked = false;
};

/// Phi(g)(u w) = (g u) w; a module map W -> W o g when lambda o g = lambda.
ModuleVector phi(const ModuleVector& v, const ModuleHandle& m, const CyclicAction& act,
                 long power = 1);

/// Requires an untwisted module whose type is fixed by g.
ChargeDecomposition charge_decompose(const ModuleHandle& m, const CyclicAction& act,
                                     HalfInteger max_degree);

struct CompatibilityReport {
  long operator_charge = 0;
  long vector_charge = 0;
  std::size_t samples = 0;
  std::size_t nonzero_images = 0;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty() && samples > 0; }
};

/// Samples charge-c operators x and charge-j window vectors v and checks
/// Phi(g)(x v) = zeta^{c+j} x v.
CompatibilityReport charge_compatibility(const ModuleHandle& m, const CyclicAction& act,
                                         const ChargeDecomposition& decomposition,
                                         long operator_charge, long vector_charge,
                                         std::size_t samples, const SampleBounds& bounds,
                                         std::mt19937_64& rng);

} // namespace wcert
