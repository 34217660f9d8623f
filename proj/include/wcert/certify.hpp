#pragma once

#include "wcert/module.hpp"
#include "wcert/orbifold.hpp"
#include "wcert/span.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace wcert {

struct DistinctnessWitness {
  std::size_t i = 0, j = 0;
  Mode x;
  Scalar value_i, value_j;
};

struct DistinctnessCertificate {
  std::vector<WhittakerFunction> types;
  std::vector<DistinctnessWitness> witnesses;
  std::vector<std::pair<std::size_t, std::size_t>> collisions;
  bool distinct() const { return collisions.empty(); }
};

/// First mode in (index, species) order where a and b differ.
std::optional<Mode> first_difference(const WhittakerFunction& a, const WhittakerFunction& b);

DistinctnessCertificate distinctness(const std::vector<WhittakerFunction>& types);

struct SeparatorElement {
  std::size_t target = 0;
  OperatorExpr expr;
  /// One factor per j != target, in order of j.
  std::vector<std::size_t> others;
  std::vector<Mode> witnesses;
  std::vector<Scalar> shifts;
  std::vector<int> exponents;
  /// expr applied to each module's cyclic vector.
  std::vector<ModuleVector> images;
  bool verified = false;
};

/// prod_{j != i} (x_j - lambda^(j)(x_j))^{k_j}; throws if two types coincide.
SeparatorElement separator(const std::vector<ModuleHandle>& modules, std::size_t target);

struct Scale {
  HalfInteger D = HalfInteger::from_int(2);
  long N = 3;
  /// Closure rounds: each round applies every generator to the vectors found
  /// in the previous round.
  std::size_t L = 6;
  std::size_t L_gen = 2;
  /// Candidates above degree D + slack are dropped; doubled like degrees.
  long slack_twice = 2;
};

struct CyclicityTarget {
  std::string label;
  SparseVector vector;
};

struct CyclicityRequest {
  /// One handle per direct-sum slot.
  std::vector<ModuleHandle> modules;
  DirectSumVector start;
  /// With a charge restriction, generators are V^charge words for this g.
  std::shared_ptr<const Automorphism> g;
  std::optional<long> charge;
  Scale scale;
  /// Empty: every filtration monomial of degree <= D in every slot.
  std::vector<CyclicityTarget> targets;
  unsigned threads = 1;
};

/// raw vector k = generator . raw[parent]; parent < 0 marks the start vector.
struct ProvenanceStep {
  long parent = -1;
  std::size_t generator = 0;
};

struct CyclicityCertificate {
  Scale scale;
  std::optional<long> charge;
  bool certified = false;
  /// "certified", "not-certified (stalled)" or "not-certified (budget)".
  std::string verdict;
  std::size_t rounds = 0;
  std::size_t generator_count = 0;
  std::size_t applications = 0;
  std::size_t discarded = 0;
  std::size_t rank = 0;
  std::vector<std::string> achieved;
  std::vector<std::string> missing;
  std::vector<OperatorExpr> generators;
  std::vector<ProvenanceStep> provenance;
  /// target label -> coefficients on raw vectors.
  std::vector<std::pair<std::string, SpanBasis::Combination>> expressions;
  double elapsed_ms = 0;
};

/// Canonical words of length 1..L_gen in modes with |index| <= N, restricted
/// to V^charge when a charge is given.
std::vector<OperatorExpr> invariant_generators(const Signature& sig, long N, std::size_t L_gen,
                                               const Automorphism* g, std::optional<long> charge);

std::vector<CyclicityTarget> default_targets(const std::vector<ModuleHandle>& modules,
                                             HalfInteger D);

CyclicityCertificate cyclicity_certificate(const CyclicityRequest& request);

/// Recomputes every raw vector from the start through act_expr and checks
/// that each recorded expression reproduces its target.
bool replay_certificate(const CyclicityCertificate& cert, const CyclicityRequest& request);

struct VirasoroPairResult {
  long m = 0, n = 0;
  bool zero_residual = true;
  std::size_t max_residual_terms = 0;
  std::optional<Scalar> inferred_c;
};

struct VirasoroReport {
  Scalar expected_c;
  std::optional<Scalar> inferred_c;
  std::vector<VirasoroPairResult> pairs;
  std::size_t samples = 0;
  bool residual_zero = true;
  bool c_consistent = true;
  bool passed() const { return residual_zero && c_consistent; }
};

/// Checks [L(m), L(n)] v = (m-n) L(m+n) v + c (m^3-m)/12 delta_{m+n,0} v on
/// sampled v of degree <= D, with c read off from (k, -k) pairs.
VirasoroReport virasoro_check(const ModuleHandle& m, const std::vector<std::pair<long, long>>& pairs,
                              std::size_t samples, HalfInteger D, std::mt19937_64& rng);

struct PipelineOptions {
  Scale scale;
  std::size_t random_starts = 3;
  std::uint64_t seed = 20240601;
  std::size_t compat_samples = 20;
  unsigned threads = 1;
};

struct LabeledCertificate {
  std::string label;
  ModuleVector start;
  CyclicityCertificate certificate;
};

struct PipelineReport {
  std::vector<WhittakerFunction> types;
  DistinctnessCertificate distinctness;
  std::vector<LabeledCertificate> certificates;
  /// Only when the types coincide and lambda o g = lambda.
  std::optional<ChargeDecomposition> decomposition;
  std::vector<LabeledCertificate> component_certificates;
  std::optional<CompatibilityReport> compatibility;
  bool certified = false;
  std::string verdict;
  std::string reason;
};

PipelineReport orbifold_irreducibility_pipeline(const ModuleHandle& module,
                                                const CyclicAction& act,
                                                const PipelineOptions& options);

} // namespace wcert
