#include "wcert/certify.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <set>
#include <thread>

namespace wcert {

std::optional<Mode> first_difference(const WhittakerFunction& a, const WhittakerFunction& b) {
  std::set<Mode> keys;
  for (const auto& [x, c] : a.values()) keys.insert(x);
  for (const auto& [x, c] : b.values()) keys.insert(x);
  for (const auto& x : keys)
    if (!(a.value(x) == b.value(x))) return x;
  return std::nullopt;
}

DistinctnessCertificate distinctness(const std::vector<WhittakerFunction>& types) {
  DistinctnessCertificate cert;
  cert.types = types;
  for (std::size_t i = 0; i < types.size(); ++i)
    for (std::size_t j = i + 1; j < types.size(); ++j) {
      if (!(types[i].signature() == types[j].signature()))
        throw std::invalid_argument("types over different algebras");
      if (auto x = first_difference(types[i], types[j]))
        cert.witnesses.push_back({i, j, *x, types[i].value(*x), types[j].value(*x)});
      else
        cert.collisions.emplace_back(i, j);
    }
  return cert;
}

SeparatorElement separator(const std::vector<ModuleHandle>& modules, std::size_t target) {
  if (target >= modules.size()) throw std::out_of_range("separator target out of range");
  std::vector<WhittakerFunction> types;
  for (const auto& m : modules) types.push_back(whittaker_type(m));
  SeparatorElement sep;
  sep.target = target;
  sep.expr = OperatorExpr::identity();
  const ModuleVector w = ModuleVector::cyclic();
  for (std::size_t j = 0; j < modules.size(); ++j) {
    if (j == target) continue;
    const auto x = first_difference(types[j], types[target]);
    if (!x)
      throw std::invalid_argument("separator: modules " + std::to_string(j) + " and " +
                                  std::to_string(target) + " have the same Whittaker type");
    const Scalar shift = types[j].value(*x);
    const int k = generalized_eigen_degree(*x, w, modules[j]);
    const OperatorExpr factor = OperatorExpr::mode(*x) - OperatorExpr::constant(shift);
    for (int e = 0; e < k; ++e) sep.expr = sep.expr * factor;
    sep.others.push_back(j);
    sep.witnesses.push_back(*x);
    sep.shifts.push_back(shift);
    sep.exponents.push_back(k);
  }
  sep.expr = normal_form(sep.expr, modules[target].signature());
  sep.verified = true;
  for (std::size_t r = 0; r < modules.size(); ++r) {
    sep.images.push_back(act_expr(sep.expr, w, modules[r]));
    if (sep.images.back().is_zero() != (r != target)) sep.verified = false;
  }
  return sep;
}

std::vector<OperatorExpr> invariant_generators(const Signature& sig, long N, std::size_t L_gen,
                                               const Automorphism* g, std::optional<long> charge) {
  if (charge && !g) throw std::invalid_argument("charge restriction without an automorphism");
  std::vector<Mode> modes;
  for (long n = -N; n <= N; ++n)
    for (int s = 0; s < sig.species_count(); ++s) modes.push_back(Mode{s, n});
  std::sort(modes.begin(), modes.end());

  std::vector<OperatorExpr> out;
  std::set<std::string> seen;
  const bool diagonal = g && g->diagonal_exponents().has_value();
  const long p = g ? static_cast<long>(g->order()) : 1;
  const long want = charge ? ((*charge % p) + p) % p : 0;
  Word w;
  auto visit = [&]() {
    if (!charge) {
      out.push_back(OperatorExpr::word(w));
      return;
    }
    if (diagonal) {
      if (*word_charge(w, *g) == want) out.push_back(OperatorExpr::word(w));
      return;
    }
    OperatorExpr e = average_projector(*g, want, OperatorExpr::word(w));
    if (e.is_zero()) return;
    e *= e.terms().begin()->second.inverse();
    if (seen.insert(format_expr(e, sig, g->order())).second) out.push_back(std::move(e));
  };
  std::function<void(std::size_t, std::size_t)> grow = [&](std::size_t from, std::size_t left) {
    for (std::size_t i = from; i < modes.size(); ++i) {
      w.modes.push_back(modes[i]);
      visit();
      if (left > 1) grow(i, left - 1);
      w.modes.pop_back();
    }
  };
  if (L_gen > 0) grow(0, L_gen);
  return out;
}

std::vector<CyclicityTarget> default_targets(const std::vector<ModuleHandle>& modules,
                                             HalfInteger D) {
  std::vector<CyclicityTarget> out;
  for (std::size_t s = 0; s < modules.size(); ++s) {
    const Signature& sig = modules[s].signature();
    for (const auto& u : filtration_basis(modules[s], D)) {
      std::string label = format_monomial(u, sig);
      if (modules.size() > 1) label = "[" + std::to_string(s) + "] " + label;
      out.push_back({std::move(label), to_sparse(ModuleVector::monomial(u), s)});
    }
  }
  return out;
}

namespace {

DirectSumVector act_slots(const OperatorExpr& e, const DirectSumVector& v,
                          const std::vector<ModuleHandle>& modules) {
  DirectSumVector out;
  out.components.reserve(modules.size());
  for (std::size_t s = 0; s < modules.size(); ++s)
    out.components.push_back(v.components[s].is_zero() ? ModuleVector{}
                                                        : act_expr(e, v.components[s], modules[s]));
  return out;
}

} // namespace

CyclicityCertificate cyclicity_certificate(const CyclicityRequest& request) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& modules = request.modules;
  if (modules.empty()) throw std::invalid_argument("cyclicity certificate needs a module");
  if (request.start.components.size() != modules.size())
    throw std::invalid_argument("start vector has the wrong number of slots");
  if (request.start.is_zero()) throw std::invalid_argument("start vector is zero");
  const Signature& sig = modules.front().signature();
  const Scale& scale = request.scale;

  CyclicityCertificate cert;
  cert.scale = scale;
  cert.charge = request.charge;
  cert.generators = invariant_generators(sig, scale.N, scale.L_gen, request.g.get(), request.charge);
  cert.generator_count = cert.generators.size();
  const auto targets = request.targets.empty() ? default_targets(modules, scale.D) : request.targets;
  const long cap = scale.D.twice + scale.slack_twice;

  SpanBasis basis;
  std::vector<DirectSumVector> raw;
  basis.insert(to_sparse(request.start));
  raw.push_back(request.start);
  cert.provenance.push_back({-1, 0});

  auto all_covered = [&]() {
    return std::all_of(targets.begin(), targets.end(),
                       [&](const CyclicityTarget& t) { return basis.contains(t.vector); });
  };
  auto within_cap = [&](const DirectSumVector& v) {
    for (const auto& c : v.components)
      if (c.max_degree_twice(sig) > cap) return false;
    return true;
  };

  const unsigned threads = std::max(1u, request.threads);
  std::vector<std::size_t> frontier{0};
  bool stalled = false;
  bool covered = all_covered();
  while (!covered && cert.rounds < scale.L) {
    ++cert.rounds;
    std::vector<std::size_t> next;
    const std::size_t G = cert.generators.size();
    const std::size_t total = frontier.size() * G;
    constexpr std::size_t chunk = 512;
    std::vector<DirectSumVector> batch;
    for (std::size_t begin = 0; begin < total; begin += chunk) {
      const std::size_t end = std::min(total, begin + chunk);
      batch.assign(end - begin, DirectSumVector{});
      auto work = [&](unsigned t) {
        for (std::size_t k = begin + t; k < end; k += threads)
          batch[k - begin] = act_slots(cert.generators[k % G], raw[frontier[k / G]], modules);
      };
      if (threads == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
      }
      for (std::size_t k = begin; k < end; ++k) {
        ++cert.applications;
        DirectSumVector& v = batch[k - begin];
        if (v.is_zero()) continue;
        if (!within_cap(v)) {
          ++cert.discarded;
          continue;
        }
        if (!basis.insert(to_sparse(v))) continue;
        next.push_back(raw.size());
        cert.provenance.push_back({static_cast<long>(frontier[k / G]), k % G});
        raw.push_back(std::move(v));
      }
    }
    covered = all_covered();
    if (next.empty()) {
      stalled = true;
      break;
    }
    frontier = std::move(next);
  }

  cert.rank = basis.rank();
  for (const auto& t : targets) {
    if (auto combo = basis.express(t.vector)) {
      cert.achieved.push_back(t.label);
      cert.expressions.emplace_back(t.label, std::move(*combo));
    } else {
      cert.missing.push_back(t.label);
    }
  }
  cert.certified = cert.missing.empty();
  cert.verdict = cert.certified ? "certified"
                 : stalled      ? "not-certified (stalled)"
                                : "not-certified (budget)";
  cert.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return cert;
}

bool replay_certificate(const CyclicityCertificate& cert, const CyclicityRequest& request) {
  const auto targets = request.targets.empty() ? default_targets(request.modules, cert.scale.D)
                                               : request.targets;
  std::vector<SparseVector> raw;
  std::vector<DirectSumVector> vectors;
  for (const auto& step : cert.provenance) {
    DirectSumVector v;
    if (step.parent < 0) {
      v = request.start;
    } else {
      if (static_cast<std::size_t>(step.parent) >= vectors.size() ||
          step.generator >= cert.generators.size())
        return false;
      v = act_slots(cert.generators[step.generator], vectors[static_cast<std::size_t>(step.parent)],
                    request.modules);
    }
    raw.push_back(to_sparse(v));
    vectors.push_back(std::move(v));
  }
  if (cert.expressions.size() != cert.achieved.size()) return false;
  for (const auto& [label, combo] : cert.expressions) {
    auto t = std::find_if(targets.begin(), targets.end(),
                          [&](const CyclicityTarget& x) { return x.label == label; });
    if (t == targets.end()) return false;
    SparseVector sum;
    for (const auto& [id, c] : combo) {
      if (id >= raw.size()) return false;
      axpy(sum, c, raw[id]);
    }
    if (!sparse_equal(sum, t->vector)) return false;
  }
  return cert.certified == (cert.achieved.size() == targets.size());
}

VirasoroReport virasoro_check(const ModuleHandle& m, const std::vector<std::pair<long, long>>& pairs,
                              std::size_t samples, HalfInteger D, std::mt19937_64& rng) {
  VirasoroReport report;
  report.expected_c = conformal_data(m.signature()).central_charge;
  const auto basis = filtration_basis(m, D);
  std::vector<ModuleVector> vectors;
  for (std::size_t s = 0; s < samples; ++s) {
    ModuleVector v = random_combination(basis, rng, 4);
    vectors.push_back(v.is_zero() ? ModuleVector::cyclic() : std::move(v));
  }
  report.samples = vectors.size();
  for (const auto& [a, b] : pairs) {
    VirasoroPairResult pr;
    pr.m = a;
    pr.n = b;
    const long cubic = a * a * a - a;
    for (const auto& v : vectors) {
      ModuleVector r = act_virasoro(a, act_virasoro(b, v, m), m) -
                       act_virasoro(b, act_virasoro(a, v, m), m) -
                       act_virasoro(a + b, v, m) * Scalar(a - b);
      if (a + b == 0 && cubic != 0) {
        const auto& [u, vu] = *v.terms().begin();
        const Scalar c = Scalar(12) * r.coefficient(u) / (Scalar(cubic) * vu);
        if (!pr.inferred_c) pr.inferred_c = c;
        else if (!(*pr.inferred_c == c)) report.c_consistent = false;
      }
      if (a + b == 0) r -= v * (report.expected_c * Scalar(Rational(cubic, 12)));
      if (!r.is_zero()) {
        pr.zero_residual = false;
        pr.max_residual_terms = std::max(pr.max_residual_terms, r.size());
      }
    }
    if (pr.inferred_c) {
      if (!report.inferred_c) report.inferred_c = pr.inferred_c;
      if (!(*pr.inferred_c == report.expected_c)) report.c_consistent = false;
    }
    if (!pr.zero_residual) report.residual_zero = false;
    report.pairs.push_back(std::move(pr));
  }
  return report;
}

namespace {

LabeledCertificate run_labeled(std::string label, const ModuleHandle& module, ModuleVector start,
                               const CyclicAction& act, const PipelineOptions& options,
                               std::vector<CyclicityTarget> targets = {}) {
  CyclicityRequest req;
  req.modules = {module};
  req.start.components = {start};
  req.g = act.pointer();
  req.charge = 0;
  req.scale = options.scale;
  req.targets = std::move(targets);
  req.threads = options.threads;
  return {std::move(label), std::move(start), cyclicity_certificate(req)};
}

} // namespace

PipelineReport orbifold_irreducibility_pipeline(const ModuleHandle& module,
                                                const CyclicAction& act,
                                                const PipelineOptions& options) {
  if (module.is_twisted()) throw std::invalid_argument("pipeline expects an untwisted module");
  if (!(act.g().signature() == module.signature()))
    throw std::invalid_argument("automorphism and module live on different algebras");
  PipelineReport report;
  for (const auto& h : twisted_family(module, act)) report.types.push_back(whittaker_type(h));
  report.distinctness = distinctness(report.types);
  std::mt19937_64 rng(options.seed);
  const auto basis = filtration_basis(module, options.scale.D);

  if (report.distinctness.distinct()) {
    report.certificates.push_back(
        run_labeled("cyclic", module, ModuleVector::cyclic(), act, options));
    for (std::size_t s = 0; s < options.random_starts; ++s) {
      ModuleVector v = random_combination(basis, rng, 4);
      if (v.is_zero()) v = ModuleVector::cyclic();
      report.certificates.push_back(
          run_labeled("random-" + std::to_string(s + 1), module, std::move(v), act, options));
    }
    report.certified = std::all_of(report.certificates.begin(), report.certificates.end(),
                                   [](const auto& c) { return c.certificate.certified; });
    report.verdict = report.certified ? "certified" : "not-certified";
    if (!report.certified) report.reason = "charge-0 closure did not cover the window";
    return report;
  }

  report.verdict = "not-certified";
  report.reason = "types not distinct";
  report.certificates.push_back(
      run_labeled("cyclic (negative control)", module, ModuleVector::cyclic(), act, options));
  if (!(report.types.size() > 1 && report.types[1] == report.types[0])) return report;

  report.decomposition = charge_decompose(module, act, options.scale.D);
  const Signature& sig = module.signature();
  for (const auto& comp : report.decomposition->components) {
    if (comp.vectors.empty()) continue;
    std::vector<CyclicityTarget> targets;
    for (const auto& v : comp.vectors)
      targets.push_back({format_vector(v, sig, act.g().order()), to_sparse(v)});
    report.component_certificates.push_back(run_labeled("W^" + std::to_string(comp.charge), module,
                                                        comp.vectors.front(), act, options,
                                                        std::move(targets)));
  }
  SampleBounds bounds;
  bounds.index_bound = options.scale.N;
  bounds.max_word_length = options.scale.L_gen;
  bounds.vector_degree = options.scale.D;
  if (act.p() > 1)
    report.compatibility = charge_compatibility(module, act, *report.decomposition, 1, 0,
                                                options.compat_samples, bounds, rng);
  return report;
}

} // namespace wcert
