#include "wcert/cli.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace wcert {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

json combination_json(const SpanBasis::Combination& c, std::uint64_t order) {
  json out = json::array();
  for (const auto& [id, coeff] : c) out.push_back({{"raw", id}, {"coeff", coeff.to_string(order)}});
  return out;
}

json vector_list(const std::vector<ModuleVector>& vs, const Signature& sig, std::uint64_t order) {
  json out = json::array();
  for (const auto& v : vs) out.push_back(format_vector(v, sig, order));
  return out;
}

} // namespace

json to_json(const Scale& s) {
  return {{"D", s.D.to_string()},
          {"N", s.N},
          {"L", s.L},
          {"Lgen", s.L_gen},
          {"slack", HalfInteger{s.slack_twice}.to_string()}};
}

json to_json(const WhittakerFunction& f, std::uint64_t order) {
  json values = json::object();
  for (const auto& [x, c] : f.values()) values[f.signature().format(x)] = c.to_string(order);
  return {{"values", values}, {"level", f.level().to_string(order)}, {"text", f.to_string(order)}};
}

json to_json(const DistinctnessCertificate& c, const Signature& sig, std::uint64_t order) {
  json witnesses = json::array();
  for (const auto& w : c.witnesses)
    witnesses.push_back({{"i", w.i},
                         {"j", w.j},
                         {"mode", sig.format(w.x)},
                         {"value_i", w.value_i.to_string(order)},
                         {"value_j", w.value_j.to_string(order)}});
  json collisions = json::array();
  for (const auto& [i, j] : c.collisions) collisions.push_back({i, j});
  return {{"distinct", c.distinct()}, {"witnesses", witnesses}, {"collisions", collisions}};
}

json to_json(const SeparatorElement& s, const Signature& sig, std::uint64_t order) {
  json factors = json::array();
  for (std::size_t k = 0; k < s.others.size(); ++k)
    factors.push_back({{"module", s.others[k]},
                       {"mode", sig.format(s.witnesses[k])},
                       {"shift", s.shifts[k].to_string(order)},
                       {"exponent", s.exponents[k]}});
  return {{"target", s.target},
          {"expr", format_expr(s.expr, sig, order)},
          {"factors", factors},
          {"images", vector_list(s.images, sig, order)},
          {"verified", s.verified}};
}

json to_json(const CyclicityCertificate& c, const Signature& sig, std::uint64_t order) {
  json provenance = json::array();
  for (const auto& step : c.provenance) {
    if (step.parent < 0) {
      provenance.push_back({{"parent", nullptr}, {"generator", nullptr}});
      continue;
    }
    provenance.push_back(
        {{"parent", step.parent}, {"generator", format_expr(c.generators[step.generator], sig, order)}});
  }
  json expressions = json::array();
  for (const auto& [label, combo] : c.expressions)
    expressions.push_back({{"target", label}, {"combination", combination_json(combo, order)}});
  json target = c.achieved;
  for (const auto& m : c.missing) target.push_back(m);
  return {{"verdict", c.verdict},
          {"certified", c.certified},
          {"charge", c.charge ? json(*c.charge) : json(nullptr)},
          {"scale", to_json(c.scale)},
          {"rounds", c.rounds},
          {"generators", c.generator_count},
          {"applications", c.applications},
          {"discarded", c.discarded},
          {"rank", c.rank},
          {"coverage", {{"achieved", c.achieved}, {"missing", c.missing}, {"target", target}}},
          {"provenance", provenance},
          {"expressions", expressions}};
}

json to_json(const VirasoroReport& r, std::uint64_t order) {
  json pairs = json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"m", p.m},
                     {"n", p.n},
                     {"zero_residual", p.zero_residual},
                     {"max_residual_terms", p.max_residual_terms},
                     {"inferred_c", p.inferred_c ? json(p.inferred_c->to_string(order)) : json(nullptr)}});
  return {{"expected_c", r.expected_c.to_string(order)},
          {"inferred_c", r.inferred_c ? json(r.inferred_c->to_string(order)) : json(nullptr)},
          {"samples", r.samples},
          {"residual_zero", r.residual_zero},
          {"c_consistent", r.c_consistent},
          {"passed", r.passed()},
          {"pairs", pairs}};
}

json to_json(const DeltaLemmaReport& r) {
  return {{"p", r.p},         {"i", r.i},
          {"j", r.j},         {"samples", r.samples},
          {"nonzero_images", r.nonzero_images},
          {"failures", r.failures},
          {"passed", r.passed()}};
}

json to_json(const ChargeDecomposition& d, const Signature& sig, std::uint64_t order) {
  json comps = json::array();
  for (const auto& c : d.components)
    comps.push_back({{"charge", c.charge},
                     {"dimension", c.vectors.size()},
                     {"vectors", vector_list(c.vectors, sig, order)}});
  return {{"p", d.p},
          {"diagonal", d.diagonal},
          {"max_degree", d.max_degree.to_string()},
          {"window_size", d.window.size()},
          {"phi_checked", d.phi_checked},
          {"components", comps}};
}

json to_json(const CompatibilityReport& r) {
  return {{"operator_charge", r.operator_charge},
          {"vector_charge", r.vector_charge},
          {"samples", r.samples},
          {"nonzero_images", r.nonzero_images},
          {"failures", r.failures},
          {"passed", r.passed()}};
}

json to_json(const PipelineReport& r, const Signature& sig, std::uint64_t order) {
  json types = json::array();
  for (const auto& t : r.types) types.push_back(to_json(t, order));
  auto certs = [&](const std::vector<LabeledCertificate>& list) {
    json out = json::array();
    for (const auto& c : list) {
      json j = to_json(c.certificate, sig, order);
      j["label"] = c.label;
      j["start"] = format_vector(c.start, sig, order);
      out.push_back(std::move(j));
    }
    return out;
  };
  json out = {{"types", types},
              {"distinctness", to_json(r.distinctness, sig, order)},
              {"certificates", certs(r.certificates)},
              {"component_certificates", certs(r.component_certificates)},
              {"certified", r.certified},
              {"verdict", r.verdict},
              {"reason", r.reason}};
  out["decomposition"] = r.decomposition ? to_json(*r.decomposition, sig, order) : json(nullptr);
  out["compatibility"] = r.compatibility ? to_json(*r.compatibility) : json(nullptr);
  return out;
}

namespace {

struct Context {
  explicit Context(const Scenario& s) : sc(s) {}

  const Scenario& sc;
  json report = json::object();
  json timings = json::object();
  std::ostringstream text;
  int exit_code = kExitPass;

  const Signature& sig() const { return sc.sig; }
  std::uint64_t order() const { return sc.order; }

  void header(const std::string& command) {
    report["command"] = command;
    report["scenario"] = sc.name;
    report["scenario_digest"] = sc.digest();
    report["algebra"] = sc.sig.name();
    report["automorphism"] = {{"name", sc.g->name()}, {"order", sc.g->order()}};
    report["whittaker"] = to_json(sc.whittaker, sc.order);
    report["seed"] = sc.seed;
    report["scale"] = to_json(sc.scale);
    text << command << ": " << sc.name << "\n";
    text << "  algebra " << sc.sig.name() << ", automorphism " << sc.g->name() << " (order "
         << sc.g->order() << ")\n";
    text << "  whittaker " << sc.whittaker.to_string(sc.order) << "\n";
    text << "  digest " << sc.digest().substr(0, 16) << "\n";
  }

  void types(const std::vector<WhittakerFunction>& ts, const DistinctnessCertificate& d) {
    json arr = json::array();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      json t = to_json(ts[i], order());
      t["index"] = i;
      arr.push_back(t);
      text << "  type of W o g^" << i << ": " << ts[i].to_string(order()) << "\n";
    }
    report["types"] = arr;
    const json dj = to_json(d, sig(), order());
    report["witnesses"] = dj["witnesses"];
    report["distinct"] = d.distinct();
    report["collisions"] = dj["collisions"];
    if (d.distinct()) {
      text << "  types distinct";
      if (!d.witnesses.empty()) {
        const auto& w = d.witnesses.front();
        text << " (witness " << sig().format(w.x) << ": " << w.value_i.to_string(order())
             << " vs " << w.value_j.to_string(order()) << ")";
      }
      text << "\n";
    } else {
      text << "  types not distinct (" << d.collisions.size() << " colliding pair(s))\n";
    }
  }

  void certificate_line(const std::string& label, const CyclicityCertificate& c) {
    text << "  " << label << ": " << c.verdict << " (" << c.achieved.size() << "/"
         << c.achieved.size() + c.missing.size() << " targets, rank " << c.rank << ", "
         << c.rounds << (c.rounds == 1 ? " round, " : " rounds, ") << c.generator_count << " generators)\n";
    if (!c.missing.empty()) {
      text << "    missing:";
      for (const auto& m : c.missing) text << " [" << m << "]";
      text << "\n";
    }
  }

  void verdict(const std::string& v, bool pass, const std::string& reason = "") {
    report["verdict"] = v;
    report["reason"] = reason;
    exit_code = pass ? kExitPass : kExitFail;
    text << "verdict: " << v;
    if (!reason.empty()) text << " (" << reason << ")";
    text << "\n";
  }
};

const json& opts(const Scenario& sc, const char* key) {
  static const json empty = json::object();
  if (sc.options.contains(key)) return sc.options.at(key);
  return empty;
}

std::vector<WhittakerFunction> family_types(const Scenario& sc) {
  std::vector<WhittakerFunction> out;
  for (const auto& h : twisted_family(sc.module(), sc.action())) out.push_back(whittaker_type(h));
  return out;
}

void cmd_certify(Context& ctx) {
  const Scenario& sc = ctx.sc;
  const json& o = opts(sc, "pipeline");
  PipelineOptions po;
  po.scale = sc.scale;
  po.seed = sc.seed;
  po.threads = sc.threads;
  po.random_starts = o.value("random_starts", std::size_t{3});
  po.compat_samples = o.value("compat_samples", std::size_t{20});
  const auto t0 = Clock::now();
  const PipelineReport r = orbifold_irreducibility_pipeline(sc.module(), sc.action(), po);
  ctx.timings["pipeline_ms"] = ms_since(t0);
  ctx.types(r.types, r.distinctness);
  json body = to_json(r, ctx.sig(), ctx.order());
  for (const auto& c : r.certificates) {
    ctx.certificate_line("certificate " + c.label, c.certificate);
    ctx.timings["certificate " + c.label + "_ms"] = c.certificate.elapsed_ms;
  }
  if (r.decomposition) {
    ctx.text << "  charge decomposition (phi^p = id: " << (r.decomposition->phi_checked ? "yes" : "no")
             << "):";
    for (const auto& comp : r.decomposition->components)
      ctx.text << " W^" << comp.charge << " dim " << comp.vectors.size();
    ctx.text << "\n";
  }
  for (const auto& c : r.component_certificates) {
    ctx.certificate_line("component " + c.label, c.certificate);
    ctx.timings["component " + c.label + "_ms"] = c.certificate.elapsed_ms;
  }
  if (r.compatibility)
    ctx.text << "  charge compatibility: " << (r.compatibility->passed() ? "pass" : "fail") << " ("
             << r.compatibility->samples << " samples)\n";
  ctx.report["pipeline"] = body;
  if (!r.certificates.empty())
    ctx.report["coverage"] = body["certificates"][0]["coverage"];
  ctx.verdict(r.verdict, r.certified, r.reason);
}

void cmd_whittaker_type(Context& ctx) {
  const auto types = family_types(ctx.sc);
  ctx.types(types, distinctness(types));
  ctx.verdict("pass", true);
}

void cmd_separator(Context& ctx) {
  const Scenario& sc = ctx.sc;
  const auto family = twisted_family(sc.module(), sc.action());
  const auto types = family_types(sc);
  const auto d = distinctness(types);
  ctx.types(types, d);
  if (!d.distinct()) {
    ctx.verdict("not-separated", false, "types not distinct");
    return;
  }
  json all = json::array();
  bool ok = true;
  const json& o = opts(sc, "separator");
  std::vector<std::size_t> targets;
  if (o.contains("target")) targets.push_back(o["target"].get<std::size_t>());
  else
    for (std::size_t i = 0; i < family.size(); ++i) targets.push_back(i);
  for (auto t : targets) {
    if (t >= family.size()) throw ScenarioError("options.separator.target out of range");
    const SeparatorElement s = separator(family, t);
    ok = ok && s.verified;
    ctx.text << "  separator for W o g^" << t << ": " << format_expr(s.expr, ctx.sig(), ctx.order())
             << (s.verified ? "  [verified]" : "  [FAILED]") << "\n";
    for (std::size_t r = 0; r < s.images.size(); ++r)
      ctx.text << "    on w_" << r << ": " << format_vector(s.images[r], ctx.sig(), ctx.order())
               << "\n";
    all.push_back(to_json(s, ctx.sig(), ctx.order()));
  }
  ctx.report["separators"] = all;
  ctx.verdict(ok ? "pass" : "fail", ok);
}

void cmd_virasoro(Context& ctx) {
  const Scenario& sc = ctx.sc;
  const json& o = opts(sc, "virasoro");
  std::vector<std::pair<long, long>> pairs{{1, -1}, {2, -2}, {3, -3}};
  if (o.contains("pairs")) pairs = o["pairs"].get<std::vector<std::pair<long, long>>>();
  const std::size_t samples = o.value("samples", std::size_t{10});
  const HalfInteger D = o.contains("D") ? HalfInteger::parse(o["D"].is_string()
                                                                 ? o["D"].get<std::string>()
                                                                 : o["D"].dump())
                                        : HalfInteger::from_int(3);
  std::mt19937_64 rng(sc.seed);
  const auto t0 = Clock::now();
  const VirasoroReport r = virasoro_check(sc.module(), pairs, samples, D, rng);
  ctx.timings["virasoro_ms"] = ms_since(t0);
  for (const auto& p : r.pairs) {
    ctx.text << "  [L(" << p.m << "), L(" << p.n << ")]: residual "
             << (p.zero_residual ? "0" : "NONZERO");
    if (p.inferred_c) ctx.text << ", inferred c = " << p.inferred_c->to_string(ctx.order());
    ctx.text << "\n";
  }
  ctx.text << "  central charge " << r.expected_c.to_string(ctx.order()) << " ("
           << r.samples << " sampled vectors of degree <= " << D.to_string() << ")\n";
  ctx.report["virasoro"] = to_json(r, ctx.order());
  ctx.report["virasoro"]["D"] = D.to_string();
  ctx.verdict(r.passed() ? "pass" : "fail", r.passed(),
              r.passed() ? "" : (r.residual_zero ? "central charge mismatch" : "nonzero residual"));
}

void cmd_span(Context& ctx) {
  const Scenario& sc = ctx.sc;
  const json& o = opts(sc, "span");
  const ModuleHandle m = sc.module();
  auto vec = [&](const json& s) {
    return act_expr(parse_expr(s.get<std::string>(), ctx.sig(), ctx.order()),
                    ModuleVector::cyclic(), m);
  };
  SpanBasis basis;
  json rows = json::array();
  for (const auto& s : o.value("vectors", json::array())) {
    const ModuleVector v = vec(s);
    const bool grew = basis.insert(to_sparse(v));
    rows.push_back({{"input", s}, {"vector", format_vector(v, ctx.sig(), ctx.order())}, {"grew", grew}});
  }
  json queries = json::array();
  bool all = true;
  for (const auto& s : o.value("queries", json::array())) {
    const ModuleVector v = vec(s);
    const auto combo = basis.express(to_sparse(v));
    all = all && combo.has_value();
    json q = {{"input", s}, {"member", combo.has_value()}};
    if (combo) q["combination"] = combination_json(*combo, ctx.order());
    queries.push_back(q);
    ctx.text << "  " << s.get<std::string>() << ": " << (combo ? "in span" : "not in span") << "\n";
  }
  ctx.text << "  rank " << basis.rank() << " from " << rows.size() << " vectors\n";
  ctx.report["span"] = {{"rank", basis.rank()}, {"rows", rows}, {"queries", queries}};
  ctx.verdict(all ? "pass" : "fail", all, all ? "" : "query outside span");
}

void cmd_delta(Context& ctx) {
  const Scenario& sc = ctx.sc;
  const json& o = opts(sc, "delta");
  const CyclicAction act = sc.action();
  SampleBounds bounds;
  bounds.index_bound = o.value("index_bound", sc.scale.N);
  bounds.max_word_length = o.value("max_word_length", sc.scale.L_gen);
  bounds.vector_degree = sc.scale.D;
  const std::size_t samples = o.value("samples", std::size_t{30});
  std::vector<std::pair<long, long>> cases;
  if (o.contains("cases")) cases = o["cases"].get<std::vector<std::pair<long, long>>>();
  else cases.emplace_back(o.value("i", 0L), o.value("j", 1L));
  std::mt19937_64 rng(sc.seed);
  json reports = json::array();
  bool ok = true;
  const auto t0 = Clock::now();
  for (const auto& [i, j] : cases) {
    const DeltaLemmaReport r = verify_delta_lemma(sc.module(), act, i, j, samples, bounds, rng);
    ok = ok && r.passed();
    ctx.text << "  V^" << r.j << " . Delta^(" << r.p << "," << r.i << ") in Delta^(" << r.p << ","
             << act.reduce(i + j) << "): " << (r.passed() ? "pass" : "FAIL") << " (" << r.samples
             << " samples, " << r.nonzero_images << " nonzero)\n";
    for (const auto& f : r.failures) ctx.text << "    " << f << "\n";
    reports.push_back(to_json(r));
  }
  ctx.timings["delta_ms"] = ms_since(t0);
  ctx.report["delta"] = reports;
  ctx.verdict(ok ? "pass" : "fail", ok);
}

void cmd_charge(Context& ctx) {
  const Scenario& sc = ctx.sc;
  const json& o = opts(sc, "charge_decompose");
  const ModuleHandle m = sc.module();
  const CyclicAction act = sc.action();
  const auto types = family_types(sc);
  ctx.types(types, distinctness(types));
  if (!(whittaker_type(m.twisted_by(act.pointer(), 1)) == m.base_whittaker())) {
    ctx.verdict("fail", false, "Whittaker type not fixed by g");
    return;
  }
  const auto t0 = Clock::now();
  const ChargeDecomposition d = charge_decompose(m, act, sc.scale.D);
  ctx.report["decomposition"] = to_json(d, ctx.sig(), ctx.order());
  ctx.text << "  phi(g)^p = id and eigenvalue check: " << (d.phi_checked ? "pass" : "FAIL") << "\n";
  bool ok = d.phi_checked;
  json certs = json::array();
  PipelineOptions po;
  po.scale = sc.scale;
  for (const auto& comp : d.components) {
    ctx.text << "  W^" << comp.charge << " (dim " << comp.vectors.size() << "):";
    for (const auto& v : comp.vectors) ctx.text << " [" << format_vector(v, ctx.sig(), ctx.order()) << "]";
    ctx.text << "\n";
    if (comp.vectors.empty()) continue;
    CyclicityRequest req;
    req.modules = {m};
    req.start.components = {comp.vectors.front()};
    req.g = act.pointer();
    req.charge = 0;
    req.scale = sc.scale;
    req.threads = sc.threads;
    for (const auto& v : comp.vectors)
      req.targets.push_back({format_vector(v, ctx.sig(), ctx.order()), to_sparse(v)});
    const CyclicityCertificate c = cyclicity_certificate(req);
    ok = ok && c.certified;
    ctx.certificate_line("W^" + std::to_string(comp.charge) + " from lowest vector", c);
    json j = to_json(c, ctx.sig(), ctx.order());
    j["label"] = "W^" + std::to_string(comp.charge);
    j["start"] = format_vector(comp.vectors.front(), ctx.sig(), ctx.order());
    certs.push_back(std::move(j));
  }
  SampleBounds bounds;
  bounds.index_bound = sc.scale.N;
  bounds.max_word_length = sc.scale.L_gen;
  bounds.vector_degree = sc.scale.D;
  std::mt19937_64 rng(sc.seed);
  const CompatibilityReport cr = charge_compatibility(
      m, act, d, o.value("operator_charge", 1L), o.value("vector_charge", 0L),
      o.value("samples", std::size_t{20}), bounds, rng);
  ok = ok && cr.passed();
  ctx.text << "  V^" << cr.operator_charge << " . W^" << cr.vector_charge << " in W^"
           << act.reduce(cr.operator_charge + cr.vector_charge) << ": "
           << (cr.passed() ? "pass" : "FAIL") << " (" << cr.samples << " samples)\n";
  ctx.timings["charge_decompose_ms"] = ms_since(t0);
  ctx.report["component_certificates"] = certs;
  ctx.report["compatibility"] = to_json(cr);
  ctx.verdict(ok ? "pass" : "fail", ok);
}

} // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"certify-orbifold", "whittaker-type", "separator",
                                              "virasoro-check",   "span",           "delta-check",
                                              "charge-decompose"};
  return names;
}

CommandResult run_command(const std::string& command, const Scenario& scenario) {
  Context ctx(scenario);
  ctx.header(command);
  const auto t0 = Clock::now();
  if (command == "certify-orbifold") cmd_certify(ctx);
  else if (command == "whittaker-type") cmd_whittaker_type(ctx);
  else if (command == "separator") cmd_separator(ctx);
  else if (command == "virasoro-check") cmd_virasoro(ctx);
  else if (command == "span") cmd_span(ctx);
  else if (command == "delta-check") cmd_delta(ctx);
  else if (command == "charge-decompose") cmd_charge(ctx);
  else throw std::invalid_argument("unknown command '" + command + "'");
  ctx.timings["total_ms"] = ms_since(t0);
  ctx.report["timings"] = ctx.timings;
  return {ctx.exit_code, ctx.text.str(), std::move(ctx.report)};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"wcert: exact Whittaker-module orbifold certificates"};
  app.name(args.empty() ? "wcert" : args.front());
  std::string command, path, json_path, scale_text;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "Command to run")
      ->required()
      ->check(CLI::IsMember(command_names()));
  app.add_option("scenario", path, "Scenario JSON file")->required();
  app.add_option("--json", json_path, "Write the JSON report to this path");
  app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--scale", scale_text, "Scale overrides, e.g. D=1,N=3,L=6,Lgen=2,slack=1");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitError;
  }

  try {
    const Scenario sc = load_scenario_file(path, ScaleOverrides::parse(scale_text), seed);
    CommandResult r = run_command(command, sc);
    out << r.text;
    if (!json_path.empty()) {
      std::ofstream f(json_path);
      if (!f) throw std::runtime_error("cannot write '" + json_path + "'");
      f << r.report.dump(2) << "\n";
    }
    return r.exit_code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

} // namespace wcert
