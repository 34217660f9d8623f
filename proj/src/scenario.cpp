#include "wcert/scenario.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace wcert {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ScenarioError(msg); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::string scalar_text(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long>());
  fail(where + ": expected a scalar string");
}

Scalar parse_scalar(const json& v, std::uint64_t order, const std::string& where) {
  try {
    return Scalar::parse(scalar_text(v, where), order);
  } catch (const ParseError& e) {
    fail(where + ": " + e.what());
  }
}

std::vector<Scalar> parse_scalar_array(const json& v, std::uint64_t order,
                                       const std::string& where) {
  if (!v.is_array()) fail(where + ": expected an array of scalar strings");
  std::vector<Scalar> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(parse_scalar(v[i], order, where + "[" + std::to_string(i) + "]"));
  return out;
}

HalfInteger parse_half(const json& v, const std::string& where) {
  try {
    if (v.is_number_integer()) return HalfInteger::from_int(v.get<long>());
    if (v.is_number_float()) return HalfInteger::parse(std::to_string(v.get<double>()));
    if (v.is_string()) return HalfInteger::parse(v.get<std::string>());
  } catch (const ParseError& e) {
    fail(where + ": " + e.what());
  }
  fail(where + ": expected a half-integer");
}

long parse_long(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where + ": expected an integer");
  return v.get<long>();
}

Signature parse_algebra(const json& doc) {
  if (!doc.contains("algebra")) fail("missing 'algebra'");
  const json& a = doc["algebra"];
  const std::string type = a.is_string() ? a.get<std::string>() : a.value("type", "");
  if (type == "weyl") return Signature::weyl();
  if (type == "heisenberg") {
    const long rank = a.is_object() ? a.value("rank", 1L) : 1L;
    if (rank < 1 || rank > 16) fail("algebra.rank must be in 1..16");
    return Signature::heisenberg(static_cast<int>(rank));
  }
  fail("algebra.type must be 'weyl' or 'heisenberg'");
}

std::uint64_t declared_order(const json& doc) {
  if (!doc.contains("automorphism")) return 1;
  const json& a = doc["automorphism"];
  const std::string type = a.is_string() ? a.get<std::string>() : a.value("type", "");
  if (type == "theta") return 2;
  if (type == "identity") return 1;
  if (type == "gp") return static_cast<std::uint64_t>(a.value("p", 0L));
  if (type == "orthogonal") return static_cast<std::uint64_t>(a.value("order", 0L));
  if (type == "permutation") {
    const auto perm = a.value("perm", std::vector<int>{});
    // order of a permutation is the lcm of its cycle lengths
    std::uint64_t order = 1;
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      std::uint64_t len = 0;
      for (std::size_t k = i; !seen[k]; ++len) {
        seen[k] = true;
        const int next = perm[k] - 1;
        if (next < 0 || static_cast<std::size_t>(next) >= perm.size()) fail("invalid permutation");
        k = static_cast<std::size_t>(next);
      }
      if (len) order = std::lcm(order, len);
    }
    return order;
  }
  fail("automorphism.type must be theta, gp, permutation, orthogonal or identity");
}

std::shared_ptr<const Automorphism> parse_automorphism(const json& doc, const Signature& sig,
                                                       std::uint64_t order) {
  if (!doc.contains("automorphism"))
    return std::make_shared<const Automorphism>(Automorphism::identity(sig));
  const json& a = doc["automorphism"];
  const std::string type = a.is_string() ? a.get<std::string>() : a.value("type", "");
  try {
    if (type == "theta") return std::make_shared<const Automorphism>(Automorphism::theta(sig));
    if (type == "identity")
      return std::make_shared<const Automorphism>(Automorphism::identity(sig));
    if (type == "gp") {
      const long p = a.value("p", 0L);
      if (p < 1) fail("automorphism.p must be >= 1");
      return std::make_shared<const Automorphism>(
          Automorphism::weyl_gp(sig, static_cast<std::uint64_t>(p)));
    }
    if (type == "permutation")
      return std::make_shared<const Automorphism>(
          Automorphism::permutation(sig, a.at("perm").get<std::vector<int>>()));
    if (type == "orthogonal") {
      const long p = a.value("order", 0L);
      if (p < 1) fail("automorphism.order must be >= 1");
      const json& rows = a.at("matrix");
      SpeciesMatrix m;
      for (std::size_t i = 0; i < rows.size(); ++i)
        m.push_back(parse_scalar_array(rows[i], order, "automorphism.matrix[" +
                                                           std::to_string(i) + "]"));
      return std::make_shared<const Automorphism>(sig, static_cast<std::uint64_t>(p),
                                                  std::move(m), "orthogonal");
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const json::exception& e) {
    fail(std::string("automorphism: ") + e.what());
  } catch (const std::exception& e) {
    fail(std::string("automorphism: ") + e.what());
  }
  fail("automorphism.type must be theta, gp, permutation, orthogonal or identity");
}

WhittakerFunction parse_whittaker(const json& doc, const Signature& sig, std::uint64_t order) {
  const json w = doc.value("whittaker", json::object());
  try {
    if (sig.kind() == AlgebraKind::Weyl) {
      return WhittakerFunction::weyl(
          sig, parse_scalar_array(w.value("lambda", json::array()), order, "whittaker.lambda"),
          parse_scalar_array(w.value("mu", json::array()), order, "whittaker.mu"));
    }
    const json lambda = w.value("lambda", json::array());
    if (!lambda.is_array()) fail("whittaker.lambda must be an array");
    std::vector<std::vector<Scalar>> per;
    const bool flat = std::none_of(lambda.begin(), lambda.end(),
                                   [](const json& x) { return x.is_array(); });
    if (flat && !lambda.empty()) {
      if (sig.species_count() != 1) fail("whittaker.lambda must hold one array per generator");
      per.push_back(parse_scalar_array(lambda, order, "whittaker.lambda"));
    } else {
      for (std::size_t i = 0; i < lambda.size(); ++i)
        per.push_back(parse_scalar_array(lambda[i], order,
                                         "whittaker.lambda[" + std::to_string(i) + "]"));
    }
    return WhittakerFunction::heisenberg(sig, per);
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail(std::string("whittaker: ") + e.what());
  }
}

std::string half_json(HalfInteger h) { return h.to_string(); }

} // namespace

ScaleOverrides ScaleOverrides::parse(std::string_view text) {
  ScaleOverrides o;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail("--scale entries look like KEY=VALUE, got '" + item + "'");
    const std::string key = trim(item.substr(0, eq));
    const std::string value = trim(item.substr(eq + 1));
    auto count = [&] {
      std::size_t used = 0;
      const long v = std::stol(value, &used);
      if (used != value.size() || v < 0) throw std::invalid_argument(value);
      return v;
    };
    try {
      if (key == "D") o.D = HalfInteger::parse(value);
      else if (key == "N") o.N = count();
      else if (key == "L") o.L = static_cast<std::size_t>(count());
      else if (key == "Lgen") o.L_gen = static_cast<std::size_t>(count());
      else if (key == "slack") o.slack = HalfInteger::parse(value);
      else fail("unknown --scale key '" + key + "'");
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception&) {
      fail("bad --scale value for " + key + ": '" + value + "'");
    }
  }
  return o;
}

Scenario load_scenario(const json& doc, const ScaleOverrides& overrides,
                       std::optional<std::uint64_t> seed) {
  if (!doc.is_object()) fail("scenario must be a JSON object");
  const Signature sig = parse_algebra(doc);
  const std::uint64_t p = declared_order(doc);
  if (p < 1) fail("automorphism order must be >= 1");
  const std::uint64_t order = doc.contains("order") ? doc["order"].get<std::uint64_t>() : p;
  if (order < 1 || order % p != 0) fail("order must be a positive multiple of the automorphism order");
  auto g = parse_automorphism(doc, sig, order);
  if (g->order() != p) fail("automorphism order mismatch");

  Scale scale;
  scale.L_gen = static_cast<std::size_t>(g->order());
  const json s = doc.value("scale", json::object());
  if (!s.is_object()) fail("scale must be an object");
  if (s.contains("D")) scale.D = parse_half(s["D"], "scale.D");
  if (s.contains("N")) scale.N = parse_long(s["N"], "scale.N");
  if (s.contains("L")) scale.L = static_cast<std::size_t>(parse_long(s["L"], "scale.L"));
  if (s.contains("Lgen"))
    scale.L_gen = static_cast<std::size_t>(parse_long(s["Lgen"], "scale.Lgen"));
  if (s.contains("slack")) scale.slack_twice = parse_half(s["slack"], "scale.slack").twice;
  if (overrides.D) scale.D = *overrides.D;
  if (overrides.N) scale.N = *overrides.N;
  if (overrides.L) scale.L = *overrides.L;
  if (overrides.L_gen) scale.L_gen = *overrides.L_gen;
  if (overrides.slack) scale.slack_twice = overrides.slack->twice;
  if (scale.D.twice < 0 || scale.N < 0 || scale.L < 1 || scale.L_gen < 1 ||
      scale.slack_twice < 0)
    fail("scale: D, N and slack must be >= 0; L and Lgen must be >= 1");

  std::uint64_t seed_value = 20240601;
  if (doc.contains("seed")) seed_value = doc["seed"].get<std::uint64_t>();
  if (seed) seed_value = *seed;

  const json options = doc.value("options", json::object());
  if (!options.is_object()) fail("options must be an object");

  json effective = doc;
  effective.erase("timings");
  effective["scale"] = {{"D", half_json(scale.D)},
                        {"N", scale.N},
                        {"L", scale.L},
                        {"Lgen", scale.L_gen},
                        {"slack", HalfInteger{scale.slack_twice}.to_string()}};
  effective["seed"] = seed_value;
  effective["order"] = order;

  const unsigned threads = static_cast<unsigned>(doc.value("threads", 1L));
  return Scenario{doc.value("name", std::string("scenario")),
                  sig,
                  order,
                  parse_whittaker(doc, sig, order),
                  std::move(g),
                  scale,
                  seed_value,
                  threads == 0 ? 1u : threads,
                  options,
                  std::move(effective)};
}

Scenario load_scenario_file(const std::string& path, const ScaleOverrides& overrides,
                            std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) fail("cannot open scenario file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail("scenario file '" + path + "' is not valid JSON: " + e.what());
  }
  return load_scenario(doc, overrides, seed);
}

std::string Scenario::digest() const { return sha256_hex(effective.dump()); }

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i)
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return out.str();
}

} // namespace wcert
