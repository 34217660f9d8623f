#pragma once

#include "wcert/certify.hpp"

#include "json.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace wcert {

using json = nlohmann::json;

/// Thrown for scenario files that do not validate.
struct ScenarioError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ScaleOverrides {
  std::optional<HalfInteger> D;
  std::optional<long> N;
  std::optional<std::size_t> L;
  std::optional<std::size_t> L_gen;
  std::optional<HalfInteger> slack;

  /// `D=1,N=3,L=6,Lgen=2,slack=1`
  static ScaleOverrides parse(std::string_view text);
};

struct Scenario {
  std::string name;
  Signature sig;
  std::uint64_t order = 1;
  WhittakerFunction whittaker;
  std::shared_ptr<const Automorphism> g;
  Scale scale;
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
  json options;
  /// Input with defaults and overrides applied; hashed for the digest.
  json effective;

  ModuleHandle module() const { return ModuleHandle(whittaker); }
  CyclicAction action() const { return CyclicAction(g); }
  std::string digest() const;
};

Scenario load_scenario(const json& doc, const ScaleOverrides& overrides = {},
                       std::optional<std::uint64_t> seed = std::nullopt);
Scenario load_scenario_file(const std::string& path, const ScaleOverrides& overrides = {},
                            std::optional<std::uint64_t> seed = std::nullopt);

std::string sha256_hex(std::string_view data);

} // namespace wcert
