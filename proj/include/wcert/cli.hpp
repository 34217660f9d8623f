#pragma once

#include "wcert/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace wcert {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFail = 2;

struct CommandResult {
  int exit_code = kExitPass;
  std::string text;
  json report;
};

const std::vector<std::string>& command_names();

/// Runs one command on a loaded scenario. Throws on invalid input.
CommandResult run_command(const std::string& command, const Scenario& scenario);

/// Whole front end: argument parsing, scenario loading, output, exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Serializers shared with the Python module.
json to_json(const WhittakerFunction& f, std::uint64_t order);
json to_json(const DistinctnessCertificate& c, const Signature& sig, std::uint64_t order);
json to_json(const SeparatorElement& s, const Signature& sig, std::uint64_t order);
json to_json(const CyclicityCertificate& c, const Signature& sig, std::uint64_t order);
json to_json(const VirasoroReport& r, std::uint64_t order);
json to_json(const DeltaLemmaReport& r);
json to_json(const ChargeDecomposition& d, const Signature& sig, std::uint64_t order);
json to_json(const CompatibilityReport& r);
json to_json(const PipelineReport& r, const Signature& sig, std::uint64_t order);
json to_json(const Scale& s);

} // namespace wcert
