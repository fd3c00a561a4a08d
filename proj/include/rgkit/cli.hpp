#pragma once

// Batch front end: one JSON config per experiment, flags override it.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "rgkit/errors.hpp"

namespace rgkit::cli {

inline constexpr char kVersion[] = "1.0.0";

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kConfigError = 2,
  kBudgetExhausted = 3,
  kInvariantFailure = 4,
};

// A config problem; `field` is the dotted path of the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::string const& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  std::string const& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ChainSpec {
  std::string kind;  // derived | abelian-powers | homs
  std::uint32_t prime = 2;
  std::uint64_t base = 2;
  std::size_t depth = 0;  // homs: levels used, at most the number of lines
  std::string homs;       // homs: one homomorphism per line
};

struct Budgets {
  std::size_t max_cosets = 1'000'000;
  std::size_t effort = 2000;
  std::size_t tietze_passes = 100000;
};

struct Outputs {
  std::string json;
  std::string csv;
  std::string transversal;
  std::string split;
};

struct ExperimentConfig {
  std::string task;
  std::string presentation;  // text in the presentation grammar
  ChainSpec chain;
  Budgets budgets;
  Outputs outputs;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();

  // Everything that affects results: output paths are left out.
  nlohmann::json canonical() const;
  // FNV-1a of the canonical dump, as 16 hex digits.
  std::string hash() const;
};

inline std::vector<std::string> const& task_names() {
  static std::vector<std::string> const names = {"rank-gradient", "split-search", "weiss",
                                                 "lueck", "bg-probe", "freeprod-check"};
  return names;
}

// Validates and resolves a config. File references (`presentation_file`,
// `chain.homs_file`, `params.matrix_file`) are read relative to `base_dir`.
// The default coset cap comes from RGKIT_BUDGET when the config has none.
// Throws ConfigError.
ExperimentConfig load_config(nlohmann::json const& j, std::filesystem::path const& base_dir = {});

struct RunOutcome {
  int exit_code = kOk;
  nlohmann::ordered_json report;  // the full envelope
  std::string csv;                // empty when the task has no CSV
};

// Runs the task and writes the configured output files. Library errors
// propagate; `main_entry` maps them to exit codes.
RunOutcome run(ExperimentConfig const& config);

// Dry run: validates and estimates sizes without building anything.
nlohmann::ordered_json verify(ExperimentConfig const& config);

// Machine-readable error record.
nlohmann::ordered_json error_record(int exit_code, std::string const& kind,
                                    std::string const& message, std::string const& field = {});

// The command line: `rgkit <task|verify> [--config FILE] [overrides...]`.
int main_entry(int argc, char const* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rgkit::cli
