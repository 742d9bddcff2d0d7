#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dualpath/config.hpp"
#include "dualpath/simulate.hpp"

namespace dualpath {

struct CheckOutcome {
  bool passed = false;
  std::string detail;  ///< measured deviations; deterministic text
};

/// Lazily shared state for one validation run: the table1 / probabilistic
/// end-to-end simulation is used by several checks.
class ValidationContext {
 public:
  explicit ValidationContext(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  /// config.trials, or 100000 when it is 0.
  std::size_t trials() const;
  /// End-to-end simulation at config.params, threshold config.params.sir_threshold.
  const SimulationSummary& end_to_end();

 private:
  ExperimentConfig config_;
  std::optional<SimulationSummary> end_to_end_;
};

struct ValidationCheck {
  std::string id;
  std::string title;
  std::function<CheckOutcome(ValidationContext&)> run;
};

/// The analytic-vs-Monte-Carlo suite in a fixed order.
const std::vector<ValidationCheck>& validation_checks();

/// Runs one check by id; nullopt for an unknown id.
std::optional<CheckOutcome> run_check(std::string_view id, ValidationContext& context);

/// "PASS <id> <title>: <detail>" or "FAIL ...".
std::string format_check_line(const ValidationCheck& check, const CheckOutcome& outcome);

struct ValidationReport {
  std::vector<std::string> lines;
  bool passed = true;

  std::string text() const;  ///< lines joined with '\n', trailing newline
};

/// Runs every check. Byte-identical text for a fixed config regardless of the
/// worker count.
ValidationReport run_validate(const ExperimentConfig& config);

}  // namespace dualpath
