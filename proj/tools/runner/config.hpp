#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "abphase/units.hpp"

namespace abphase::runner {

enum class ValueKind { real, integer, text, angle };

struct KeySpec {
  std::string key;
  ValueKind kind = ValueKind::real;
  /// Canonical Gaussian unit required in gaussian mode ("" = dimensionless).
  std::string unit;
  std::string default_value;
  std::string description;
  std::vector<std::string> choices;  // allowed values of a text key
};

struct SectionSpec {
  std::string name;
  std::vector<KeySpec> keys;
  /// Repeatable sections appear as [name.1], [name.2], ...
  bool repeatable = false;
  /// Instances written by config_template, as key overrides of the defaults.
  std::vector<std::map<std::string, std::string>> examples;
};

struct ExperimentDescriptor {
  std::string name;
  std::string summary;
  std::string relation;  // the physical relation the experiment exercises
  std::vector<SectionSpec> sections;
};

/// The six experiments, each with the common [units] and [tolerance]
/// sections included in its schema.
const std::vector<ExperimentDescriptor>& list_experiments();
const ExperimentDescriptor* find_experiment(std::string_view name);

/// A config file with every key of the experiment schema at its default.
std::string config_template(const ExperimentDescriptor& d);

/// Parsed and validated configuration. Values are stored resolved (numbers
/// evaluated, angles in radians).
class Config {
 public:
  const std::string& experiment() const { return experiment_; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t s) { seed_ = s; }
  bool natural_units() const { return natural_; }
  const Units& units() const { return units_; }

  double real(const std::string& section, const std::string& key) const;
  long long integer(const std::string& section, const std::string& key) const;
  const std::string& text(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;
  /// Instances of a repeatable section in numeric order, e.g. gauge.1, gauge.2.
  std::vector<std::string> instances(const std::string& base) const;

  /// Every resolved key as "section.key = value", sorted; for the manifest.
  std::vector<std::string> resolved() const;

  void override_real(const std::string& section, const std::string& key, double v);

 private:
  friend Config parse_config(std::string_view text);
  std::string experiment_;
  std::uint64_t seed_ = 0;
  bool natural_ = true;
  Units units_{};
  std::map<std::string, std::map<std::string, double>> reals_;
  std::map<std::string, std::map<std::string, std::string>> texts_;
};

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// Throws ParseError with the 1-based line and column of the problem.
Config parse_config(std::string_view text);

}  // namespace abphase::runner
