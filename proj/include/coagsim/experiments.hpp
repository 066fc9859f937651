// The five statistical experiments: seeded replica orchestration, internal
// hypothesis checks against declared tolerances, CSV and summary reporting.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "coagsim/config.hpp"

namespace coagsim {

struct StatReport {
  std::string experiment;
  // ordered key = value lines; every estimate carries its replica count
  // and seed range alongside
  std::vector<std::pair<std::string, std::string>> entries;
  // overall verdict: "pass", "fail" or "inconclusive" (preconditions unmet)
  std::string result = "pass";

  void put(const std::string& key, const std::string& value);
  void put(const std::string& key, const char* value);
  void put(const std::string& key, double value);
  void put(const std::string& key, bool value);
  void put_int(const std::string& key, long long value);
  const std::string* find(const std::string& key) const;
  std::string to_text() const;
  bool passed() const { return result == "pass"; }

  void gate(const std::string& key, bool ok);  // records and folds into result
  void mark_inconclusive(const std::string& why);
};

// Dispatches to E1..E5, runs the replicas (OpenMP across replicas), writes
// CSVs plus summary.txt under out_dir, and returns the report. Configuration
// violations surface as exceptions before any simulation starts.
StatReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

// Ladder used by E1 and E3: coarse to fine, finishing at the configured
// epsilon.
std::vector<double> epsilon_ladder(double epsilon);

}  // namespace coagsim
