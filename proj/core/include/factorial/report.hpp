#ifndef FACTORIAL_REPORT_HPP
#define FACTORIAL_REPORT_HPP

// Machine-readable outputs: the versioned analysis report, screening traces,
// tidy metrics CSV and the simulation run manifest. JSON handling stays in
// the implementation file.

#include <optional>
#include <string>
#include <vector>

#include "factorial/best_arm.hpp"
#include "factorial/screening.hpp"
#include "factorial/simulation.hpp"

namespace factorial {

inline constexpr const char* kReportSchema = "factorial-screen/1";
inline constexpr const char* kLibraryVersion = "0.1.0";

// One requested causal parameter.
struct TargetSpec {
  enum class Kind { arm, contrast, custom, best_arm };

  Kind kind = Kind::arm;
  TreatmentLevel arm;                // kind == arm
  int arm_digits = 0;                // length of the parsed arm string
  FactorSet contrast;                // kind == contrast
  std::vector<double> custom;        // kind == custom
  int k0 = 0;                        // kind == best_arm
  std::optional<double> eta;         // kind == best_arm

  std::string label(int K) const;
  WeightVector weight(int K) const;  // not for best_arm

  // Accepts "arm:101", "contrast:1,2", "custom:v0,v1,...",
  // "best-arm:k0=2[,eta=0.5]".
  static TargetSpec parse(const std::string& text);
};

struct EstimateRecord {
  std::string target;
  double gamma_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::string model;   // serialized working model
  std::string method;  // plugin | rls | rls_under | rls_over
};

struct BestArmRecord {
  std::string target;
  TieReport report;
};

struct AnalysisReport {
  std::string input;
  int K = 0;
  std::int64_t units = 0;
  std::optional<std::uint64_t> seed;
  ScreeningTrace trace;
  std::vector<EstimateRecord> estimates;
  std::vector<BestArmRecord> best_arms;
};

std::string working_model_json(const WorkingModel& model);
WorkingModel working_model_from_json(const std::string& text);

std::string analysis_report_json(const AnalysisReport& report);
std::string estimates_csv(const std::vector<EstimateRecord>& records);

std::string metrics_csv(const MetricsTable& table);
std::string simulation_manifest_json(const SimulationConfig& config);

// Simulation configuration as a JSON document; see README for the schema.
SimulationConfig simulation_config_from_json(const std::string& text);
std::string simulation_config_json(const SimulationConfig& config);

}  // namespace factorial

#endif
