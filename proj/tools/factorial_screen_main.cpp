// factorial-screen: design-based analysis of 2^K factorial experiments.
//
//   factorial-screen analyze  --input data.csv [options]
//   factorial-screen simulate --config sim.json [options]
//
// Exit codes: 0 success, 2 input error, 3 inference infeasible under the
// given replication, 4 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "factorial/best_arm.hpp"
#include "factorial/dataset_io.hpp"
#include "factorial/errors.hpp"
#include "factorial/report.hpp"
#include "factorial/screening.hpp"
#include "factorial/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInternal = 4;

struct AnalyzeOptions {
  std::string input;
  int levels = 2;
  std::string alpha = "0.05";
  std::string heredity = "strong";
  std::string s_step = "t";
  std::string strategy = "full";
  std::vector<std::string> targets;
  double alpha_ci = 0.05;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string format = "json";
};

struct SimulateOptions {
  std::string config_path;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

std::vector<double> parse_alpha_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  if (out.empty()) throw std::invalid_argument("--alpha needs at least one value");
  return out;
}

factorial::ScreeningConfig build_screening_config(const AnalyzeOptions& opt, int K) {
  factorial::ScreeningConfig sc;
  sc.max_level = std::min(opt.levels, K);
  sc.alphas = parse_alpha_list(opt.alpha);
  if (opt.heredity == "weak")
    sc.heredity = factorial::Heredity::weak;
  else if (opt.heredity == "strong")
    sc.heredity = factorial::Heredity::strong;
  else
    throw std::invalid_argument("--heredity must be weak or strong");

  if (opt.s_step == "t") {
    sc.s_step = factorial::SStep::bonferroni_t;
  } else if (opt.s_step.rfind("lasso", 0) == 0) {
    sc.s_step = factorial::SStep::lasso;
    if (opt.s_step.size() > 5) {
      if (opt.s_step[5] != ':')
        throw std::invalid_argument("--s-step must be t, lasso or lasso:<lambda>");
      sc.lasso_lambda = std::stod(opt.s_step.substr(6));
    }
  } else {
    throw std::invalid_argument("--s-step must be t, lasso or lasso:<lambda>");
  }

  if (opt.strategy == "full") {
    sc.strategy = factorial::Strategy::full;
  } else if (opt.strategy.rfind("under:", 0) == 0) {
    sc.strategy = factorial::Strategy::under;
    sc.pivot_level = std::stoi(opt.strategy.substr(6));
  } else if (opt.strategy.rfind("over:", 0) == 0) {
    sc.strategy = factorial::Strategy::over;
    sc.pivot_level = std::stoi(opt.strategy.substr(5));
  } else {
    throw std::invalid_argument("--strategy must be full, under:<d> or over:<d>");
  }
  sc.alpha_ci = opt.alpha_ci;
  return sc;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw factorial::Error("cannot open output file: " + path);
  out << text;
}

int run_analyze(const AnalyzeOptions& opt) {
  const factorial::FactorialDataset dataset = factorial::read_dataset_csv(opt.input);
  if (dataset.unit_count() == 0)
    throw factorial::ParseError("dataset has no observations", 0);
  const int K = dataset.K;
  const factorial::ArmTable arms = factorial::summarize(dataset);

  const factorial::ScreeningConfig sc = build_screening_config(opt, K);

  std::vector<factorial::TargetSpec> targets;
  for (const std::string& text : opt.targets) {
    factorial::TargetSpec spec = factorial::TargetSpec::parse(text);
    if (spec.kind == factorial::TargetSpec::Kind::custom &&
        spec.custom.size() != arms.arm_count())
      throw std::invalid_argument("custom target needs " +
                                  std::to_string(arms.arm_count()) + " values");
    if (spec.kind == factorial::TargetSpec::Kind::arm && spec.arm_digits != K)
      throw std::invalid_argument("arm target must have " + std::to_string(K) + " digits");
    if (spec.kind == factorial::TargetSpec::Kind::contrast)
      for (int f : spec.contrast.indices())
        if (f > K)
          throw std::invalid_argument("contrast target references factor " +
                                      std::to_string(f) + " > K");
    if (spec.kind == factorial::TargetSpec::Kind::best_arm && spec.k0 > K)
      throw std::invalid_argument("best-arm k0 exceeds K");
    targets.push_back(std::move(spec));
  }
  if (targets.empty()) {
    factorial::TargetSpec spec;
    spec.kind = factorial::TargetSpec::Kind::arm;
    spec.arm = factorial::treatment_from_row(arms.arm_count() - 1, K);
    targets.push_back(spec);
  }

  const factorial::ScreeningTrace trace = factorial::forward_screen(arms, sc);
  const std::string model_text = factorial::working_model_json(trace.final_model);
  std::string rls_method = "rls";
  if (sc.strategy == factorial::Strategy::under) rls_method = "rls_under";
  if (sc.strategy == factorial::Strategy::over) rls_method = "rls_over";

  factorial::AnalysisReport report;
  report.input = opt.input;
  report.K = K;
  report.units = static_cast<std::int64_t>(dataset.unit_count());
  report.seed = opt.seed;
  report.trace = trace;

  for (const factorial::TargetSpec& spec : targets) {
    if (spec.kind == factorial::TargetSpec::Kind::best_arm) {
      factorial::BestArmConfig bc;
      bc.constraint_k0 = spec.k0;
      bc.eta = spec.eta;
      bc.alpha_ci = sc.alpha_ci;
      factorial::BestArmRecord rec;
      rec.target = spec.label(K);
      rec.report = factorial::best_arm_estimate(arms, trace.final_model, bc);
      report.best_arms.push_back(std::move(rec));
      continue;
    }
    const factorial::WeightVector f = spec.weight(K);
    const factorial::GammaEstimate plugin =
        factorial::plug_in_estimate(f, arms, sc.alpha_ci);
    const factorial::GammaEstimate rls =
        factorial::rls_estimate(f, trace.final_model, arms, sc.alpha_ci);
    report.estimates.push_back({spec.label(K), plugin.gamma_hat, plugin.se,
                                plugin.ci_lo, plugin.ci_hi, model_text, "plugin"});
    report.estimates.push_back({spec.label(K), rls.gamma_hat, rls.se, rls.ci_lo,
                                rls.ci_hi, model_text, rls_method});
  }

  if (opt.format == "json")
    write_text(opt.output, factorial::analysis_report_json(report));
  else if (opt.format == "csv")
    write_text(opt.output, factorial::estimates_csv(report.estimates));
  else
    throw std::invalid_argument("--format must be json or csv");
  return kExitOk;
}

int run_simulate(const SimulateOptions& opt) {
  std::ifstream in(opt.config_path);
  if (!in) throw factorial::ParseError("cannot open config file: " + opt.config_path, 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  factorial::SimulationConfig config = factorial::simulation_config_from_json(buffer.str());
  if (opt.seed) {
    config.seed = *opt.seed;
  } else if (config.seed == 0) {
    std::random_device rd;
    config.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "no seed given; using " << config.seed << " (recorded in manifest)\n";
  }
  if (opt.threads) config.threads = *opt.threads;

  const factorial::MetricsTable table = factorial::run_monte_carlo(config);

  namespace fs = std::filesystem;
  fs::create_directories(opt.output_dir);
  const fs::path metrics_path = fs::path(opt.output_dir) / "metrics.csv";
  const fs::path manifest_path = fs::path(opt.output_dir) / "manifest.json";
  write_text(metrics_path.string(), factorial::metrics_csv(table));
  write_text(manifest_path.string(), factorial::simulation_manifest_json(config));
  std::cout << "wrote " << metrics_path.string() << " and " << manifest_path.string()
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design-based screening and estimation for 2^K factorial experiments"};
  app.require_subcommand(1);

  AnalyzeOptions analyze_opt;
  CLI::App* analyze = app.add_subcommand("analyze", "Screen and estimate from a CSV dataset");
  analyze->add_option("--input", analyze_opt.input, "Dataset CSV (header y,z1,...,zK)")
      ->required();
  analyze->add_option("--levels", analyze_opt.levels, "Max interaction depth D");
  analyze->add_option("--alpha", analyze_opt.alpha,
                      "Per-level significance (scalar or comma list)");
  analyze->add_option("--heredity", analyze_opt.heredity, "weak|strong");
  analyze->add_option("--s-step", analyze_opt.s_step, "t|lasso|lasso:<lambda>");
  analyze->add_option("--strategy", analyze_opt.strategy, "full|under:<d>|over:<d>");
  analyze->add_option("--target", analyze_opt.targets,
                      "arm:101 | contrast:1,2 | custom:v0,v1,... | best-arm:k0=2[,eta=...]");
  analyze->add_option("--alpha-ci", analyze_opt.alpha_ci, "CI level alpha");
  analyze->add_option("--seed", analyze_opt.seed, "Recorded in the report");
  analyze->add_option("--output", analyze_opt.output, "Output path (default stdout)");
  analyze->add_option("--format", analyze_opt.format, "json|csv");

  SimulateOptions simulate_opt;
  CLI::App* simulate = app.add_subcommand("simulate", "Run the Monte Carlo harness");
  simulate->add_option("--config", simulate_opt.config_path, "Simulation config JSON")
      ->required();
  simulate->add_option("--output-dir", simulate_opt.output_dir,
                       "Directory for metrics.csv and manifest.json");
  simulate->add_option("--seed", simulate_opt.seed, "Overrides the config seed");
  simulate->add_option("--threads", simulate_opt.threads, "Worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*analyze) return run_analyze(analyze_opt);
    if (*simulate) return run_simulate(simulate_opt);
    return kExitInput;
  } catch (const factorial::ReplicationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const factorial::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
