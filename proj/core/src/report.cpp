#include "factorial/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "factorial/errors.hpp"

namespace factorial {

using nlohmann::json;

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json model_to_json(const WorkingModel& model) {
  json out = json::array();
  for (const auto& indices : model.to_index_lists()) out.push_back(indices);
  return out;
}

WorkingModel model_from_json(const json& j) {
  std::vector<std::vector<int>> lists;
  for (const auto& entry : j) lists.push_back(entry.get<std::vector<int>>());
  return WorkingModel::from_index_lists(lists);
}

json trace_to_json(const ScreeningTrace& trace) {
  json levels = json::array();
  for (const LevelTrace& level : trace.levels) {
    json candidates = json::array();
    for (const CandidateRecord& rec : level.candidates) {
      json c;
      c["set"] = rec.set.indices();
      c["selected"] = rec.selected;
      c["tested"] = rec.tested;
      if (rec.tested) {
        c["tau_hat"] = rec.tau_hat;
        c["se"] = rec.se;
        c["threshold"] = rec.threshold;
      }
      candidates.push_back(std::move(c));
    }
    json selected = json::array();
    for (FactorSet s : level.selected) selected.push_back(s.indices());
    levels.push_back({{"level", level.level},
                      {"candidates", std::move(candidates)},
                      {"selected", std::move(selected)}});
  }
  return {{"levels", std::move(levels)},
          {"final_model", model_to_json(trace.final_model)}};
}

json grid_point_to_json(const GridPoint& p) {
  return {{"n0", p.n0}, {"effect_size", p.effect_size}};
}

const char* dgp_name(Dgp dgp) {
  switch (dgp) {
    case Dgp::shifted_exponential: return "shifted_exponential";
    case Dgp::constant: return "constant";
    case Dgp::sharp_exponential: return "sharp_exponential";
  }
  return "unknown";
}

Dgp dgp_from_name(const std::string& name) {
  if (name == "shifted_exponential") return Dgp::shifted_exponential;
  if (name == "constant") return Dgp::constant;
  if (name == "sharp_exponential") return Dgp::sharp_exponential;
  throw std::invalid_argument("unknown dgp: " + name);
}

json screening_to_json(const ScreeningConfig& sc) {
  json out;
  out["levels"] = sc.max_level;
  out["alpha"] = sc.alphas;
  out["heredity"] = sc.heredity == Heredity::weak ? "weak" : "strong";
  out["s_step"] = sc.s_step == SStep::bonferroni_t ? "t" : "lasso";
  if (sc.lasso_lambda) out["lambda"] = *sc.lasso_lambda;
  switch (sc.strategy) {
    case Strategy::full: out["strategy"] = "full"; break;
    case Strategy::under: out["strategy"] = "under:" + std::to_string(sc.pivot_level); break;
    case Strategy::over: out["strategy"] = "over:" + std::to_string(sc.pivot_level); break;
  }
  out["alpha_ci"] = sc.alpha_ci;
  return out;
}

ScreeningConfig screening_from_json(const json& j) {
  ScreeningConfig sc;
  if (j.contains("levels")) sc.max_level = j.at("levels").get<int>();
  if (j.contains("alpha")) {
    if (j.at("alpha").is_array())
      sc.alphas = j.at("alpha").get<std::vector<double>>();
    else
      sc.alphas = {j.at("alpha").get<double>()};
  }
  if (j.contains("heredity")) {
    const std::string h = j.at("heredity").get<std::string>();
    if (h == "weak")
      sc.heredity = Heredity::weak;
    else if (h == "strong")
      sc.heredity = Heredity::strong;
    else
      throw std::invalid_argument("heredity must be weak or strong, got " + h);
  }
  if (j.contains("s_step")) {
    const std::string s = j.at("s_step").get<std::string>();
    if (s == "t")
      sc.s_step = SStep::bonferroni_t;
    else if (s == "lasso")
      sc.s_step = SStep::lasso;
    else
      throw std::invalid_argument("s_step must be t or lasso, got " + s);
  }
  if (j.contains("lambda")) sc.lasso_lambda = j.at("lambda").get<double>();
  if (j.contains("strategy")) {
    const std::string s = j.at("strategy").get<std::string>();
    if (s == "full") {
      sc.strategy = Strategy::full;
    } else if (s.rfind("under:", 0) == 0) {
      sc.strategy = Strategy::under;
      sc.pivot_level = std::stoi(s.substr(6));
    } else if (s.rfind("over:", 0) == 0) {
      sc.strategy = Strategy::over;
      sc.pivot_level = std::stoi(s.substr(5));
    } else {
      throw std::invalid_argument("strategy must be full, under:d or over:d, got " + s);
    }
  }
  if (j.contains("alpha_ci")) sc.alpha_ci = j.at("alpha_ci").get<double>();
  return sc;
}

}  // namespace

std::string TargetSpec::label(int K) const {
  switch (kind) {
    case Kind::arm: return "arm:" + arm_string(arm, K);
    case Kind::contrast: {
      std::string out = "contrast:";
      bool first = true;
      for (int f : contrast.indices()) {
        if (!first) out += ",";
        out += std::to_string(f);
        first = false;
      }
      return out;
    }
    case Kind::custom: return "custom";
    case Kind::best_arm:
      return "best-arm:k0=" + std::to_string(k0) +
             (eta ? ",eta=" + format_value(*eta) : std::string());
  }
  return "unknown";
}

WeightVector TargetSpec::weight(int K) const {
  switch (kind) {
    case Kind::arm: return WeightVector::arm(K, arm);
    case Kind::contrast: return WeightVector::contrast(K, contrast);
    case Kind::custom: return WeightVector::custom(K, custom);
    case Kind::best_arm: break;
  }
  throw std::invalid_argument("best-arm targets have no single weight vector");
}

TargetSpec TargetSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("target must look like kind:args, got \"" + text + "\"");
  const std::string kind = text.substr(0, colon);
  const std::string args = text.substr(colon + 1);

  TargetSpec spec;
  if (kind == "arm") {
    spec.kind = Kind::arm;
    spec.arm = parse_arm_string(args);
    spec.arm_digits = static_cast<int>(args.size());
    return spec;
  }
  if (kind == "contrast") {
    spec.kind = Kind::contrast;
    std::vector<int> indices;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ','))
      indices.push_back(std::stoi(tok));
    if (indices.empty())
      throw std::invalid_argument("contrast target needs factor indices");
    spec.contrast = FactorSet::from_indices(indices);
    return spec;
  }
  if (kind == "custom") {
    spec.kind = Kind::custom;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) spec.custom.push_back(std::stod(tok));
    if (spec.custom.empty())
      throw std::invalid_argument("custom target needs 2^K values");
    return spec;
  }
  if (kind == "best-arm" || kind == "best_arm") {
    spec.kind = Kind::best_arm;
    std::stringstream ss(args);
    std::string tok;
    bool have_k0 = false;
    while (std::getline(ss, tok, ',')) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("best-arm options look like k0=2,eta=0.5");
      const std::string key = tok.substr(0, eq);
      const std::string value = tok.substr(eq + 1);
      if (key == "k0") {
        spec.k0 = std::stoi(value);
        have_k0 = true;
      } else if (key == "eta") {
        if (value != "auto") spec.eta = std::stod(value);
      } else {
        throw std::invalid_argument("unknown best-arm option: " + key);
      }
    }
    if (!have_k0) throw std::invalid_argument("best-arm target needs k0=<int>");
    return spec;
  }
  throw std::invalid_argument("unknown target kind: " + kind);
}

std::string working_model_json(const WorkingModel& model) {
  return model_to_json(model).dump();
}

WorkingModel working_model_from_json(const std::string& text) {
  return model_from_json(json::parse(text));
}

std::string analysis_report_json(const AnalysisReport& report) {
  json out;
  out["schema"] = kReportSchema;
  out["input"] = report.input;
  out["factors"] = report.K;
  out["units"] = report.units;
  if (report.seed) out["seed"] = *report.seed;
  out["screening"] = trace_to_json(report.trace);

  json estimates = json::array();
  for (const EstimateRecord& rec : report.estimates) {
    estimates.push_back({{"target", rec.target},
                         {"gamma_hat", rec.gamma_hat},
                         {"se", rec.se},
                         {"ci_lo", rec.ci_lo},
                         {"ci_hi", rec.ci_hi},
                         {"model", json::parse(rec.model)},
                         {"method", rec.method}});
  }
  out["estimates"] = std::move(estimates);

  json best = json::array();
  for (const BestArmRecord& rec : report.best_arms) {
    json ties = json::array();
    for (std::size_t l : rec.report.tie_indices)
      ties.push_back(rec.report.labels[l]);
    json gammas = json::array();
    for (std::size_t l = 0; l < rec.report.gamma_hats.size(); ++l)
      gammas.push_back({{"label", rec.report.labels[l]},
                        {"gamma_hat", rec.report.gamma_hats[l]},
                        {"se", rec.report.ses[l]}});
    best.push_back({{"target", rec.target},
                    {"eta", rec.report.eta},
                    {"candidates", std::move(gammas)},
                    {"tie_set", std::move(ties)},
                    {"best", {{"gamma_hat", rec.report.best.gamma_hat},
                              {"se", rec.report.best.se},
                              {"ci_lo", rec.report.best.ci_lo},
                              {"ci_hi", rec.report.best.ci_hi}}}});
  }
  out["best_arm"] = std::move(best);
  return out.dump(2);
}

std::string estimates_csv(const std::vector<EstimateRecord>& records) {
  std::string out = "target,method,model,gamma_hat,se,ci_lo,ci_hi\n";
  for (const EstimateRecord& rec : records) {
    out += rec.target + "," + rec.method + ",\"" + rec.model + "\"," +
           format_value(rec.gamma_hat) + "," + format_value(rec.se) + "," +
           format_value(rec.ci_lo) + "," + format_value(rec.ci_hi) + "\n";
  }
  return out;
}

std::string metrics_csv(const MetricsTable& table) {
  std::string out = "n0,effect_size,method,estimator,metric,value,mc_se\n";
  for (const MetricRow& row : table.rows) {
    out += std::to_string(row.point.n0) + "," + format_value(row.point.effect_size) + "," +
           row.method + "," + row.estimator + "," + row.metric + "," +
           format_value(row.value) + "," + format_value(row.mc_se) + "\n";
  }
  return out;
}

std::string simulation_config_json(const SimulationConfig& config) {
  json out;
  out["K"] = config.K;
  out["replications"] = config.replications;
  out["seed"] = config.seed;
  json grid = json::array();
  for (const GridPoint& p : config.grid) grid.push_back(grid_point_to_json(p));
  out["grid"] = std::move(grid);
  json effects = json::array();
  for (FactorSet s : config.effect_sets) effects.push_back(s.indices());
  out["effects"] = std::move(effects);
  out["intercept"] = config.intercept;
  out["dgp"] = dgp_name(config.dgp);
  out["screening"] = screening_to_json(config.screening);
  json methods = json::array();
  for (ScreenMethod m : config.methods) methods.push_back(to_string(m));
  out["methods"] = std::move(methods);
  if (config.target) out["target_values"] = config.target->values;
  out["alpha_ci"] = config.alpha_ci;
  out["threads"] = config.threads;
  return out.dump(2);
}

SimulationConfig simulation_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("simulation config: ") + err.what(), 0);
  }
  SimulationConfig config;
  try {
    if (j.contains("K")) config.K = j.at("K").get<int>();
    if (j.contains("replications")) config.replications = j.at("replications").get<int>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("grid")) {
      config.grid.clear();
      for (const auto& p : j.at("grid"))
        config.grid.push_back(
            {p.at("n0").get<std::int64_t>(), p.at("effect_size").get<double>()});
    }
    if (j.contains("effects")) {
      config.effect_sets.clear();
      if (j.at("effects").is_string()) {
        if (j.at("effects").get<std::string>() != "first_five")
          throw std::invalid_argument("effects must be a list or \"first_five\"");
        config.effect_sets = first_five_effect_sets(config.K);
      } else {
        for (const auto& entry : j.at("effects")) {
          const auto indices = entry.get<std::vector<int>>();
          config.effect_sets.push_back(FactorSet::from_indices(indices));
        }
      }
    }
    if (j.contains("intercept")) config.intercept = j.at("intercept").get<double>();
    if (j.contains("dgp")) config.dgp = dgp_from_name(j.at("dgp").get<std::string>());
    if (j.contains("screening")) config.screening = screening_from_json(j.at("screening"));
    if (j.contains("methods")) {
      config.methods.clear();
      for (const auto& m : j.at("methods"))
        config.methods.push_back(screen_method_from_string(m.get<std::string>()));
    }
    if (j.contains("target")) {
      const TargetSpec spec = TargetSpec::parse(j.at("target").get<std::string>());
      config.target = spec.weight(config.K);
    } else if (j.contains("target_values")) {
      config.target =
          WeightVector::custom(config.K, j.at("target_values").get<std::vector<double>>());
    }
    if (j.contains("alpha_ci")) config.alpha_ci = j.at("alpha_ci").get<double>();
    if (j.contains("threads")) config.threads = j.at("threads").get<int>();
  } catch (const json::exception& err) {
    throw ParseError(std::string("simulation config: ") + err.what(), 0);
  }
  return config;
}

std::string simulation_manifest_json(const SimulationConfig& config) {
  json out;
  out["schema"] = kReportSchema;
  out["command"] = "simulate";
  out["seed"] = config.seed;
  out["config"] = json::parse(simulation_config_json(config));
  out["versions"] = {{"factorial_screen", kLibraryVersion},
                     {"metrics_format", 1}};
  out["notes"] = {
      "replication grid and effect sizes are library defaults unless overridden",
      "per-replicate substreams derive from (seed, grid point, replicate)"};
  return out.dump(2);
}

}  // namespace factorial
