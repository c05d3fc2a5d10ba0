#include "factorial/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "factorial/errors.hpp"
#include "factorial/rng.hpp"
#include "factorial/stats.hpp"

namespace factorial {

ScienceTable::ScienceTable(int K, std::int64_t N, std::vector<double> outcomes)
    : K_(K), N_(N), outcomes_(std::move(outcomes)) {
  if (K < 1 || K > kMaxFactors) throw std::invalid_argument("ScienceTable: bad K");
  if (N < 1) throw std::invalid_argument("ScienceTable: need at least one unit");
  if (outcomes_.size() != static_cast<std::size_t>(N) * arm_count())
    throw std::invalid_argument("ScienceTable: outcome matrix must be N x 2^K");
}

std::vector<double> ScienceTable::column_means() const {
  const std::size_t Q = arm_count();
  std::vector<long double> acc(Q, 0.0L);
  for (std::int64_t i = 0; i < N_; ++i)
    for (std::size_t r = 0; r < Q; ++r) acc[r] += outcome(i, r);
  std::vector<double> out(Q);
  for (std::size_t r = 0; r < Q; ++r)
    out[r] = static_cast<double>(acc[r] / static_cast<long double>(N_));
  return out;
}

std::vector<double> ScienceTable::covariance() const {
  const std::size_t Q = arm_count();
  const std::vector<double> mean = column_means();
  std::vector<long double> acc(Q * Q, 0.0L);
  std::vector<double> centered(Q);
  for (std::int64_t i = 0; i < N_; ++i) {
    for (std::size_t r = 0; r < Q; ++r) centered[r] = outcome(i, r) - mean[r];
    for (std::size_t r = 0; r < Q; ++r)
      for (std::size_t c = r; c < Q; ++c) acc[r * Q + c] += centered[r] * centered[c];
  }
  std::vector<double> out(Q * Q);
  const long double denom = static_cast<long double>(N_ - 1);
  for (std::size_t r = 0; r < Q; ++r)
    for (std::size_t c = r; c < Q; ++c) {
      const double v = static_cast<double>(acc[r * Q + c] / denom);
      out[r * Q + c] = v;
      out[c * Q + r] = v;
    }
  return out;
}

std::vector<double> ScienceTable::true_effects() const {
  return effect_transform(column_means(), K_);
}

double ScienceTable::weighted_mean(const WeightVector& f) const {
  if (f.K != K_) throw std::invalid_argument("weighted_mean: factor count mismatch");
  const std::vector<double> mean = column_means();
  double out = 0.0;
  for (std::size_t r = 0; r < mean.size(); ++r) out += f.values[r] * mean[r];
  return out;
}

std::int64_t DesignSpec::total() const {
  std::int64_t n = 0;
  for (std::int64_t c : counts) n += c;
  return n;
}

DesignSpec uniform_design(int K, std::int64_t per_arm) {
  if (per_arm < 0) throw std::invalid_argument("uniform_design: negative count");
  DesignSpec d;
  d.counts.assign(std::size_t{1} << K, per_arm);
  return d;
}

std::vector<double> mu_from_effects(std::span<const std::pair<FactorSet, double>> effects,
                                    int K) {
  const std::size_t Q = std::size_t{1} << K;
  std::vector<double> tau(Q, 0.0);
  std::size_t pos = 0;
  for (FactorSet s : all_subsets(K)) {
    for (const auto& [set, value] : effects)
      if (set == s) tau[pos] += value;
    ++pos;
  }
  return inverse_effect_transform(tau, K);
}

ScienceTable gen_science_table(std::span<const double> mu, std::int64_t N, Dgp dgp,
                               std::mt19937_64& rng) {
  const std::size_t Q = mu.size();
  int K = 0;
  while ((std::size_t{1} << K) < Q) ++K;
  if ((std::size_t{1} << K) != Q) throw std::invalid_argument("mu length must be 2^K");

  std::vector<double> outcomes(static_cast<std::size_t>(N) * Q);
  for (std::int64_t i = 0; i < N; ++i) {
    double* row = outcomes.data() + static_cast<std::size_t>(i) * Q;
    switch (dgp) {
      case Dgp::shifted_exponential:
        for (std::size_t r = 0; r < Q; ++r) row[r] = mu[r] + exponential1(rng) - 1.0;
        break;
      case Dgp::constant:
        for (std::size_t r = 0; r < Q; ++r) row[r] = mu[r];
        break;
      case Dgp::sharp_exponential: {
        const double noise = exponential1(rng) - 1.0;
        for (std::size_t r = 0; r < Q; ++r) row[r] = mu[r] + noise;
        break;
      }
    }
  }
  return ScienceTable(K, N, std::move(outcomes));
}

std::vector<TreatmentLevel> assign(const DesignSpec& design, int K, std::mt19937_64& rng) {
  if (design.counts.size() != (std::size_t{1} << K))
    throw std::invalid_argument("assign: counts must cover all 2^K arms");
  std::vector<TreatmentLevel> z;
  z.reserve(static_cast<std::size_t>(design.total()));
  for (std::size_t r = 0; r < design.counts.size(); ++r) {
    if (design.counts[r] < 0) throw std::invalid_argument("assign: negative count");
    for (std::int64_t c = 0; c < design.counts[r]; ++c)
      z.push_back(treatment_from_row(r, K));
  }
  shuffle_values(z, rng);
  return z;
}

FactorialDataset reveal(const ScienceTable& science, std::span<const TreatmentLevel> z) {
  if (z.size() != static_cast<std::size_t>(science.unit_count()))
    throw std::invalid_argument("reveal: assignment length must equal unit count");
  FactorialDataset data;
  data.K = science.factor_count();
  data.z.assign(z.begin(), z.end());
  data.y.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    data.y[i] = science.outcome(static_cast<std::int64_t>(i), row_index(z[i], data.K));
  return data;
}

namespace {

std::uint64_t multiset_permutation_count(const std::vector<std::int64_t>& counts) {
  // Product of binomial coefficients C(running total, count); throws past cap.
  std::uint64_t total = 0;
  long double count = 1.0L;
  for (std::int64_t c : counts) {
    for (std::int64_t j = 1; j <= c; ++j) {
      ++total;
      count *= static_cast<long double>(total);
      count /= static_cast<long double>(j);
      if (count > 2.0L * kMaxEnumeratedAssignments)
        throw std::invalid_argument("enumerate_assignments: instance too large");
    }
  }
  const std::uint64_t rounded = static_cast<std::uint64_t>(count + 0.5L);
  if (rounded > kMaxEnumeratedAssignments)
    throw std::invalid_argument("enumerate_assignments: instance too large");
  return rounded;
}

struct EnumerationAccumulator {
  std::size_t Q = 0;
  std::uint64_t leaves = 0;
  std::vector<long double> sum_means;
  std::vector<long double> sum_outer;
  std::vector<long double> sum_vhat;
  std::vector<std::vector<long double>> sum_effects;
};

void visit_assignment(const ScienceTable& science, std::span<const WorkingModel> models,
                      const std::vector<std::size_t>& arm_of_unit,
                      EnumerationAccumulator& acc) {
  const std::size_t Q = acc.Q;
  const int K = science.factor_count();
  std::vector<double> n(Q, 0.0), mean(Q, 0.0), m2(Q, 0.0);
  for (std::size_t i = 0; i < arm_of_unit.size(); ++i) {
    const std::size_t r = arm_of_unit[i];
    const double y = science.outcome(static_cast<std::int64_t>(i), r);
    n[r] += 1.0;
    const double delta = y - mean[r];
    mean[r] += delta / n[r];
    m2[r] += delta * (y - mean[r]);
  }
  for (std::size_t r = 0; r < Q; ++r) {
    acc.sum_means[r] += mean[r];
    if (n[r] >= 2.0) acc.sum_vhat[r] += m2[r] / (n[r] - 1.0) / n[r];
  }
  for (std::size_t r = 0; r < Q; ++r)
    for (std::size_t c = r; c < Q; ++c) acc.sum_outer[r * Q + c] += mean[r] * mean[c];

  if (!models.empty()) {
    const std::vector<double> effects = effect_transform(mean, K);
    std::vector<std::uint32_t> position(Q);
    std::size_t pos = 0;
    for (FactorSet s : all_subsets(K)) position[s.mask] = static_cast<std::uint32_t>(pos++);
    for (std::size_t m = 0; m < models.size(); ++m) {
      const auto& sets = models[m].sets();
      for (std::size_t j = 0; j < sets.size(); ++j)
        acc.sum_effects[m][j] += effects[position[sets[j].mask]];
    }
  }
  ++acc.leaves;
}

void enumerate_recursive(const ScienceTable& science, std::span<const WorkingModel> models,
                         std::vector<std::int64_t>& remaining,
                         std::vector<std::size_t>& arm_of_unit, std::size_t unit,
                         EnumerationAccumulator& acc) {
  if (unit == arm_of_unit.size()) {
    visit_assignment(science, models, arm_of_unit, acc);
    return;
  }
  for (std::size_t r = 0; r < remaining.size(); ++r) {
    if (remaining[r] == 0) continue;
    --remaining[r];
    arm_of_unit[unit] = r;
    enumerate_recursive(science, models, remaining, arm_of_unit, unit + 1, acc);
    ++remaining[r];
  }
}

}  // namespace

EnumerationOracle enumerate_assignments(const ScienceTable& science,
                                        const DesignSpec& design,
                                        std::span<const WorkingModel> models) {
  const std::size_t Q = science.arm_count();
  if (design.counts.size() != Q)
    throw std::invalid_argument("enumerate_assignments: counts must cover all arms");
  if (design.total() != science.unit_count())
    throw std::invalid_argument("enumerate_assignments: counts must sum to N");
  const std::uint64_t expected = multiset_permutation_count(design.counts);

  EnumerationAccumulator acc;
  acc.Q = Q;
  acc.sum_means.assign(Q, 0.0L);
  acc.sum_outer.assign(Q * Q, 0.0L);
  acc.sum_vhat.assign(Q, 0.0L);
  acc.sum_effects.resize(models.size());
  for (std::size_t m = 0; m < models.size(); ++m)
    acc.sum_effects[m].assign(models[m].size(), 0.0L);

  std::vector<std::int64_t> remaining = design.counts;
  std::vector<std::size_t> arm_of_unit(static_cast<std::size_t>(science.unit_count()));
  enumerate_recursive(science, models, remaining, arm_of_unit, 0, acc);

  EnumerationOracle oracle;
  oracle.assignment_count = acc.leaves;
  if (acc.leaves != expected)
    throw Error("enumeration visited " + std::to_string(acc.leaves) + " assignments, expected " +
                std::to_string(expected));

  const long double n = static_cast<long double>(acc.leaves);
  oracle.mean_arm_means.resize(Q);
  oracle.mean_vhat_diag.resize(Q);
  for (std::size_t r = 0; r < Q; ++r) {
    oracle.mean_arm_means[r] = static_cast<double>(acc.sum_means[r] / n);
    oracle.mean_vhat_diag[r] = static_cast<double>(acc.sum_vhat[r] / n);
  }
  oracle.cov_arm_means.resize(Q * Q);
  for (std::size_t r = 0; r < Q; ++r)
    for (std::size_t c = r; c < Q; ++c) {
      const long double cross = acc.sum_outer[r * Q + c] / n -
                                (acc.sum_means[r] / n) * (acc.sum_means[c] / n);
      oracle.cov_arm_means[r * Q + c] = static_cast<double>(cross);
      oracle.cov_arm_means[c * Q + r] = static_cast<double>(cross);
    }
  oracle.mean_effects.resize(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    oracle.mean_effects[m].resize(models[m].size());
    for (std::size_t j = 0; j < models[m].size(); ++j)
      oracle.mean_effects[m][j] = static_cast<double>(acc.sum_effects[m][j] / n);
  }
  return oracle;
}

std::string to_string(ScreenMethod method) {
  switch (method) {
    case ScreenMethod::forward_bonferroni: return "forward_bonferroni";
    case ScreenMethod::forward_lasso: return "forward_lasso";
    case ScreenMethod::naive_bonferroni: return "naive_bonferroni";
    case ScreenMethod::naive_lasso: return "naive_lasso";
  }
  return "unknown";
}

ScreenMethod screen_method_from_string(const std::string& name) {
  if (name == "forward_bonferroni") return ScreenMethod::forward_bonferroni;
  if (name == "forward_lasso") return ScreenMethod::forward_lasso;
  if (name == "naive_bonferroni") return ScreenMethod::naive_bonferroni;
  if (name == "naive_lasso") return ScreenMethod::naive_lasso;
  throw std::invalid_argument("unknown screening method: " + name);
}

WorkingModel naive_screen(const ArmTable& arms, SStep s_step, double alpha,
                          std::optional<double> lambda) {
  const int K = arms.factor_count();
  const WlsFit fit = wls_effects(arms, WorkingModel::saturated(K));

  std::vector<EffectEstimate> candidates;
  candidates.reserve(fit.effects.size() - 1);
  for (const EffectEstimate& e : fit.effects)
    if (e.set.level() >= 1) candidates.push_back(e);

  std::vector<FactorSet> selected;
  if (s_step == SStep::bonferroni_t) {
    selected = bonferroni_t_select(candidates, alpha, candidates.size());
  } else {
    double threshold;
    if (lambda) {
      threshold = *lambda;
    } else {
      std::vector<double> ses;
      ses.reserve(candidates.size());
      for (const EffectEstimate& e : candidates) ses.push_back(e.se);
      std::sort(ses.begin(), ses.end());
      const std::size_t n = ses.size();
      const double median = n % 2 == 1 ? ses[n / 2] : 0.5 * (ses[n / 2 - 1] + ses[n / 2]);
      const double level = std::min(alpha / static_cast<double>(n), 1.0);
      threshold = level >= 1.0 ? 0.0 : normal_quantile(1.0 - level / 2.0) * median;
    }
    selected = lasso_select(candidates, threshold);
  }

  WorkingModel model;
  model.add_all(selected);
  return model;
}

std::vector<FactorSet> first_five_effect_sets(int K) {
  const int top = std::min(K, 5);
  std::vector<FactorSet> sets;
  for (int a = 1; a <= top; ++a) sets.push_back(FactorSet::of({a}));
  for (int a = 1; a <= top; ++a)
    for (int b = a + 1; b <= top; ++b) sets.push_back(FactorSet::of({a, b}));
  return sets;
}

const MetricRow* MetricsTable::find(const GridPoint& point, const std::string& method,
                                    const std::string& estimator,
                                    const std::string& metric) const {
  for (const MetricRow& row : rows) {
    if (row.point.n0 == point.n0 && row.point.effect_size == point.effect_size &&
        row.method == method && row.estimator == estimator && row.metric == metric)
      return &row;
  }
  return nullptr;
}

namespace {

struct ReplicateOutcome {
  // Indexed by method.
  std::vector<std::uint8_t> perfect;
  std::vector<std::uint8_t> heredity_violation;
  std::vector<std::uint8_t> rls_reject;
  std::vector<std::uint8_t> rls_cover;
  std::vector<double> rls_length;
  std::vector<double> rls_variance;
  std::uint8_t plugin_reject = 0;
  std::uint8_t plugin_cover = 0;
  double plugin_length = 0.0;
  double plugin_variance = 0.0;
};

struct BinaryStat {
  double mean = 0.0;
  double se = 0.0;
};

BinaryStat binary_stat(const std::vector<std::uint8_t>& values) {
  double sum = 0.0;
  for (std::uint8_t v : values) sum += v;
  const double n = static_cast<double>(values.size());
  const double p = sum / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

BinaryStat continuous_stat(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

ScreeningConfig forward_config(const SimulationConfig& config, SStep s_step) {
  ScreeningConfig sc = config.screening;
  sc.s_step = s_step;
  return sc;
}

}  // namespace

MetricsTable run_monte_carlo(const SimulationConfig& config) {
  if (config.replications < 1)
    throw std::invalid_argument("run_monte_carlo: need at least one replication");
  const int K = config.K;
  const std::size_t Q = std::size_t{1} << K;
  config.screening.validate(K);

  const WeightVector target =
      config.target ? *config.target
                    : WeightVector::arm(K, treatment_from_row(Q - 1, K));
  if (target.K != K) throw std::invalid_argument("run_monte_carlo: target has wrong K");

  MetricsTable table;
  const std::size_t n_methods = config.methods.size();
  const std::size_t R = static_cast<std::size_t>(config.replications);

  for (std::size_t point_index = 0; point_index < config.grid.size(); ++point_index) {
    const GridPoint point = config.grid[point_index];
    if (point.n0 < 2)
      throw std::invalid_argument("run_monte_carlo: per-arm replication must be >= 2");

    std::vector<std::pair<FactorSet, double>> effects;
    if (config.intercept != 0.0) effects.emplace_back(FactorSet{}, config.intercept);
    for (FactorSet s : config.effect_sets) effects.emplace_back(s, point.effect_size);
    const std::vector<double> mu = mu_from_effects(effects, K);

    WorkingModel true_model;
    if (point.effect_size != 0.0)
      true_model.add_all(config.effect_sets);

    const DesignSpec design = uniform_design(K, point.n0);
    const std::int64_t N = design.total();

    std::vector<ReplicateOutcome> outcomes(R);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
      for (;;) {
        const std::size_t rep = next.fetch_add(1);
        if (rep >= R) return;
        try {
          std::mt19937_64 rng = substream(config.seed, point_index * R + rep);
          const ScienceTable science = gen_science_table(mu, N, config.dgp, rng);
          const std::vector<TreatmentLevel> z = assign(design, K, rng);
          const ArmTable arms = summarize(reveal(science, z));
          const double gamma_true = science.weighted_mean(target);

          ReplicateOutcome& out = outcomes[rep];
          out.perfect.resize(n_methods);
          out.heredity_violation.resize(n_methods);
          out.rls_reject.resize(n_methods);
          out.rls_cover.resize(n_methods);
          out.rls_length.resize(n_methods);
          out.rls_variance.resize(n_methods);

          const GammaEstimate plugin = plug_in_estimate(target, arms, config.alpha_ci);
          out.plugin_reject = plugin.ci_lo > 0.0 || plugin.ci_hi < 0.0;
          out.plugin_cover = plugin.ci_lo <= gamma_true && gamma_true <= plugin.ci_hi;
          out.plugin_length = plugin.ci_hi - plugin.ci_lo;
          out.plugin_variance = plugin.variance;

          for (std::size_t m = 0; m < n_methods; ++m) {
            WorkingModel model;
            bool forward = false;
            switch (config.methods[m]) {
              case ScreenMethod::forward_bonferroni:
                model = forward_screen(arms, forward_config(config, SStep::bonferroni_t))
                            .final_model;
                forward = true;
                break;
              case ScreenMethod::forward_lasso:
                model = forward_screen(arms, forward_config(config, SStep::lasso))
                            .final_model;
                forward = true;
                break;
              case ScreenMethod::naive_bonferroni:
                model = naive_screen(arms, SStep::bonferroni_t,
                                     config.screening.alpha_at(1));
                break;
              case ScreenMethod::naive_lasso:
                model = naive_screen(arms, SStep::lasso, config.screening.alpha_at(1),
                                     config.screening.lasso_lambda);
                break;
            }
            out.perfect[m] = model == true_model;
            out.heredity_violation[m] =
                forward && !respects_heredity(model, config.screening.heredity);
            const GammaEstimate rls = rls_estimate(target, model, arms, config.alpha_ci);
            out.rls_reject[m] = rls.ci_lo > 0.0 || rls.ci_hi < 0.0;
            out.rls_cover[m] = rls.ci_lo <= gamma_true && gamma_true <= rls.ci_hi;
            out.rls_length[m] = rls.ci_hi - rls.ci_lo;
            out.rls_variance[m] = rls.variance;
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };

    unsigned n_threads = config.threads > 0
                             ? static_cast<unsigned>(config.threads)
                             : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(R));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    // Reduction over sorted replicate indices.
    for (std::size_t m = 0; m < n_methods; ++m) {
      const std::string method = to_string(config.methods[m]);
      std::vector<std::uint8_t> perfect(R), r_reject(R), r_cover(R);
      std::vector<double> r_length(R), r_variance(R);
      std::vector<std::uint8_t> p_reject(R), p_cover(R);
      std::vector<double> p_length(R), p_variance(R);
      for (std::size_t rep = 0; rep < R; ++rep) {
        perfect[rep] = outcomes[rep].perfect[m];
        r_reject[rep] = outcomes[rep].rls_reject[m];
        r_cover[rep] = outcomes[rep].rls_cover[m];
        r_length[rep] = outcomes[rep].rls_length[m];
        r_variance[rep] = outcomes[rep].rls_variance[m];
        p_reject[rep] = outcomes[rep].plugin_reject;
        p_cover[rep] = outcomes[rep].plugin_cover;
        p_length[rep] = outcomes[rep].plugin_length;
        p_variance[rep] = outcomes[rep].plugin_variance;
      }
      auto push = [&](const std::string& estimator, const std::string& metric,
                      BinaryStat stat) {
        table.rows.push_back({point, method, estimator, metric, stat.mean, stat.se});
      };
      push("-", "perfect_screening", binary_stat(perfect));
      const bool forward = config.methods[m] == ScreenMethod::forward_bonferroni ||
                           config.methods[m] == ScreenMethod::forward_lasso;
      if (forward) {
        double violations = 0.0;
        for (std::size_t rep = 0; rep < R; ++rep)
          violations += outcomes[rep].heredity_violation[m];
        push("-", "heredity_violations", {violations, 0.0});
      }
      push("rls", "power", binary_stat(r_reject));
      push("rls", "coverage", binary_stat(r_cover));
      push("rls", "ci_length", continuous_stat(r_length));
      push("rls", "variance", continuous_stat(r_variance));
      push("plugin", "power", binary_stat(p_reject));
      push("plugin", "coverage", binary_stat(p_cover));
      push("plugin", "ci_length", continuous_stat(p_length));
      push("plugin", "variance", continuous_stat(p_variance));
    }
  }
  return table;
}

}  // namespace factorial
