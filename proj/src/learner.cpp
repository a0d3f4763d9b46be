#include "survgroup/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "survgroup/errors.hpp"

namespace survgroup {

namespace {

// Memberships below this contribute a frozen epsilon to every sum, so the
// S^(gamma-1) factor stays finite if the rule collapses; gradients through
// clamped entries are zero.
constexpr double kMembershipFloor = 1e-9;
constexpr double kPiFloor = 1e-12;
constexpr double kExpClamp = 600.0;

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void check_learner_config(const LearnerConfig& config) {
  if (config.gamma < 0.0 || config.gamma > 1.0)
    throw ConfigError("gamma must lie in [0, 1]");
  if (config.epochs < 4)
    throw ConfigError("epochs must be >= 4 (temperature anneals at the 1/2 and 3/4 marks)");
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(config.initial_temperature > 0.0))
    throw ConfigError("initial_temperature must be > 0");
  if (config.n_subgroups < 1) throw ConfigError("n_subgroups must be >= 1");
  if (config.gamma_decay <= 0.0 || config.gamma_decay > 1.0)
    throw ConfigError("gamma_decay must lie in (0, 1]");
}

void check_matrix(const SurvivalDataset& data, const SurvivalMatrix& matrix) {
  if (matrix.rows != data.n())
    throw ShapeError("survival matrix has " + std::to_string(matrix.rows) +
                     " rows for a dataset of " + std::to_string(data.n()) + " subjects");
  if (matrix.cols == 0 || matrix.cols != matrix.grid.size())
    throw ShapeError("survival matrix grid/column mismatch");
}

double clamped_exp(double exponent) { return std::exp(std::min(exponent, kExpClamp)); }

// One reference curve's contribution: exponent on the size factor plus the
// per-subject deviations from that reference.
struct Reference {
  double exponent;
  std::span<const double> deviation;
};

// Shared by full_objective and the training loop. Memberships enter every sum
// through max(m, kMembershipFloor).
double objective_terms(std::span<const double> memberships,
                       std::span<const Reference> references, std::size_t n,
                       std::vector<double>* dl_dsigma) {
  double size_sum = 0.0;
  for (const double m : memberships) size_sum += std::max(m, kMembershipFloor);
  const double size_frac = size_sum / static_cast<double>(n);

  double objective = 0.0;
  if (dl_dsigma) dl_dsigma->assign(memberships.size(), 0.0);
  for (const Reference& ref : references) {
    const std::span<const double> dev = ref.deviation;
    double weighted = 0.0;
    for (std::size_t i = 0; i < memberships.size(); ++i)
      weighted += std::max(memberships[i], kMembershipFloor) * dev[i];
    const double size_pow = std::pow(size_frac, ref.exponent);
    objective += size_pow * weighted / size_sum;
    if (!dl_dsigma) continue;
    // d(-objective)/d m_i, zero where the floor clamps.
    const double via_size = ref.exponent * std::pow(size_frac, ref.exponent - 1.0) *
                            (weighted / size_sum) / static_cast<double>(n);
    const double inv_sum_sq = 1.0 / (size_sum * size_sum);
    for (std::size_t i = 0; i < memberships.size(); ++i) {
      if (memberships[i] < kMembershipFloor) continue;
      (*dl_dsigma)[i] -= via_size + size_pow * (dev[i] * size_sum - weighted) * inv_sum_sq;
    }
  }
  return objective;
}

// Per-feature affine map to mean zero, unit variance. Bounds are optimized in
// these units so the temperature and learning rate mean the same thing on
// every dataset; constant features keep a unit scale (their standardized
// column is all zero and the condition hardens away).
struct Standardization {
  std::vector<double> mu, sd, inv_sd;
};

Standardization feature_standardization(const SurvivalDataset& data) {
  const std::size_t n = data.n(), p = data.p();
  Standardization st{std::vector<double>(p, 0.0), std::vector<double>(p, 1.0),
                     std::vector<double>(p, 1.0)};
  for (std::size_t j = 0; j < p; ++j) {
    const auto col = data.column(j);
    double sum = 0.0;
    for (const double x : col) sum += x;
    st.mu[j] = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const double x : col) ss += (x - st.mu[j]) * (x - st.mu[j]);
    const double var = ss / static_cast<double>(n);
    if (var > 0.0) {
      st.sd[j] = std::sqrt(var);
      st.inv_sd[j] = 1.0 / st.sd[j];
    }
  }
  return st;
}

// Soft memberships of a learned rule, evaluated in the standardized
// coordinates it was trained in (bounds stored in feature units, temperature
// in standardized units).
std::vector<double> standardized_memberships(const SurvivalDataset& data,
                                             const SoftRuleParams& params,
                                             const Standardization& st) {
  const std::size_t n = data.n(), p = data.p();
  std::vector<double> out(n, 1.0);
  double total = 0.0;
  for (std::size_t j = 0; j < p; ++j) total += std::max(params.weights[j], 0.0);
  if (total == 0.0) return out;
  std::vector<double> inverse(n, 0.0);
  const double inv_tau = 1.0 / params.temperature;
  for (std::size_t j = 0; j < p; ++j) {
    const double w = std::max(params.weights[j], 0.0);
    if (w == 0.0) continue;
    const double alpha = (params.alpha[j] - st.mu[j]) * st.inv_sd[j];
    const double beta = (params.beta[j] - st.mu[j]) * st.inv_sd[j];
    const auto col = data.column(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (col[i] - st.mu[j]) * st.inv_sd[j];
      const double u = clamped_exp((alpha - z) * inv_tau);
      const double v = clamped_exp((z - beta) * inv_tau);
      inverse[i] += w / std::max(1.0 / (1.0 + u + v), kPiFloor);
    }
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = total / inverse[i];
  return out;
}

// sigma-weighted mean of the matrix rows: the reference curve a predecessor
// subgroup presents to later rounds. Soft memberships are bounded below by the
// condition floor, so the weight sum is always positive.
std::vector<double> weighted_mean_curve(const SurvivalMatrix& matrix,
                                        std::span<const double> weights) {
  std::vector<double> curve(matrix.cols, 0.0);
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < matrix.rows; ++i) {
    const double w = weights[i];
    weight_sum += w;
    const double* row = matrix.data.data() + i * matrix.cols;
    for (std::size_t u = 0; u < matrix.cols; ++u) curve[u] += w * row[u];
  }
  for (double& v : curve) v /= weight_sum;
  return curve;
}

}  // namespace

std::vector<double> exceptionality_vector(const SurvivalMatrix& matrix,
                                          std::span<const double> reference_values) {
  if (reference_values.size() != matrix.cols)
    throw ShapeError("reference curve has " + std::to_string(reference_values.size()) +
                     " values for a matrix with " + std::to_string(matrix.cols) + " columns");
  std::vector<double> out(matrix.rows);
  for (std::size_t i = 0; i < matrix.rows; ++i)
    out[i] = trapezoid_abs_diff(matrix.row(i), reference_values, matrix.grid);
  return out;
}

std::vector<double> exceptionality_vector(const SurvivalMatrix& matrix,
                                          const StepCurve& reference) {
  if (reference.grid != matrix.grid)
    throw GridError("reference curve grid differs from the matrix grid");
  return exceptionality_vector(matrix, reference.values);
}

double soft_objective(std::span<const double> memberships,
                      std::span<const double> exceptionality, double gamma) {
  if (memberships.size() != exceptionality.size())
    throw ShapeError("memberships and exceptionality must have equal length");
  if (memberships.empty()) throw ShapeError("empty membership vector");
  double raw_sum = 0.0;
  for (const double m : memberships) raw_sum += m;
  if (!(raw_sum > 0.0)) throw DegenerateError("subgroup memberships sum to zero");
  const Reference ref{gamma, exceptionality};
  return objective_terms(memberships, std::span<const Reference>(&ref, 1),
                         memberships.size(), nullptr);
}

double full_objective(std::span<const double> memberships,
                      std::span<const double> exceptionality_pop,
                      std::span<const PredecessorTerm> predecessors, double gamma) {
  if (memberships.size() != exceptionality_pop.size())
    throw ShapeError("memberships and exceptionality must have equal length");
  if (memberships.empty()) throw ShapeError("empty membership vector");
  double raw_sum = 0.0;
  for (const double m : memberships) raw_sum += m;
  if (!(raw_sum > 0.0)) throw DegenerateError("subgroup memberships sum to zero");

  std::vector<Reference> refs;
  refs.push_back({gamma, exceptionality_pop});
  for (std::size_t g = 0; g < predecessors.size(); ++g) {
    if (predecessors[g].exceptionality.size() != memberships.size())
      throw ShapeError("predecessor exceptionality length mismatch");
    refs.push_back({gamma / static_cast<double>(g + 1),
                    std::span<const double>(predecessors[g].exceptionality)});
  }
  return objective_terms(memberships, refs, memberships.size(), nullptr);
}

SoftRuleParams learn_subgroup(const SurvivalDataset& data, const SurvivalMatrix& matrix,
                              const std::vector<SoftRuleParams>& predecessors,
                              const LearnerConfig& config) {
  check_learner_config(config);
  check_matrix(data, matrix);
  const std::size_t n = data.n();
  const std::size_t p = data.p();

  const Standardization st = feature_standardization(data);

  // References: the population mean curve plus one curve per predecessor, each
  // reduced to a per-subject deviation vector once up front.
  std::vector<std::vector<double>> deviations;
  std::vector<Reference> references;
  {
    const StepCurve pop = population_curve(matrix);
    deviations.reserve(1 + predecessors.size());
    deviations.push_back(exceptionality_vector(matrix, pop.values));
    for (const SoftRuleParams& pred : predecessors) {
      const std::vector<double> weights = standardized_memberships(data, pred, st);
      deviations.push_back(exceptionality_vector(matrix, weighted_mean_curve(matrix, weights)));
    }
    references.push_back({config.gamma, std::span<const double>(deviations[0])});
    for (std::size_t g = 0; g < predecessors.size(); ++g)
      references.push_back({config.gamma / static_cast<double>(g + 1),
                            std::span<const double>(deviations[g + 1])});
  }

  // Parameter vector layout: [alpha | beta | weights], bounds in standardized
  // units.
  std::vector<double> theta(3 * p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto [lo, hi] = data.feature_ranges()[j];
    theta[j] = (lo - st.mu[j]) * st.inv_sd[j];
    theta[p + j] = (hi - st.mu[j]) * st.inv_sd[j];
    theta[2 * p + j] = 1.0;
  }
  double temperature = config.initial_temperature;

  std::vector<double> adam_m(3 * p, 0.0), adam_v(3 * p, 0.0), grad(3 * p);
  std::vector<double> eu(p * n), ev(p * n), pi(p * n);
  std::vector<double> sigma(n), inverse_sum(n), dl_dsigma(n);

  const int half_mark = config.epochs / 2;
  const int three_quarter_mark = (3 * config.epochs) / 4;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double inv_tau = 1.0 / temperature;
    double weight_total = 0.0;
    for (std::size_t j = 0; j < p; ++j) weight_total += std::max(theta[2 * p + j], 0.0);

    if (weight_total == 0.0) {
      std::fill(sigma.begin(), sigma.end(), 1.0);
    } else {
      std::fill(inverse_sum.begin(), inverse_sum.end(), 0.0);
      for (std::size_t j = 0; j < p; ++j) {
        const double w = std::max(theta[2 * p + j], 0.0);
        if (w == 0.0) continue;
        const double alpha = theta[j], beta = theta[p + j];
        const double shift = st.mu[j], scale = st.inv_sd[j];
        const auto col = data.column(j);
        double* eu_j = eu.data() + j * n;
        double* ev_j = ev.data() + j * n;
        double* pi_j = pi.data() + j * n;
        for (std::size_t i = 0; i < n; ++i) {
          const double z = (col[i] - shift) * scale;
          double u = clamped_exp((alpha - z) * inv_tau);
          double v = clamped_exp((z - beta) * inv_tau);
          const double raw = 1.0 / (1.0 + u + v);
          if (raw < kPiFloor) {
            pi_j[i] = kPiFloor;
            u = v = 0.0;  // clamped condition: no gradient through alpha/beta
          } else {
            pi_j[i] = raw;
          }
          eu_j[i] = u;
          ev_j[i] = v;
          inverse_sum[i] += w / pi_j[i];
        }
      }
      for (std::size_t i = 0; i < n; ++i) sigma[i] = weight_total / inverse_sum[i];
    }

    const double objective = objective_terms(sigma, references, n, &dl_dsigma);
    if (config.progress) {
      double size_sum = 0.0;
      for (const double s : sigma) size_sum += std::max(s, kMembershipFloor);
      config.progress(epoch, -objective, size_sum / static_cast<double>(n));
    }

    std::fill(grad.begin(), grad.end(), 0.0);
    if (weight_total > 0.0) {
      for (std::size_t j = 0; j < p; ++j) {
        const double a = theta[2 * p + j];
        const double w = std::max(a, 0.0);
        if (w == 0.0) continue;
        const double* eu_j = eu.data() + j * n;
        const double* ev_j = ev.data() + j * n;
        const double* pi_j = pi.data() + j * n;
        double g_alpha = 0.0, g_beta = 0.0, g_weight = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double dl = dl_dsigma[i];
          if (dl == 0.0) continue;
          const double s = sigma[i];
          const double common = dl * s * s * w / weight_total * inv_tau;
          g_alpha -= common * eu_j[i];
          g_beta += common * ev_j[i];
          g_weight += dl * (s / weight_total) * (1.0 - s / pi_j[i]);
        }
        grad[j] = g_alpha;
        grad[p + j] = g_beta;
        if (a > 0.0) grad[2 * p + j] = g_weight;
      }
    }

    const double bias1 = 1.0 - std::pow(kAdamBeta1, epoch);
    const double bias2 = 1.0 - std::pow(kAdamBeta2, epoch);
    for (std::size_t idx = 0; idx < theta.size(); ++idx) {
      adam_m[idx] = kAdamBeta1 * adam_m[idx] + (1.0 - kAdamBeta1) * grad[idx];
      adam_v[idx] = kAdamBeta2 * adam_v[idx] + (1.0 - kAdamBeta2) * grad[idx] * grad[idx];
      const double m_hat = adam_m[idx] / bias1;
      const double v_hat = adam_v[idx] / bias2;
      theta[idx] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEps);
    }

    if (epoch == half_mark || epoch == three_quarter_mark) temperature *= 0.5;
  }

  SoftRuleParams params;
  params.alpha.resize(p);
  params.beta.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    params.alpha[j] = st.mu[j] + st.sd[j] * theta[j];
    params.beta[j] = st.mu[j] + st.sd[j] * theta[p + j];
  }
  params.weights.assign(theta.begin() + static_cast<std::ptrdiff_t>(2 * p), theta.end());
  params.temperature = temperature;
  return params;
}

std::vector<SubgroupResult> discover(const SurvivalDataset& data, const SurvivalMatrix& matrix,
                                     const LearnerConfig& config) {
  check_learner_config(config);
  check_matrix(data, matrix);

  const StepCurve pop = population_curve(matrix);
  const std::vector<double> pop_deviation = exceptionality_vector(matrix, pop.values);

  std::vector<SoftRuleParams> predecessors;
  std::vector<SubgroupResult> results;
  double gamma = config.gamma;
  for (int round = 0; round < config.n_subgroups; ++round) {
    LearnerConfig round_config = config;
    round_config.gamma = gamma;
    SoftRuleParams params = learn_subgroup(data, matrix, predecessors, round_config);
    predecessors.push_back(params);

    SubgroupResult result;
    result.soft_params = params;
    result.rule = harden(params, data);
    result.mask = membership(result.rule, data);
    result.size = static_cast<std::size_t>(
        std::count(result.mask.begin(), result.mask.end(), std::uint8_t{1}));

    if (result.size > 0) {
      double dev_sum = 0.0;
      for (std::size_t i = 0; i < data.n(); ++i)
        if (result.mask[i]) dev_sum += pop_deviation[i];
      result.exceptionality = dev_sum / static_cast<double>(result.size);
    }

    bool have_km = false;
    if (result.size > 0) {
      try {
        result.km_curve = kaplan_meier(data.times(), data.events(), result.mask);
        have_km = true;
      } catch (const DegenerateError&) {
        // all-censored subgroup: fall back to the model-averaged curve below
      }
    }
    if (!have_km) {
      std::vector<double> weights(data.n());
      if (result.size > 0) {
        for (std::size_t i = 0; i < data.n(); ++i) weights[i] = result.mask[i] ? 1.0 : 0.0;
      } else {
        const std::vector<double> soft =
            standardized_memberships(data, params, feature_standardization(data));
        for (std::size_t i = 0; i < data.n(); ++i)
          weights[i] = std::max(soft[i], kMembershipFloor);
      }
      result.km_curve.grid = matrix.grid;
      result.km_curve.values = weighted_mean_curve(matrix, weights);
    }
    results.push_back(std::move(result));
    gamma *= config.gamma_decay;
  }
  return results;
}

std::vector<SubgroupResult> discover(const SurvivalDataset& data,
                                     const ForestConfig& forest_config,
                                     const LearnerConfig& config, int threads) {
  const SurvivalForest forest = SurvivalForest::fit(data, forest_config, threads);
  const SurvivalMatrix matrix = forest.predict_matrix(data, threads);
  return discover(data, matrix, config);
}

}  // namespace survgroup
