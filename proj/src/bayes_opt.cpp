#include "sgl/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "nelder_mead.hpp"
#include "sgl/errors.hpp"

namespace sgl {
namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

std::vector<Eigen::VectorXd> latin_hypercube(int count, int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::VectorXd> pts(count, Eigen::VectorXd(dim));
  std::vector<int> strata(count);
  for (int d = 0; d < dim; ++d) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    for (int i = 0; i < count; ++i) pts[i][d] = (strata[i] + unit(rng)) / count;
  }
  return pts;
}

std::vector<BoSample> minimize_impl(
    const std::function<std::optional<double>(const Eigen::VectorXd&)>& objective, int dim,
    const BoOptions& options, const std::function<double(double)>& penalty_from_worst) {
  if (dim < 1) throw ValidationError("dim", "must be positive");
  if (options.n_explore < 2) throw ValidationError("n_explore", "need at least two exploration samples");
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<BoSample> samples;
  double worst = -std::numeric_limits<double>::infinity();
  auto penalty = [&] {
    return std::isfinite(worst) ? penalty_from_worst(worst) : 1e6;
  };

  for (const auto& x : latin_hypercube(options.n_explore, dim, rng)) {
    BoSample s{x, objective(x), 0.0};
    if (s.value) worst = std::max(worst, *s.value);
    samples.push_back(std::move(s));
  }
  for (auto& s : samples) s.objective = s.value ? *s.value : penalty();

  Eigen::VectorXd warm;
  for (int round = 0; round < options.n_exploit; ++round) {
    std::vector<GpObservation> obs;
    obs.reserve(samples.size());
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
      obs.push_back({s.x, s.objective});
      best = std::min(best, s.objective);
    }
    GpFitOptions fit;
    fit.seed = options.seed * 7919u + static_cast<std::uint64_t>(round);
    fit.initial_log_params = warm;
    // Full multi-start every tenth round; otherwise polish the previous optimum.
    fit.restarts = (round % 10 == 0) ? 3 : 1;
    fit.max_iterations = (round % 10 == 0) ? 200 : 80;
    const GpModel gp = gp_fit(obs, fit);
    warm = gp.log_params();

    struct Scored {
      Eigen::VectorXd x;
      double ei;
    };
    std::vector<Scored> pool;
    pool.reserve(options.candidates);
    for (int c = 0; c < options.candidates; ++c) {
      Eigen::VectorXd x(dim);
      for (int d = 0; d < dim; ++d) x[d] = unit(rng);
      pool.push_back({x, expected_improvement(gp, x, best)});
    }
    const int keep = std::min<int>(std::max(1, options.refine_starts), static_cast<int>(pool.size()));
    std::partial_sort(pool.begin(), pool.begin() + keep, pool.end(),
                      [](const Scored& a, const Scored& b) { return a.ei > b.ei; });
    Scored chosen = pool.front();
    auto negative_ei = [&](const Eigen::VectorXd& raw) {
      const Eigen::VectorXd x = raw.cwiseMax(0.0).cwiseMin(1.0);
      return -expected_improvement(gp, x, best) + (raw - x).squaredNorm();
    };
    for (int k = 0; k < keep; ++k) {
      const auto r = detail::nelder_mead(negative_ei, pool[k].x, 0.05, 60, 1e-4);
      const Eigen::VectorXd x = r.x.cwiseMax(0.0).cwiseMin(1.0);
      const double ei = expected_improvement(gp, x, best);
      if (ei > chosen.ei) chosen = {x, ei};
    }

    BoSample s{chosen.x, objective(chosen.x), 0.0};
    if (s.value) worst = std::max(worst, *s.value);
    s.objective = s.value ? *s.value : penalty();
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace

double expected_improvement(double mean, double sigma, double best_so_far) {
  const double gain = best_so_far - mean;
  if (!(sigma > 0.0)) return std::max(0.0, gain);
  const double z = gain / sigma;
  return std::max(0.0, gain * normal_cdf(z) + sigma * normal_pdf(z));
}

double expected_improvement(const GpModel& model, const Eigen::VectorXd& query, double best_so_far) {
  const GpPrediction p = model.predict(query);
  return expected_improvement(p.mean, std::sqrt(p.variance), best_so_far);
}

std::vector<BoSample> minimize_unit_cube(
    const std::function<std::optional<double>(const Eigen::VectorXd&)>& objective, int dim,
    const BoOptions& options) {
  return minimize_impl(objective, dim, options, [](double worst) {
    return worst > 0.0 ? 10.0 * worst : worst + 10.0 * std::max(1.0, std::abs(worst));
  });
}

GaitParams GaitBounds::to_params(double omega, const Eigen::VectorXd& unit) const {
  if (unit.size() != 3) throw ValidationError("unit", "expected (y, amplitude, lambda)");
  return GaitParams::make(omega, y_lo + (y_hi - y_lo) * unit[0],
                          amplitude_lo + (amplitude_hi - amplitude_lo) * unit[1],
                          lambda_lo + (lambda_hi - lambda_lo) * unit[2]);
}

BoResult bayes_optimize(double omega, const RobotModel& model, const BoOptions& options,
                        const GaitBounds& bounds, const RunProtocol& protocol) {
  if (!(omega > 0.0)) throw ValidationError("omega", "must be positive");
  std::vector<std::optional<EvalResult>> results;
  auto objective = [&](const Eigen::VectorXd& x) -> std::optional<double> {
    const GaitParams p = bounds.to_params(omega, x);
    results.emplace_back();
    try {
      results.back().emplace(evaluate_gait(p, model, protocol));
    } catch (const GaitEvaluationError&) {
      return std::nullopt;
    }
    const std::optional<double>& appv = results.back()->appv;
    if (!appv || !(*appv > 0.0)) return std::nullopt;
    return std::log(*appv);
  };
  // The surrogate sees log APPV, so "ten times the worst APPV" is an additive
  // log(10) here.
  const auto samples = minimize_impl(objective, 3, options,
                                     [](double worst) { return worst + std::log(10.0); });

  BoResult out;
  out.omega = omega;
  out.best_objective = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    BoHistoryEntry e;
    e.params = bounds.to_params(omega, samples[i].x);
    e.objective = std::exp(samples[i].objective);
    e.result = results[i];
    e.penalized = !samples[i].value.has_value();
    if (e.objective < out.best_objective) {
      out.best_objective = e.objective;
      out.best_params = e.params;
    }
    out.history.push_back(std::move(e));
  }
  return out;
}

std::string BoResult::csv_header() {
  return GaitParams::csv_header() + ",objective,penalized," + EvalResult::csv_header();
}

std::string BoResult::csv_rows() const {
  std::string out;
  for (const auto& e : history) {
    out += e.params.csv_row() + "," + format_double(e.objective) + "," + (e.penalized ? "1" : "0") + ",";
    if (e.result) {
      out += e.result->csv_row();
    } else {
      out += "nan,nan,nan,nan";
      for (int j = 0; j < 8; ++j) out += ",nan";
    }
    out += "\n";
  }
  return out;
}

}  // namespace sgl
