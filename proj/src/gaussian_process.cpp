#include "sgl/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "nelder_mead.hpp"
#include "sgl/errors.hpp"

namespace sgl {
namespace {

constexpr double kSqrt5 = 2.23606797749979;
constexpr double kMaxJitter = 1e-4;

// Search box for (log length scales, log signal variance, log noise), in
// standardized-output units.
constexpr double kLogLengthLo = -4.605170185988091;   // log 0.01
constexpr double kLogLengthHi = 2.302585092994046;    // log 10
constexpr double kLogSignalLo = -2.995732273553991;   // log 0.05
constexpr double kLogSignalHi = 2.995732273553991;    // log 20
constexpr double kLogNoiseLo = -18.420680743952367;   // log 1e-8
constexpr double kLogNoiseHi = -0.6931471805599453;   // log 0.5

Eigen::VectorXd clamp_to_box(Eigen::VectorXd p) {
  const int d = static_cast<int>(p.size()) - 2;
  for (int i = 0; i < d; ++i) p[i] = std::clamp(p[i], kLogLengthLo, kLogLengthHi);
  p[d] = std::clamp(p[d], kLogSignalLo, kLogSignalHi);
  p[d + 1] = std::clamp(p[d + 1], kLogNoiseLo, kLogNoiseHi);
  return p;
}

MaternKernel kernel_from(const Eigen::VectorXd& p) {
  const int d = static_cast<int>(p.size()) - 2;
  return MaternKernel{p.head(d).array().exp().matrix(), std::exp(p[d])};
}

}  // namespace

double MaternKernel::operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double u = (a[i] - b[i]) / length_scales[i];
    r2 += u * u;
  }
  const double r = std::sqrt(r2);
  const double s = kSqrt5 * r;
  return signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

GpModel GpModel::condition(std::vector<GpObservation> observations, const MaternKernel& kernel,
                           double noise_variance) {
  const int n = static_cast<int>(observations.size());
  if (n < 1) throw ValidationError("observations", "need at least one observation");
  GpModel gp;
  gp.kernel_ = kernel;
  gp.noise_variance_ = noise_variance;

  double mean = 0.0;
  for (const auto& o : observations) mean += o.value;
  mean /= n;
  double var = 0.0;
  for (const auto& o : observations) var += (o.value - mean) * (o.value - mean);
  const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  gp.y_mean_ = mean;
  gp.y_scale_ = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;

  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = (observations[i].value - gp.y_mean_) / gp.y_scale_;
    for (int j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel(observations[i].x, observations[j].x);
    k(i, i) += noise_variance;
  }

  double jitter = 0.0;
  while (true) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    gp.chol_.compute(kj);
    if (gp.chol_.info() == Eigen::Success) break;
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
    if (jitter > kMaxJitter * (1.0 + 1e-9)) {
      throw std::runtime_error("GP kernel matrix is singular even with 1e-4 jitter");
    }
  }
  gp.jitter_ = jitter;
  gp.alpha_ = gp.chol_.solve(y);
  gp.log_likelihood_ = -0.5 * y.dot(gp.alpha_) - gp.chol_.matrixLLT().diagonal().array().log().sum() -
                       0.5 * n * std::log(2.0 * std::numbers::pi);
  gp.observations_ = std::move(observations);
  return gp;
}

GpPrediction GpModel::predict(const Eigen::VectorXd& x) const {
  const int n = static_cast<int>(observations_.size());
  Eigen::VectorXd ks(n);
  for (int i = 0; i < n; ++i) ks[i] = kernel_(x, observations_[i].x);
  GpPrediction p;
  p.mean = y_mean_ + y_scale_ * ks.dot(alpha_);
  const Eigen::VectorXd v = chol_.matrixL().solve(ks);
  p.variance = std::max(0.0, kernel_.signal_variance - v.squaredNorm()) * y_scale_ * y_scale_;
  return p;
}

Eigen::VectorXd GpModel::log_params() const {
  const int d = static_cast<int>(kernel_.length_scales.size());
  Eigen::VectorXd p(d + 2);
  p.head(d) = kernel_.length_scales.array().log().matrix();
  p[d] = std::log(kernel_.signal_variance);
  p[d + 1] = std::log(noise_variance_);
  return p;
}

GpModel gp_fit(const std::vector<GpObservation>& observations, const GpFitOptions& options) {
  if (observations.size() < 2) throw ValidationError("observations", "need at least two observations");
  const int d = static_cast<int>(observations.front().x.size());
  for (const auto& o : observations) {
    if (o.x.size() != d) throw ValidationError("observations", "inconsistent input dimension");
  }

  auto negative_lml = [&](const Eigen::VectorXd& raw) {
    const Eigen::VectorXd p = clamp_to_box(raw);
    try {
      const GpModel gp = GpModel::condition(observations, kernel_from(p), std::exp(p[d + 1]));
      // Pull stray simplex vertices back toward the box.
      return -gp.log_marginal_likelihood() + (raw - p).squaredNorm();
    } catch (const std::runtime_error&) {
      return 1e300;
    }
  };

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::VectorXd> starts;
  if (options.initial_log_params.size() == d + 2) starts.push_back(clamp_to_box(options.initial_log_params));
  Eigen::VectorXd standard(d + 2);
  standard.head(d).setConstant(std::log(0.3));
  standard[d] = 0.0;
  standard[d + 1] = std::log(1e-4);
  starts.push_back(standard);
  while (static_cast<int>(starts.size()) < std::max(1, options.restarts)) {
    Eigen::VectorXd p(d + 2);
    for (int i = 0; i < d; ++i) p[i] = kLogLengthLo + (kLogLengthHi - kLogLengthLo) * unit(rng);
    p[d] = kLogSignalLo + (kLogSignalHi - kLogSignalLo) * unit(rng);
    p[d + 1] = kLogNoiseLo + (kLogNoiseHi - kLogNoiseLo) * unit(rng);
    starts.push_back(p);
  }

  Eigen::VectorXd best;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    const auto r = detail::nelder_mead(negative_lml, s, 0.5, options.max_iterations, 1e-3);
    if (r.value < best_value) {
      best_value = r.value;
      best = r.x;
    }
  }
  const Eigen::VectorXd p = clamp_to_box(best);
  return GpModel::condition(observations, kernel_from(p), std::exp(p[d + 1]));
}

}  // namespace sgl
