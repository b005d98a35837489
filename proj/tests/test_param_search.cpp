#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sgl/bayes_opt.hpp"
#include "sgl/errors.hpp"
#include "sgl/gaussian_process.hpp"
#include "sgl/param_search.hpp"
#include "oracles.hpp"

using namespace sgl;
using oracle::branin;

namespace {

GridSpec tiny_spec() { return GridSpec{{0.5, 1.5}, {0.1, 0.3}, {40.0, 80.0}, {60.0, 100.0}}; }

}  // namespace

TEST_CASE("standard grid enumeration") {
  const GridSpec spec = GridSpec::standard();
  const auto grid = enumerate_grid(spec);
  CHECK(grid.size() == 6480);
  CHECK(grid.front() == GaitParams::make(0.25, 0.1, 40.0, 40.0));
  CHECK(grid[1] == GaitParams::make(0.25, 0.1, 40.0, 50.0));
  CHECK(grid.back() == GaitParams::make(3.0, 0.4, 180.0, 120.0));
  for (const auto& p : grid) REQUIRE(p.x + p.y == 1.0);
  CHECK(enumerate_grid(GridSpec{{1.0}, {0.2}, {60.0}, {70.0}}).size() == 1);
}

TEST_CASE("evaluate_gait") {
  const RobotModel model = build_robot(RobotConfig{});
  const GaitParams p = GaitParams::make(1.0, 0.2, 60.0, 70.0);
  const RunProtocol short_run{300, 100};
  const EvalResult a = evaluate_gait(p, model, short_run);
  const EvalResult b = evaluate_gait(p, model, short_run);
  CHECK(a.window_steps == 200);
  CHECK(a.mean_velocity > 0.0);
  CHECK(a.mean_power > 0.0);
  REQUIRE(a.appv.has_value());
  CHECK(a.mean_velocity == b.mean_velocity);
  CHECK(a.mean_power == b.mean_power);
  CHECK(a.per_joint_power == b.per_joint_power);

  // No temporal wave: the body settles into a fixed bend and stops.
  const EvalResult still = evaluate_gait(GaitParams{0.0, 0.3, 0.7, 60.0, 60.0}, model, short_run);
  CHECK(still.mean_velocity == 0.0);
  CHECK_FALSE(still.appv.has_value());

  CHECK_THROWS_AS(evaluate_gait(p, model, RunProtocol{100, 100}), ValidationError);
}

TEST_CASE("grid search over a 16-point subset, with resume") {
  const RobotModel model = build_robot(RobotConfig{});
  const RunProtocol protocol{240, 40};
  GridOptions opts;
  opts.protocol = protocol;
  int fresh = 0;
  opts.on_record = [&](const GridRecord&) { ++fresh; };
  const auto full = grid_search(tiny_spec(), model, opts);
  REQUIRE(full.size() == 16);
  CHECK(fresh == 16);
  const auto order = enumerate_grid(tiny_spec());
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(full[i].index == i);
    CHECK(full[i].params == order[i]);
    REQUIRE(full[i].result.has_value());
    CHECK(full[i].result->window_steps == 200);
  }

  GridOptions resume = opts;
  resume.completed.assign(full.begin(), full.begin() + 10);
  resume.workers = 2;
  fresh = 0;
  const auto resumed = grid_search(tiny_spec(), model, resume);
  CHECK(fresh == 6);
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(resumed[i].result->mean_power == full[i].result->mean_power);
    CHECK(resumed[i].result->mean_velocity == full[i].result->mean_velocity);
  }

  GridOptions wrong = opts;
  wrong.completed = {full[3]};
  wrong.completed[0].index = 4;
  CHECK_THROWS_AS(grid_search(tiny_spec(), model, wrong), ValidationError);
}

TEST_CASE("velocity frontier is monotone and agrees with brute force") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> v(0.0, 0.5), noise(0.5, 3.0);
  std::vector<VelocityPower> pts;
  for (int i = 0; i < 400; ++i) {
    const double vel = v(rng);
    pts.push_back({vel, vel * noise(rng)});
  }
  const double width = 0.02;
  const auto frontier = velocity_frontier(pts, width);
  REQUIRE(!frontier.empty());
  for (std::size_t i = 1; i < frontier.size(); ++i) {
    CHECK(frontier[i].velocity_lo > frontier[i - 1].velocity_lo);
    CHECK(frontier[i].power >= frontier[i - 1].power);
  }
  for (const auto& f : frontier) {
    double brute = INFINITY;
    for (const auto& p : pts)
      if (p.velocity >= f.velocity_lo) brute = std::min(brute, p.power);
    CHECK(f.power == brute);
  }
}

TEST_CASE("pearson correlation") {
  CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson({1}, {1}), ValidationError);
}

TEST_CASE("GP interpolates and reverts to the prior") {
  Eigen::VectorXd a(3), b(3);
  a << 0.2, 0.4, 0.6;
  b = a;
  const GpModel dup = gp_fit({{a, 2.5}, {b, 2.5}});
  CHECK(dup.predict(a).mean == doctest::Approx(2.5).epsilon(1e-9));

  std::vector<GpObservation> obs;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 12; ++i) {
    Eigen::VectorXd x(3);
    x << u(rng), u(rng), u(rng);
    obs.push_back({x, std::sin(3.0 * x[0]) + x[1] * x[2]});
  }
  const GpModel gp = gp_fit(obs);
  for (const auto& o : obs) {
    const GpPrediction p = gp.predict(o.x);
    CHECK(p.variance >= 0.0);
    CHECK(std::abs(p.mean - o.value) < 1e-2);
  }
  Eigen::VectorXd far = Eigen::VectorXd::Constant(3, 1e3);
  const GpPrediction prior = gp.predict(far);
  // Standardized signal variance, scaled back to output units.
  double mean = 0.0, var = 0.0;
  for (const auto& o : obs) mean += o.value / obs.size();
  for (const auto& o : obs) var += (o.value - mean) * (o.value - mean) / (obs.size() - 1);
  CHECK(prior.variance == doctest::Approx(gp.kernel().signal_variance * var).epsilon(1e-9));
  CHECK(prior.mean == doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("GP predicts a held-out point of a quadratic") {
  auto f = [](const Eigen::VectorXd& x) {
    return 1.0 + std::pow(x[0] - 0.3, 2) + 2.0 * std::pow(x[1] - 0.6, 2) + 0.5 * std::pow(x[2] - 0.5, 2);
  };
  std::vector<GpObservation> obs;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd x(3);
        x << i / 2.0, j / 2.0, k / 2.0;
        obs.push_back({x, f(x)});
      }
  const GpModel gp = gp_fit(obs);
  Eigen::VectorXd held(3);
  held << 0.37, 0.71, 0.22;
  const double truth = f(held);  // brute-force evaluation
  CHECK(std::abs(gp.predict(held).mean - truth) < 0.1 * truth);
}

TEST_CASE("GP conditioning escalates jitter on singular kernels") {
  Eigen::VectorXd a(1);
  a << 0.5;
  const GpModel gp = GpModel::condition({{a, 1.0}, {a, 1.0}, {a, 1.0}}, MaternKernel{Eigen::VectorXd::Constant(1, 0.3), 1.0}, 0.0);
  CHECK(gp.jitter() > 0.0);
  CHECK(gp.jitter() <= 1e-4);
  CHECK_THROWS_AS(gp_fit({{a, 1.0}}), ValidationError);
}

TEST_CASE("expected improvement") {
  CHECK(expected_improvement(1.0, 0.0, 1.0) == 0.0);
  CHECK(expected_improvement(0.75, 0.0, 1.0) == 0.25);
  CHECK(expected_improvement(2.0, 0.0, 1.0) == 0.0);
  // phi(0) = 1/sqrt(2 pi).
  CHECK(expected_improvement(1.0, 1.0, 1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0), s(0.0, 3.0);
  for (int i = 0; i < 10000; ++i) REQUIRE(expected_improvement(u(rng), s(rng), u(rng)) >= 0.0);

  // At a noiseless observed point worse than the incumbent, EI vanishes.
  std::vector<GpObservation> obs;
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd x(1);
    x << i / 4.0;
    obs.push_back({x, static_cast<double>(i)});
  }
  const GpModel gp = GpModel::condition(obs, MaternKernel{Eigen::VectorXd::Constant(1, 0.3), 1.0}, 1e-12);
  CHECK(expected_improvement(gp, obs[3].x, 0.0) < 1e-6);
}

TEST_CASE("BO on Branin with the full budget") {
  BoOptions opts;
  opts.seed = 3;
  const auto samples = minimize_unit_cube([](const Eigen::VectorXd& x) { return std::optional(branin(x)); }, 2, opts);
  CHECK(samples.size() == 110);
  double best = INFINITY, explore_best = INFINITY;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    best = std::min(best, samples[i].objective);
    if (i < 10) explore_best = std::min(explore_best, samples[i].objective);
  }
  CHECK(best <= explore_best);
  CHECK(std::abs(best - 0.397887) < 0.5);
}

TEST_CASE("BO penalizes failed evaluations") {
  BoOptions opts;
  opts.n_exploit = 5;
  opts.seed = 1;
  const auto samples = minimize_unit_cube(
      [](const Eigen::VectorXd& x) -> std::optional<double> {
        if (x[0] > 0.5) return std::nullopt;
        return 1.0 + x[0];
      },
      1, opts);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i)
    if (samples[i].value) worst = std::max(worst, *samples[i].value);
  for (const auto& s : samples) {
    if (!s.value) CHECK(s.objective == doctest::Approx(10.0 * worst));
  }
}

TEST_CASE("gait BO history and determinism") {
  const RobotModel model = build_robot(RobotConfig{});
  BoOptions opts;
  opts.n_explore = 4;
  opts.n_exploit = 3;
  opts.seed = 9;
  const RunProtocol quick{200, 50};
  const BoResult a = bayes_optimize(1.5, model, opts, GaitBounds{}, quick);
  const BoResult b = bayes_optimize(1.5, model, opts, GaitBounds{}, quick);
  REQUIRE(a.history.size() == 7);
  double best = INFINITY;
  for (const auto& e : a.history) {
    best = std::min(best, e.objective);
    CHECK(e.params.omega == 1.5);
    CHECK(e.params.y >= 0.1);
    CHECK(e.params.y <= 0.4);
  }
  CHECK(a.best_objective == best);
  CHECK(a.csv_rows() == b.csv_rows());
}
