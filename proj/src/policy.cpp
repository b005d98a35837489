#include "sgl/rl/policy.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "sgl/errors.hpp"

namespace sgl::rl {
namespace {

constexpr char kMagic[4] = {'S', 'G', 'L', '1'};
constexpr double kNormEps = 1e-8;
constexpr double kNormClip = 10.0;

void append_layers(const std::vector<DenseLayer>& layers, std::vector<double>& out) {
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) out.push_back(l.bias[i]);
  }
}

std::size_t read_layers(std::vector<DenseLayer>& layers, std::span<const double> flat, std::size_t at) {
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[at++];
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = flat[at++];
  }
  return at;
}

std::vector<int> widths(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ValidationError(path, "truncated checkpoint");
  return v;
}

}  // namespace

ObsNormalizer::ObsNormalizer(int dim) : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

void ObsNormalizer::update(const Eigen::VectorXd& obs) {
  count_ += 1.0;
  const Eigen::VectorXd delta = obs - mean_;
  mean_ += delta / count_;
  m2_.array() += delta.array() * (obs - mean_).array();
}

Eigen::VectorXd ObsNormalizer::variance() const {
  if (count_ < 2.0) return Eigen::VectorXd::Ones(mean_.size());
  return m2_ / count_;
}

Eigen::VectorXd ObsNormalizer::normalize(const Eigen::VectorXd& obs) const {
  if (count_ < 2.0) return obs;
  const Eigen::ArrayXd scaled = (obs - mean_).array() / (variance().array() + kNormEps).sqrt();
  return scaled.cwiseMax(-kNormClip).cwiseMin(kNormClip).matrix();
}

void ObsNormalizer::restore(double count, Eigen::VectorXd mean, Eigen::VectorXd sum_squares) {
  count_ = count;
  mean_ = std::move(mean);
  m2_ = std::move(sum_squares);
}

PolicyNet PolicyNet::create(std::mt19937_64& rng, int obs_dim, int act_dim, std::vector<int> hidden,
                            double init_log_std) {
  PolicyNet net = zeros(obs_dim, act_dim, hidden);
  net.policy.initialize(rng, 0.01);
  net.value.initialize(rng, 1.0);
  net.log_std.setConstant(init_log_std);
  return net;
}

PolicyNet PolicyNet::zeros(int obs_dim, int act_dim, std::vector<int> hidden) {
  PolicyNet net;
  net.policy = Mlp(widths(obs_dim, hidden, act_dim));
  net.value = Mlp(widths(obs_dim, hidden, 1));
  net.log_std = Eigen::VectorXd::Zero(act_dim);
  net.normalizer = ObsNormalizer(obs_dim);
  return net;
}

std::vector<double> PolicyNet::flat_params() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  append_layers(policy.layers(), out);
  append_layers(value.layers(), out);
  for (Eigen::Index i = 0; i < log_std.size(); ++i) out.push_back(log_std[i]);
  return out;
}

void PolicyNet::set_flat_params(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw ValidationError("flat", "parameter count mismatch");
  std::size_t at = read_layers(policy.layers(), flat, 0);
  at = read_layers(value.layers(), flat, at);
  for (Eigen::Index i = 0; i < log_std.size(); ++i) log_std[i] = flat[at++];
}

std::size_t PolicyNet::parameter_count() const {
  return policy.parameter_count() + value.parameter_count() + log_std.size();
}

PolicyGrad PolicyGrad::zeros_like(const PolicyNet& net) {
  return {net.policy.zero_like(), net.value.zero_like(), Eigen::VectorXd::Zero(net.log_std.size())};
}

std::vector<double> PolicyGrad::flat() const {
  std::vector<double> out;
  append_layers(policy, out);
  append_layers(value, out);
  for (Eigen::Index i = 0; i < log_std.size(); ++i) out.push_back(log_std[i]);
  return out;
}

PolicyOutput policy_forward_normalized(const PolicyNet& net, const Eigen::VectorXd& obs) {
  if (obs.size() != net.obs_dim()) {
    throw ValidationError("obs", "expected dimension " + std::to_string(net.obs_dim()) + ", got " +
                                     std::to_string(obs.size()));
  }
  return {net.policy.forward(obs), net.value.forward(obs)[0]};
}

PolicyOutput policy_forward(const PolicyNet& net, const Eigen::VectorXd& obs) {
  if (obs.size() != net.obs_dim()) {
    throw ValidationError("obs", "expected dimension " + std::to_string(net.obs_dim()) + ", got " +
                                     std::to_string(obs.size()));
  }
  return policy_forward_normalized(net, net.normalizer.normalize(obs));
}

double gaussian_log_prob(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std,
                         const Eigen::VectorXd& sample) {
  const Eigen::ArrayXd z = (sample - mean).array() / log_std.array().exp();
  return (-0.5 * z.square() - log_std.array()).sum() -
         0.5 * mean.size() * std::log(2.0 * std::numbers::pi);
}

double gaussian_entropy(const Eigen::VectorXd& log_std) {
  return log_std.sum() + 0.5 * log_std.size() * (1.0 + std::log(2.0 * std::numbers::pi));
}

Eigen::VectorXd clip_action(const Eigen::VectorXd& a) { return a.cwiseMax(-kActionBound).cwiseMin(kActionBound); }

SampledAction sample_action(const Eigen::VectorXd& mean, const Eigen::VectorXd& log_std, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SampledAction s;
  s.raw.resize(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) s.raw[i] = mean[i] + std::exp(log_std[i]) * normal(rng);
  s.action = clip_action(s.raw);
  s.log_prob = gaussian_log_prob(mean, log_std, s.raw);
  return s;
}

void save_checkpoint(const PolicyNet& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError(path, "cannot write checkpoint");
  out.write(kMagic, 4);
  for (const Mlp* m : {&net.policy, &net.value}) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m->sizes().size()));
    for (int s : m->sizes()) write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  }
  for (double v : net.flat_params()) write_pod<double>(out, v);
  write_pod<double>(out, net.normalizer.count());
  const Eigen::VectorXd& m2 = net.normalizer.sum_squares();
  for (Eigen::Index i = 0; i < net.normalizer.mean().size(); ++i) write_pod<double>(out, net.normalizer.mean()[i]);
  for (Eigen::Index i = 0; i < m2.size(); ++i) write_pod<double>(out, m2[i]);
  if (!out) throw ValidationError(path, "checkpoint write failed");
}

PolicyNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path, "cannot open checkpoint");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ValidationError(path, "not an SGL1 checkpoint");
  std::vector<int> sizes[2];
  for (auto& s : sizes) {
    const auto n = read_pod<std::uint32_t>(in, path);
    if (n < 2 || n > 64) throw ValidationError(path, "implausible layer count");
    for (std::uint32_t i = 0; i < n; ++i) s.push_back(static_cast<int>(read_pod<std::uint32_t>(in, path)));
  }
  if (sizes[0].front() != sizes[1].front() || sizes[1].back() != 1) {
    throw ValidationError(path, "policy and value trunk shapes disagree");
  }
  const std::vector<int> hidden(sizes[0].begin() + 1, sizes[0].end() - 1);
  PolicyNet net = PolicyNet::zeros(sizes[0].front(), sizes[0].back(), hidden);
  net.value = Mlp(sizes[1]);
  std::vector<double> flat(net.parameter_count());
  for (double& v : flat) v = read_pod<double>(in, path);
  net.set_flat_params(flat);
  const double count = read_pod<double>(in, path);
  Eigen::VectorXd mean(net.obs_dim()), m2(net.obs_dim());
  for (Eigen::Index i = 0; i < mean.size(); ++i) mean[i] = read_pod<double>(in, path);
  for (Eigen::Index i = 0; i < m2.size(); ++i) m2[i] = read_pod<double>(in, path);
  net.normalizer.restore(count, mean, m2);
  return net;
}

}  // namespace sgl::rl
