#include "mpolicy/agents/dqn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mpolicy/agents/agent_io.hpp"
#include "mpolicy/errors.hpp"

namespace mpolicy {

Mlp::Mlp(std::vector<int> layers) : layers_(std::move(layers)) {
  if (layers_.size() < 2) throw std::invalid_argument("network needs input and output layers");
  Eigen::Index total = 0;
  for (std::size_t l = 1; l < layers_.size(); ++l) {
    if (layers_[l] < 1 || layers_[l - 1] < 1) throw std::invalid_argument("layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(layers_[l]) * (layers_[l - 1] + 1);
  }
  params_ = Eigen::VectorXd::Zero(total);
}

Mlp::Mlp(std::vector<int> layers, Rng& rng) : Mlp(std::move(layers)) {
  for (std::size_t l = 1; l < layers_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layers_[l - 1]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const Eigen::Index count = static_cast<Eigen::Index>(layers_[l]) * (layers_[l - 1] + 1);
    for (Eigen::Index k = 0; k < count; ++k) params_(offsets_[l - 1] + k) = dist(rng);
  }
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(std::size_t l) const {
  return {params_.data() + offsets_[l], layers_[l + 1], layers_[l]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t l) const {
  return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(layers_[l + 1]) * layers_[l], layers_[l + 1]};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs) const {
  Eigen::MatrixXd a = inputs;
  const std::size_t n_layers = layers_.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

double Mlp::td_loss(const Eigen::MatrixXd& inputs, std::span<const std::size_t> actions,
                    const Eigen::VectorXd& targets, Eigen::VectorXd* grad) const {
  const Eigen::Index batch = inputs.cols();
  const std::size_t n_layers = layers_.size() - 1;
  std::vector<Eigen::MatrixXd> acts;  // acts[l] is the input to layer l
  acts.reserve(n_layers + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = weight(l) * acts.back();
    z.colwise() += bias(l);
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  const Eigen::MatrixXd& out = acts.back();

  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(out.rows(), batch);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto a = static_cast<Eigen::Index>(actions[static_cast<std::size_t>(b)]);
    const double err = out(a, b) - targets(b);
    loss += err * err;
    delta(a, b) = 2.0 * err / static_cast<double>(batch);
  }
  loss /= static_cast<double>(batch);
  if (!grad) return loss;

  grad->setZero(params_.size());
  for (std::size_t l = n_layers; l-- > 0;) {
    const Eigen::Index rows = layers_[l + 1], cols = layers_[l];
    Eigen::Map<Eigen::MatrixXd>(grad->data() + offsets_[l], rows, cols) = delta * acts[l].transpose();
    Eigen::Map<Eigen::VectorXd>(grad->data() + offsets_[l] + rows * cols, rows) = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = weight(l).transpose() * delta;
      // ReLU derivative: acts[l] holds the post-activation of layer l - 1
      delta = back.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss;
}

Adam::Adam(Eigen::Index size, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  beta1_power_ *= beta1_;
  beta2_power_ *= beta2_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double step = lr_ * std::sqrt(1.0 - beta2_power_) / (1.0 - beta1_power_);
  params.array() -= step * m_.array() / (v_.array().sqrt() + eps_);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  data_.reserve(capacity);
}

void ReplayBuffer::push(const Experience& e) {
  if (data_.size() < capacity_) {
    data_.push_back(e);
  } else {
    data_[next_] = e;
  }
  next_ = (next_ + 1) % capacity_;
}

const Experience& ReplayBuffer::at(std::size_t k) const {
  if (k >= data_.size()) throw std::out_of_range("replay index out of range");
  const std::size_t oldest = data_.size() < capacity_ ? 0 : next_;
  return data_[(oldest + k) % data_.size()];
}

double linear_epsilon(std::uint64_t step, std::uint64_t total_steps, const DqnParams& p) {
  const double horizon = p.epsilon_decay_fraction * static_cast<double>(total_steps);
  if (!(horizon > 0.0)) return p.epsilon_end;
  const double frac = std::min(1.0, static_cast<double>(step) / horizon);
  return p.epsilon_start + (p.epsilon_end - p.epsilon_start) * frac;
}

DqnLearner::DqnLearner(std::size_t actions, FeatureScaler scaler, const DqnParams& params, Rng& init_rng)
    : params_(params),
      scaler_(scaler),
      online_({4, params.hidden, params.hidden, static_cast<int>(actions)}, init_rng),
      target_(online_),
      adam_(online_.parameters().size(), params.learning_rate, params.beta1, params.beta2),
      buffer_(params.buffer_capacity) {}

Eigen::VectorXd DqnLearner::q_values(const Eigen::Vector4d& input) const { return online_.forward(input); }

double DqnLearner::train_step(Rng& rng) {
  if (!ready()) throw std::logic_error("replay buffer holds fewer transitions than one batch");
  const auto batch = static_cast<Eigen::Index>(params_.batch_size);
  Eigen::MatrixXd inputs(4, batch), next_inputs(4, batch);
  std::vector<std::size_t> actions(params_.batch_size);
  Eigen::VectorXd rewards(batch);
  std::vector<bool> done(params_.batch_size);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& e = buffer_.sample(rng);
    inputs.col(b) = e.obs;
    next_inputs.col(b) = e.next_obs;
    actions[static_cast<std::size_t>(b)] = e.action;
    rewards(b) = e.reward;
    done[static_cast<std::size_t>(b)] = e.done;
  }
  const Eigen::MatrixXd next_q = target_.forward(next_inputs);
  Eigen::VectorXd targets(batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const double bootstrap = done[static_cast<std::size_t>(b)] ? 0.0 : params_.gamma * next_q.col(b).maxCoeff();
    targets(b) = rewards(b) + bootstrap;
  }
  Eigen::VectorXd grad;
  const double loss = online_.td_loss(inputs, actions, targets, &grad);
  if (!std::isfinite(loss) || !grad.allFinite()) throw DivergenceError("DQN loss is not finite");
  adam_.step(online_.parameters(), grad);
  return loss;
}

void DqnLearner::on_env_step() {
  ++env_steps_;
  if (params_.target_sync_steps > 0 && env_steps_ % static_cast<std::uint64_t>(params_.target_sync_steps) == 0) {
    target_.parameters() = online_.parameters();
  }
}

DqnAgent::DqnAgent(std::string method, ActionGrid grid, FeatureScaler scaler, Mlp net)
    : method_(std::move(method)), grid_(std::move(grid)), scaler_(scaler), net_(std::move(net)) {
  if (net_.inputs() != 4 || net_.outputs() != static_cast<int>(grid_.size())) {
    throw std::invalid_argument("network shape does not match 4 inputs and the action grid");
  }
}

std::size_t DqnAgent::act(const MacroState& observation) const {
  const Eigen::VectorXd q = net_.forward(scaler_.standardize(observation));
  return argmax(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

std::vector<double> DqnAgent::action_values(const MacroState& observation) const {
  const Eigen::VectorXd q = net_.forward(scaler_.standardize(observation));
  return {q.data(), q.data() + q.size()};
}

void DqnAgent::save(std::ostream& out) const {
  AgentWriter w(out, method_, "dqn", grid_);
  std::vector<double> layers(net_.layers().begin(), net_.layers().end());
  w.values("layers", layers);
  w.values("scaler_mean", std::span<const double>(scaler_.mean.data(), 4));
  w.values("scaler_std", std::span<const double>(scaler_.stddev.data(), 4));
  w.values("parameters", std::span<const double>(net_.parameters().data(),
                                                 static_cast<std::size_t>(net_.parameters().size())));
}

std::unique_ptr<DqnAgent> DqnAgent::from_record(const AgentRecord& rec) {
  std::vector<int> layers;
  for (double v : rec.values("layers")) layers.push_back(static_cast<int>(v));
  Mlp net(layers);
  const auto params = rec.values("parameters", static_cast<std::size_t>(net.parameters().size()));
  for (Eigen::Index k = 0; k < net.parameters().size(); ++k) net.parameters()(k) = params[static_cast<std::size_t>(k)];
  FeatureScaler scaler;
  const auto m = rec.values("scaler_mean", 4), s = rec.values("scaler_std", 4);
  for (int k = 0; k < 4; ++k) {
    scaler.mean(k) = m[static_cast<std::size_t>(k)];
    scaler.stddev(k) = s[static_cast<std::size_t>(k)];
  }
  return std::make_unique<DqnAgent>(rec.method, *rec.grid, scaler, std::move(net));
}

}  // namespace mpolicy
