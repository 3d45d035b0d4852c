#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mpolicy/agents/actor_critic.hpp"
#include "mpolicy/agents/policy.hpp"

namespace mpolicy {

class AgentRecord;

/// Fully connected network, ReLU on hidden layers and a linear output. All
/// parameters live in one flat vector laid out per layer as W (out x in,
/// column-major) followed by b.
class Mlp {
 public:
  explicit Mlp(std::vector<int> layers);
  /// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Mlp(std::vector<int> layers, Rng& rng);

  const std::vector<int>& layers() const { return layers_; }
  int inputs() const { return layers_.front(); }
  int outputs() const { return layers_.back(); }

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }

  /// inputs: (in x batch) -> (out x batch)
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs) const;

  /// mean_b (Q(x_b, a_b) - y_b)^2. When `grad` is given it receives the
  /// gradient with respect to parameters().
  double td_loss(const Eigen::MatrixXd& inputs, std::span<const std::size_t> actions, const Eigen::VectorXd& targets,
                 Eigen::VectorXd* grad = nullptr) const;

 private:
  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t l) const;
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const;

  std::vector<int> layers_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
};

class Adam {
 public:
  Adam(Eigen::Index size, double learning_rate = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  Eigen::VectorXd m_, v_;
  double beta1_power_ = 1.0;
  double beta2_power_ = 1.0;
};

struct Experience {
  Eigen::Vector4d obs = Eigen::Vector4d::Zero();
  std::size_t action = 0;
  double reward = 0.0;
  Eigen::Vector4d next_obs = Eigen::Vector4d::Zero();
  bool done = false;
};

/// Fixed-capacity FIFO ring buffer.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Experience& e);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// k-th oldest stored experience.
  const Experience& at(std::size_t k) const;
  /// Uniform draw, with replacement.
  const Experience& sample(Rng& rng) const { return data_[uniform_index(rng, data_.size())]; }

 private:
  std::size_t capacity_;
  std::vector<Experience> data_;
  std::size_t next_ = 0;
};

struct DqnParams {
  int hidden = 64;
  std::size_t buffer_capacity = 10000;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double gamma = 0.99;
  int target_sync_steps = 100;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.8;
};

/// Linear decay from start to end over the first `fraction` of total steps.
double linear_epsilon(std::uint64_t step, std::uint64_t total_steps, const DqnParams& p);

/// Online network, frozen target copy, replay memory and optimizer state.
class DqnLearner {
 public:
  DqnLearner(std::size_t actions, FeatureScaler scaler, const DqnParams& params, Rng& init_rng);

  Eigen::Vector4d encode(const MacroState& s) const { return scaler_.standardize(s); }
  Eigen::VectorXd q_values(const Eigen::Vector4d& input) const;

  void remember(const Experience& e) { buffer_.push(e); }
  bool ready() const { return buffer_.size() >= params_.batch_size; }

  /// One Adam step on a uniform minibatch against target-network
  /// bootstrapped targets. Returns the minibatch loss.
  double train_step(Rng& rng);

  /// Counts an environment step and copies online -> target every
  /// `target_sync_steps` steps.
  void on_env_step();

  const Mlp& online() const { return online_; }
  const Mlp& target() const { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const FeatureScaler& scaler() const { return scaler_; }
  std::uint64_t env_steps() const { return env_steps_; }

 private:
  DqnParams params_;
  FeatureScaler scaler_;
  Mlp online_;
  Mlp target_;
  Adam adam_;
  ReplayBuffer buffer_;
  std::uint64_t env_steps_ = 0;
};

class DqnAgent final : public Policy {
 public:
  DqnAgent(std::string method, ActionGrid grid, FeatureScaler scaler, Mlp net);

  static std::unique_ptr<DqnAgent> from_record(const AgentRecord& rec);

  const std::string& method() const override { return method_; }
  const ActionGrid& grid() const override { return grid_; }
  std::size_t act(const MacroState& observation) const override;
  std::vector<double> action_values(const MacroState& observation) const override;
  void save(std::ostream& out) const override;

 private:
  std::string method_;
  ActionGrid grid_;
  FeatureScaler scaler_;
  Mlp net_;
};

}  // namespace mpolicy
