#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fastslow/grid_world.hpp"

namespace fastslow {

/// Input width, hidden widths and one softmax head per entry of `heads`.
struct MlpShape {
  int inputs = 4;
  std::vector<int> hidden{128, 128};
  std::vector<int> heads{kNumActions};

  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

inline constexpr int kMaxHeads = 2;

/// (start, goal) input with one target class per head.
struct TrainingPair {
  GridPos start;
  GridPos goal;
  std::array<int, kMaxHeads> targets{};
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;
};

/// Same layout as Mlp::layers(): hidden layers first, then one layer per head.
using Gradients = std::vector<DenseLayer>;

/// Network input for a (state, goal) query: the four raw cell coordinates.
Eigen::Vector4d encode_input(GridPos state, GridPos goal) noexcept;

inline constexpr double kLogFloor = 1e-12;

/// Fully connected ReLU network with softmax heads.
class Mlp {
 public:
  /// Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  Mlp(MlpShape shape, std::uint64_t seed);

  const MlpShape& shape() const noexcept { return shape_; }
  int num_heads() const noexcept { return static_cast<int>(shape_.heads.size()); }

  /// Per-head probability vectors for one query.
  std::vector<Eigen::VectorXd> forward(GridPos state, GridPos goal) const;
  /// Per-head probabilities (classes x samples) for an input matrix whose
  /// columns are samples.
  std::vector<Eigen::MatrixXd> forward_batch(const Eigen::MatrixXd& inputs) const;

  /// Mean over samples and heads of -log(max(p_target, kLogFloor)).
  double loss(std::span<const TrainingPair> batch) const;
  /// Loss and its gradient with respect to every parameter.
  double gradient(std::span<const TrainingPair> batch, Gradients& grads) const;

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  bool all_finite() const noexcept;

  /// Text checkpoint: a shape header followed by every parameter, layer by layer.
  void write_checkpoint(std::ostream& out) const;
  static Mlp read_checkpoint(std::istream& in);

 private:
  Mlp() = default;
  Eigen::MatrixXd encode_batch(std::span<const TrainingPair> batch) const;

  MlpShape shape_;
  std::vector<DenseLayer> layers_;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(const Mlp& net, AdamOptions options = {});

  void apply(Mlp& net, const Gradients& grads);
  long steps() const noexcept { return step_; }
  const AdamOptions& options() const noexcept { return options_; }

 private:
  AdamOptions options_;
  long step_ = 0;
  Gradients first_moment_;
  Gradients second_moment_;
};

/// One Adam step on the full-batch gradient. Returns the loss before the update.
double train_step(Mlp& net, Adam& adam, std::span<const TrainingPair> batch);

}  // namespace fastslow
