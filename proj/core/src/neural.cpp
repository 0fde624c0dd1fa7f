#include "fastslow/neural.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace fastslow {

Eigen::Vector4d encode_input(GridPos state, GridPos goal) noexcept {
  return {static_cast<double>(state.x), static_cast<double>(state.y), static_cast<double>(goal.x),
          static_cast<double>(goal.y)};
}

namespace {

void validate(const MlpShape& shape) {
  if (shape.inputs < 1) throw std::invalid_argument("MlpShape: inputs must be positive");
  if (shape.heads.empty() || shape.heads.size() > static_cast<std::size_t>(kMaxHeads)) {
    throw std::invalid_argument("MlpShape: between 1 and kMaxHeads heads required");
  }
  for (int w : shape.hidden)
    if (w < 1) throw std::invalid_argument("MlpShape: hidden widths must be positive");
  for (int w : shape.heads)
    if (w < 2) throw std::invalid_argument("MlpShape: heads need at least two classes");
}

DenseLayer make_layer(int in, int out, Rng& rng) {
  const double bound = std::sqrt(1.0 / in);
  std::uniform_real_distribution<double> u(-bound, bound);
  DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
  for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) layer.weights(r, c) = u(rng);
  for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = u(rng);
  return layer;
}

Gradients zeros_like(const std::vector<DenseLayer>& layers) {
  Gradients out;
  out.reserve(layers.size());
  for (const auto& l : layers) {
    out.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()), Eigen::VectorXd::Zero(l.bias.size())});
  }
  return out;
}

// Column-wise softmax in place.
void softmax_columns(Eigen::MatrixXd& logits) {
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    auto col = logits.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
}

}  // namespace

Mlp::Mlp(MlpShape shape, std::uint64_t seed) : shape_(std::move(shape)) {
  validate(shape_);
  Rng rng(seed);
  int in = shape_.inputs;
  for (int w : shape_.hidden) {
    layers_.push_back(make_layer(in, w, rng));
    in = w;
  }
  for (int w : shape_.heads) layers_.push_back(make_layer(in, w, rng));
}

Eigen::MatrixXd Mlp::encode_batch(std::span<const TrainingPair> batch) const {
  if (shape_.inputs != 4) throw std::logic_error("Mlp: (state, goal) encoding needs 4 inputs");
  Eigen::MatrixXd x(4, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = encode_input(batch[i].start, batch[i].goal);
  return x;
}

std::vector<Eigen::VectorXd> Mlp::forward(GridPos state, GridPos goal) const {
  Eigen::MatrixXd x = encode_input(state, goal);
  auto probs = forward_batch(x);
  std::vector<Eigen::VectorXd> out;
  out.reserve(probs.size());
  for (auto& p : probs) out.emplace_back(p.col(0));
  return out;
}

std::vector<Eigen::MatrixXd> Mlp::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != shape_.inputs) throw std::invalid_argument("Mlp::forward_batch: wrong input width");
  const std::size_t trunk = shape_.hidden.size();
  Eigen::MatrixXd act = inputs;
  for (std::size_t l = 0; l < trunk; ++l) {
    act = ((layers_[l].weights * act).colwise() + layers_[l].bias).cwiseMax(0.0);
  }
  std::vector<Eigen::MatrixXd> out;
  out.reserve(shape_.heads.size());
  for (std::size_t h = 0; h < shape_.heads.size(); ++h) {
    const auto& head = layers_[trunk + h];
    Eigen::MatrixXd logits = (head.weights * act).colwise() + head.bias;
    softmax_columns(logits);
    out.push_back(std::move(logits));
  }
  return out;
}

double Mlp::loss(std::span<const TrainingPair> batch) const {
  if (batch.empty()) throw std::invalid_argument("Mlp::loss: empty batch");
  const auto probs = forward_batch(encode_batch(batch));
  double total = 0.0;
  for (std::size_t h = 0; h < probs.size(); ++h) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double p = probs[h](batch[i].targets[h], static_cast<Eigen::Index>(i));
      total -= std::log(std::max(p, kLogFloor));
    }
  }
  return total / static_cast<double>(batch.size() * probs.size());
}

double Mlp::gradient(std::span<const TrainingPair> batch, Gradients& grads) const {
  if (batch.empty()) throw std::invalid_argument("Mlp::gradient: empty batch");
  const std::size_t trunk = shape_.hidden.size();
  const std::size_t heads = shape_.heads.size();
  const auto samples = static_cast<Eigen::Index>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i)
    for (std::size_t h = 0; h < heads; ++h)
      if (batch[i].targets[h] < 0 || batch[i].targets[h] >= shape_.heads[h])
        throw std::out_of_range("Mlp::gradient: target class outside head width");

  // Forward pass, keeping pre-activations for the ReLU masks.
  std::vector<Eigen::MatrixXd> acts;
  std::vector<Eigen::MatrixXd> pre;
  acts.reserve(trunk + 1);
  pre.reserve(trunk);
  acts.push_back(encode_batch(batch));
  for (std::size_t l = 0; l < trunk; ++l) {
    pre.push_back((layers_[l].weights * acts.back()).colwise() + layers_[l].bias);
    acts.push_back(pre.back().cwiseMax(0.0));
  }

  if (grads.size() != layers_.size()) grads = zeros_like(layers_);
  const double scale = 1.0 / static_cast<double>(batch.size() * heads);
  double total = 0.0;
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(acts.back().rows(), samples);

  for (std::size_t h = 0; h < heads; ++h) {
    const auto& head = layers_[trunk + h];
    Eigen::MatrixXd delta = (head.weights * acts.back()).colwise() + head.bias;
    softmax_columns(delta);
    for (Eigen::Index i = 0; i < samples; ++i) {
      const int t = batch[static_cast<std::size_t>(i)].targets[h];
      total -= std::log(std::max(delta(t, i), kLogFloor));
      delta(t, i) -= 1.0;
    }
    delta *= scale;
    grads[trunk + h].weights.noalias() = delta * acts.back().transpose();
    grads[trunk + h].bias = delta.rowwise().sum();
    upstream.noalias() += head.weights.transpose() * delta;
  }

  for (std::size_t l = trunk; l-- > 0;) {
    Eigen::MatrixXd delta = upstream.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
    grads[l].weights.noalias() = delta * acts[l].transpose();
    grads[l].bias = delta.rowwise().sum();
    if (l > 0) upstream.noalias() = layers_[l].weights.transpose() * delta;
  }
  return total * scale;
}

bool Mlp::all_finite() const noexcept {
  for (const auto& l : layers_)
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

void Mlp::write_checkpoint(std::ostream& out) const {
  out << "mlp " << shape_.inputs << ' ' << shape_.hidden.size();
  for (int w : shape_.hidden) out << ' ' << w;
  out << ' ' << shape_.heads.size();
  for (int w : shape_.heads) out << ' ' << w;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) out << l.weights(r, c) << ' ';
      out << l.bias(r) << '\n';
    }
  }
  out.precision(old_precision);
}

Mlp Mlp::read_checkpoint(std::istream& in) {
  std::string tag;
  std::size_t count = 0;
  Mlp net;
  if (!(in >> tag) || tag != "mlp" || !(in >> net.shape_.inputs >> count)) {
    throw std::runtime_error("checkpoint: missing mlp header");
  }
  net.shape_.hidden.resize(count);
  for (auto& w : net.shape_.hidden) in >> w;
  in >> count;
  net.shape_.heads.resize(count);
  for (auto& w : net.shape_.heads) in >> w;
  if (!in) throw std::runtime_error("checkpoint: truncated header");
  validate(net.shape_);

  auto read_layer = [&](int fan_in, int fan_out) {
    DenseLayer l{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd(fan_out)};
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) in >> l.weights(r, c);
      in >> l.bias(r);
    }
    if (!in) throw std::runtime_error("checkpoint: truncated parameters");
    return l;
  };
  int fan_in = net.shape_.inputs;
  for (int w : net.shape_.hidden) {
    net.layers_.push_back(read_layer(fan_in, w));
    fan_in = w;
  }
  for (int w : net.shape_.heads) net.layers_.push_back(read_layer(fan_in, w));
  return net;
}

Adam::Adam(const Mlp& net, AdamOptions options)
    : options_(options), first_moment_(zeros_like(net.layers())), second_moment_(zeros_like(net.layers())) {}

void Adam::apply(Mlp& net, const Gradients& grads) {
  auto& layers = net.layers();
  if (grads.size() != layers.size() || first_moment_.size() != layers.size()) {
    throw std::invalid_argument("Adam::apply: gradient layout does not match the network");
  }
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon;

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    param.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights, grads[l].weights, first_moment_[l].weights, second_moment_[l].weights);
    update(layers[l].bias, grads[l].bias, first_moment_[l].bias, second_moment_[l].bias);
  }
}

double train_step(Mlp& net, Adam& adam, std::span<const TrainingPair> batch) {
  Gradients grads;
  const double loss = net.gradient(batch, grads);
  adam.apply(net, grads);
  return loss;
}

}  // namespace fastslow
