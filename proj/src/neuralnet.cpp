#include "kinoplan/neuralnet.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace kinoplan {

NeuralNet::NeuralNet(std::vector<int> layer_dims, OutputActivation output_activation,
                     double dropout_p, uint64_t init_seed)
    : dims_(std::move(layer_dims)), output_activation_(output_activation),
      dropout_p_(dropout_p) {
  if (dims_.size() < 2) throw std::invalid_argument("NeuralNet: need at least two layer dims");
  for (int d : dims_)
    if (d <= 0) throw std::invalid_argument("NeuralNet: layer dims must be positive");
  if (dropout_p_ < 0.0 || dropout_p_ >= 1.0)
    throw std::invalid_argument("NeuralNet: dropout_p must be in [0, 1)");

  Rng rng(init_seed);
  weights_.resize(dims_.size() - 1);
  biases_.resize(dims_.size() - 1);
  for (size_t l = 0; l + 1 < dims_.size(); ++l) {
    const int fan_in = dims_[l];
    const int fan_out = dims_[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    weights_[l].resize(static_cast<size_t>(fan_in) * fan_out);
    biases_[l].assign(static_cast<size_t>(fan_out), 0.0);
    for (double& w : weights_[l]) w = uniform(rng, -limit, limit);
  }
}

std::vector<double> NeuralNet::forward(const std::vector<double>& input, bool train_mode,
                                       Rng* rng) const {
  Workspace ws;
  return forward_cached(input, train_mode, rng, ws);
}

std::vector<double> NeuralNet::forward_cached(const std::vector<double>& input,
                                              bool train_mode, Rng* rng,
                                              Workspace& ws) const {
  if (static_cast<int>(input.size()) != dims_.front())
    throw std::invalid_argument("forward: input size " + std::to_string(input.size()) +
                                " does not match layer dims " + std::to_string(dims_.front()));

  const size_t n_layers = weights_.size();
  ws.activations.assign(n_layers + 1, {});
  ws.masks.assign(n_layers, {});
  ws.activations[0] = input;

  for (size_t l = 0; l < n_layers; ++l) {
    const int in_dim = dims_[l];
    const int out_dim = dims_[l + 1];
    const bool is_output = l + 1 == n_layers;
    const std::vector<double>& x = ws.activations[l];
    std::vector<double>& y = ws.activations[l + 1];
    y.assign(static_cast<size_t>(out_dim), 0.0);

    const double* w = weights_[l].data();
    for (int o = 0; o < out_dim; ++o) {
      double acc = biases_[l][static_cast<size_t>(o)];
      const double* row = w + static_cast<size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) acc += row[i] * x[static_cast<size_t>(i)];
      y[static_cast<size_t>(o)] = acc;
    }

    if (!is_output) {
      for (double& v : y) v = v > 0.0 ? v : 0.0;  // ReLU
      if (train_mode && dropout_p_ > 0.0) {
        if (rng == nullptr)
          throw std::invalid_argument("forward: dropout in train mode needs an rng");
        auto& mask = ws.masks[l];
        mask.resize(static_cast<size_t>(out_dim));
        const double keep = 1.0 - dropout_p_;
        for (int o = 0; o < out_dim; ++o) {
          mask[static_cast<size_t>(o)] = uniform01(*rng) < dropout_p_ ? 0.0 : 1.0 / keep;
          y[static_cast<size_t>(o)] *= mask[static_cast<size_t>(o)];
        }
      }
    } else if (output_activation_ == OutputActivation::Tanh) {
      for (double& v : y) v = std::tanh(v);
    }
  }
  return ws.activations.back();
}

std::vector<std::vector<double>> NeuralNet::forward_batch(
    const std::vector<std::vector<double>>& inputs) const {
  const size_t batch = inputs.size();
  std::vector<std::vector<double>> act(batch);
  for (size_t b = 0; b < batch; ++b) {
    if (static_cast<int>(inputs[b].size()) != dims_.front())
      throw std::invalid_argument("forward_batch: input size mismatch");
    act[b] = inputs[b];
  }
  std::vector<std::vector<double>> next(batch);
  for (size_t l = 0; l < weights_.size(); ++l) {
    const int in_dim = dims_[l];
    const int out_dim = dims_[l + 1];
    const bool is_output = l + 1 == weights_.size();
    for (size_t b = 0; b < batch; ++b) next[b].assign(static_cast<size_t>(out_dim), 0.0);
    const double* w = weights_[l].data();
    for (int o = 0; o < out_dim; ++o) {
      const double* row = w + static_cast<size_t>(o) * in_dim;
      const double bias = biases_[l][static_cast<size_t>(o)];
      for (size_t b = 0; b < batch; ++b) {
        double acc = bias;
        const double* x = act[b].data();
        for (int i = 0; i < in_dim; ++i) acc += row[i] * x[i];
        next[b][static_cast<size_t>(o)] = acc;
      }
    }
    for (size_t b = 0; b < batch; ++b) {
      if (!is_output) {
        for (double& v : next[b]) v = v > 0.0 ? v : 0.0;
      } else if (output_activation_ == OutputActivation::Tanh) {
        for (double& v : next[b]) v = std::tanh(v);
      }
      act[b].swap(next[b]);
    }
  }
  return act;
}

NeuralNet::Gradients NeuralNet::zero_gradients() const {
  Gradients g;
  g.w.resize(weights_.size());
  g.b.resize(biases_.size());
  for (size_t l = 0; l < weights_.size(); ++l) {
    g.w[l].assign(weights_[l].size(), 0.0);
    g.b[l].assign(biases_[l].size(), 0.0);
  }
  return g;
}

void NeuralNet::Gradients::accumulate(const Gradients& other, double scale) {
  for (size_t l = 0; l < w.size(); ++l) {
    for (size_t i = 0; i < w[l].size(); ++i) w[l][i] += scale * other.w[l][i];
    for (size_t i = 0; i < b[l].size(); ++i) b[l][i] += scale * other.b[l][i];
  }
}

void NeuralNet::Gradients::scale(double s) {
  for (auto& lw : w)
    for (double& v : lw) v *= s;
  for (auto& lb : b)
    for (double& v : lb) v *= s;
}

void NeuralNet::backward(const Workspace& ws, const std::vector<double>& dloss_doutput,
                         Gradients* grads, std::vector<double>* dinput) const {
  const size_t n_layers = weights_.size();
  if (ws.activations.size() != n_layers + 1)
    throw std::invalid_argument("backward: workspace does not match a cached forward pass");
  if (static_cast<int>(dloss_doutput.size()) != dims_.back())
    throw std::invalid_argument("backward: output gradient size mismatch");

  std::vector<double> delta = dloss_doutput;
  if (output_activation_ == OutputActivation::Tanh) {
    const auto& y = ws.activations.back();
    for (size_t o = 0; o < delta.size(); ++o) delta[o] *= 1.0 - y[o] * y[o];
  }

  for (size_t l = n_layers; l-- > 0;) {
    const int in_dim = dims_[l];
    const int out_dim = dims_[l + 1];
    const std::vector<double>& x = ws.activations[l];
    const double* w = weights_[l].data();

    if (grads != nullptr) {
      double* gw = grads->w[l].data();
      double* gb = grads->b[l].data();
      for (int o = 0; o < out_dim; ++o) {
        const double d = delta[static_cast<size_t>(o)];
        gb[o] += d;
        double* grow = gw + static_cast<size_t>(o) * in_dim;
        for (int i = 0; i < in_dim; ++i) grow[i] += d * x[static_cast<size_t>(i)];
      }
    }

    const bool need_prev = l > 0 || dinput != nullptr;
    if (!need_prev) break;

    std::vector<double> prev(static_cast<size_t>(in_dim), 0.0);
    for (int o = 0; o < out_dim; ++o) {
      const double d = delta[static_cast<size_t>(o)];
      if (d == 0.0) continue;
      const double* row = w + static_cast<size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) prev[static_cast<size_t>(i)] += d * row[i];
    }
    if (l > 0) {
      // Through dropout mask and ReLU of the previous hidden layer.
      const auto& mask = ws.masks[l - 1];
      const auto& a = ws.activations[l];
      for (int i = 0; i < in_dim; ++i) {
        double g = prev[static_cast<size_t>(i)];
        if (!mask.empty()) g *= mask[static_cast<size_t>(i)];
        // ReLU derivative: the stored activation is post-ReLU (and post-mask);
        // zero activation with zero/unmasked input means the unit was off.
        if (a[static_cast<size_t>(i)] <= 0.0) g = 0.0;
        prev[static_cast<size_t>(i)] = g;
      }
      delta = std::move(prev);
    } else if (dinput != nullptr) {
      *dinput = std::move(prev);
    }
  }
}

std::pair<double, NeuralNet::Gradients> l2_loss_grad(const NeuralNet& net,
                                                     const std::vector<Sample>& batch,
                                                     Rng* rng) {
  if (batch.empty()) throw std::invalid_argument("l2_loss_grad: empty batch");
  NeuralNet::Gradients grads = net.zero_gradients();
  double loss = 0.0;
  const bool train_mode = rng != nullptr && net.dropout_p() > 0.0;
  NeuralNet::Workspace ws;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::vector<double> dout;
  for (const auto& [input, target] : batch) {
    const std::vector<double> y = net.forward_cached(input, train_mode, rng, ws);
    if (y.size() != target.size())
      throw std::invalid_argument("l2_loss_grad: target size mismatch");
    dout.assign(y.size(), 0.0);
    for (size_t k = 0; k < y.size(); ++k) {
      const double e = y[k] - target[k];
      loss += e * e * inv_b;
      dout[k] = 2.0 * e * inv_b;
    }
    net.backward(ws, dout, &grads);
  }
  return {loss, std::move(grads)};
}

namespace {

struct AdamState {
  NeuralNet::Gradients m;
  NeuralNet::Gradients v;
  long t = 0;
};

void adam_step(NeuralNet& net, const NeuralNet::Gradients& g, AdamState& st,
               double lr, double l2_weight) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++st.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
  for (size_t l = 0; l < net.n_layers(); ++l) {
    auto& w = net.weights(l);
    auto& b = net.biases(l);
    for (size_t i = 0; i < w.size(); ++i) {
      const double grad = g.w[l][i] + l2_weight * w[i];
      double& m = st.m.w[l][i];
      double& v = st.v.w[l][i];
      m = beta1 * m + (1.0 - beta1) * grad;
      v = beta2 * v + (1.0 - beta2) * grad * grad;
      w[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
    }
    for (size_t i = 0; i < b.size(); ++i) {
      const double grad = g.b[l][i];
      double& m = st.m.b[l][i];
      double& v = st.v.b[l][i];
      m = beta1 * m + (1.0 - beta1) * grad;
      v = beta2 * v + (1.0 - beta2) * grad * grad;
      b[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
    }
  }
}

}  // namespace

std::vector<double> train(NeuralNet& net, const std::vector<Sample>& dataset,
                          const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("train: bad learning rate");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");

  Rng shuffle_rng(derive_seed(cfg.seed, 0));
  Rng dropout_rng(derive_seed(cfg.seed, 1));
  AdamState adam{net.zero_gradients(), net.zero_gradients(), 0};

  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  const size_t batch_size = std::max(1, cfg.batch_size);

  std::vector<double> curve;
  curve.reserve(static_cast<size_t>(cfg.epochs));
  std::vector<Sample> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    size_t n_batches = 0;
    for (size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      const size_t end = std::min(start + batch_size, order.size());
      for (size_t i = start; i < end; ++i) batch.push_back(dataset[order[i]]);
      auto [loss, grads] = l2_loss_grad(net, batch, &dropout_rng);
      adam_step(net, grads, adam, cfg.learning_rate, cfg.l2_weight);
      epoch_loss += loss;
      ++n_batches;
    }
    curve.push_back(epoch_loss / static_cast<double>(n_batches));
  }
  return curve;
}

namespace {
constexpr char kMagic[8] = {'K', 'P', 'N', 'E', 'T', '0', '0', '1'};

template <typename T>
void write_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("weight file truncated");
  return v;
}
}  // namespace

void save_weights(const NeuralNet& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out.write(kMagic, sizeof(kMagic));
  write_raw<uint32_t>(out, net.output_activation() == OutputActivation::Tanh ? 1 : 0);
  write_raw<double>(out, net.dropout_p());
  write_raw<uint32_t>(out, static_cast<uint32_t>(net.layer_dims().size()));
  for (int d : net.layer_dims()) write_raw<uint32_t>(out, static_cast<uint32_t>(d));
  for (size_t l = 0; l < net.n_layers(); ++l) {
    const auto& w = net.weights(l);
    const auto& b = net.biases(l);
    out.write(reinterpret_cast<const char*>(w.data()),
              static_cast<std::streamsize>(w.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(b.data()),
              static_cast<std::streamsize>(b.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

NeuralNet load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open weight file");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error(path + ": not a weight file");
  const auto act = read_raw<uint32_t>(in) == 1 ? OutputActivation::Tanh
                                               : OutputActivation::Identity;
  const double dropout_p = read_raw<double>(in);
  const auto n_dims = read_raw<uint32_t>(in);
  if (n_dims < 2 || n_dims > 64) throw std::runtime_error(path + ": bad layer count");
  std::vector<int> dims(n_dims);
  for (auto& d : dims) d = static_cast<int>(read_raw<uint32_t>(in));

  NeuralNet net(dims, act, dropout_p, 0);
  for (size_t l = 0; l < net.n_layers(); ++l) {
    auto& w = net.weights(l);
    auto& b = net.biases(l);
    in.read(reinterpret_cast<char*>(w.data()),
            static_cast<std::streamsize>(w.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(b.data()),
            static_cast<std::streamsize>(b.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": weight file truncated");
  }
  return net;
}

}  // namespace kinoplan
