#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kinoplan/common.hpp"

namespace kinoplan {

enum class OutputActivation { Identity, Tanh };

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 100;
  uint64_t seed = 1;
  double l2_weight = 0.0;
};

// (input, target) pair.
using Sample = std::pair<std::vector<double>, std::vector<double>>;

// Fully-connected net, ReLU hidden layers, identity or tanh output.
// Dropout uses the inverted convention: masks scale by 1/(1-p) at train time
// so inference needs no rescale.
class NeuralNet {
 public:
  NeuralNet() = default;
  NeuralNet(std::vector<int> layer_dims, OutputActivation output_activation,
            double dropout_p, uint64_t init_seed);

  const std::vector<int>& layer_dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  OutputActivation output_activation() const { return output_activation_; }
  double dropout_p() const { return dropout_p_; }
  size_t n_layers() const { return weights_.size(); }

  // Weight matrix of layer l, row-major [out][in]; bias vector of layer l.
  std::vector<double>& weights(size_t l) { return weights_[l]; }
  std::vector<double>& biases(size_t l) { return biases_[l]; }
  const std::vector<double>& weights(size_t l) const { return weights_[l]; }
  const std::vector<double>& biases(size_t l) const { return biases_[l]; }

  // rng is only consulted when train_mode is true and dropout_p > 0.
  std::vector<double> forward(const std::vector<double>& input, bool train_mode = false,
                              Rng* rng = nullptr) const;

  // Inference over a batch; streams each weight row once per batch instead of
  // once per input. Equivalent to calling forward() per input.
  std::vector<std::vector<double>> forward_batch(
      const std::vector<std::vector<double>>& inputs) const;

  struct Workspace {
    std::vector<std::vector<double>> activations;  // [0]=input .. [L]=output
    std::vector<std::vector<double>> masks;        // dropout mask per hidden layer
  };
  std::vector<double> forward_cached(const std::vector<double>& input, bool train_mode,
                                     Rng* rng, Workspace& ws) const;

  struct Gradients {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;
    void accumulate(const Gradients& other, double scale = 1.0);
    void scale(double s);
  };
  Gradients zero_gradients() const;

  // Backprop of dLoss/dOutput through the cached forward pass. When dinput is
  // non-null it receives dLoss/dInput (used for the actor update).
  void backward(const Workspace& ws, const std::vector<double>& dloss_doutput,
                Gradients* grads, std::vector<double>* dinput = nullptr) const;

 private:
  std::vector<int> dims_;
  OutputActivation output_activation_ = OutputActivation::Identity;
  double dropout_p_ = 0.0;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> biases_;
};

// Mean over the batch of the squared error summed over output dims, plus its
// gradients by backpropagation. rng enables dropout (one mask per sample).
std::pair<double, NeuralNet::Gradients> l2_loss_grad(const NeuralNet& net,
                                                     const std::vector<Sample>& batch,
                                                     Rng* rng = nullptr);

// Adam on minibatches; returns the per-epoch mean training loss.
std::vector<double> train(NeuralNet& net, const std::vector<Sample>& dataset,
                          const TrainConfig& cfg);

// Binary container: layer dims header + little-endian 64-bit floats per layer.
void save_weights(const NeuralNet& net, const std::string& path);
NeuralNet load_weights(const std::string& path);

}  // namespace kinoplan
