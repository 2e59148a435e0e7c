#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hopetk/features.hpp"
#include "hopetk/labels.hpp"
#include "hopetk/linear_models.hpp"

namespace hopetk {

// How the BiLSTM output feeds the softmax head.
enum class BilstmHead {
  final_state_concat,  // [last forward state, last backward state]
  sequence_concat,     // all per-step outputs flattened
};

struct NeuralConfig {
  int max_len = 100;
  int embed_dim = 100;
  bool freeze_embedding = false;
  int conv_filters = 128;
  int conv_kernel = 3;
  int pool_window = 5;
  int lstm_units = 100;
  double dropout = 0.2;
  BilstmHead head = BilstmHead::final_state_concat;

  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 32;
  int max_epochs = 30;
  int patience = 3;
  std::uint64_t seed = 42;

  int conv_steps() const { return max_len - conv_kernel + 1; }
  int pooled_steps() const { return conv_steps() / pool_window; }  // remainder dropped
  int head_input_dim() const {
    return head == BilstmHead::final_state_concat ? 2 * lstm_units
                                                  : pooled_steps() * 2 * lstm_units;
  }
  void validate() const;  // throws TrainError on inconsistent sizes
};

// One direction's parameters; gate order [input, forget, cell, output]
// stacked along columns.
struct LstmParams {
  Eigen::MatrixXd w_input;   // input_dim x 4H
  Eigen::MatrixXd w_hidden;  // H x 4H
  Eigen::MatrixXd bias;      // 1 x 4H
};

struct NeuralModel {
  NeuralConfig config;
  EmbeddingMatrix embedding;    // (V+2) x embed_dim, row 0 stays zero
  Eigen::MatrixXd conv_weight;  // (kernel*embed_dim) x filters
  Eigen::MatrixXd conv_bias;    // 1 x filters
  LstmParams lstm_fwd;
  LstmParams lstm_bwd;
  Eigen::MatrixXd head_weight;  // head_input_dim x classes
  Eigen::MatrixXd head_bias;    // 1 x classes
  std::vector<Label> classes;   // always kClassOrder
};

// Glorot-uniform weights, zero biases except the forget-gate bias at 1.
NeuralModel init_neural_model(const NeuralConfig& config, EmbeddingMatrix embedding);

// Named view over every parameter tensor, in a fixed order shared by the
// optimizer, the serializer and the gradient checks.
struct ParamRef {
  std::string name;
  Eigen::MatrixXd* tensor;
  bool trainable;
};
std::vector<ParamRef> parameter_refs(NeuralModel& model);

// Everything backward() needs from the matching forward() call.
struct ForwardCache {
  std::vector<std::vector<int>> sequences;
  std::vector<Eigen::MatrixXd> conv_input;  // per example: steps x (kernel*embed)
  std::vector<Eigen::MatrixXd> conv_pre;    // per example: steps x filters, pre-ReLU
  std::vector<Eigen::MatrixXi> pool_argmax; // per example: pooled x filters
  std::vector<Eigen::MatrixXd> x_steps;     // per step: batch x filters (pooled)
  struct LstmCache {
    std::vector<Eigen::MatrixXd> gate_i, gate_f, gate_g, gate_o;  // per step: batch x H
    std::vector<Eigen::MatrixXd> cell, hidden, cell_tanh;
  };
  LstmCache fwd, bwd;
  Eigen::MatrixXd head_input;    // batch x head_dim, after dropout
  Eigen::MatrixXd dropout_mask;  // batch x head_dim; empty in eval mode
  Eigen::MatrixXd probs;         // batch x classes
};

// Probability rows (each sums to 1). Dropout applies to the BiLSTM output
// only in train mode (inverted dropout, drawn from rng).
Eigen::MatrixXd neural_forward(const NeuralModel& model,
                               const std::vector<std::vector<int>>& batch, bool train_mode,
                               std::mt19937_64* rng = nullptr, ForwardCache* cache = nullptr);

// Mean cross-entropy of the batch (eval-mode forward).
double neural_loss(const NeuralModel& model, const std::vector<std::vector<int>>& batch,
                   const std::vector<int>& targets);

// Gradient tensors aligned with parameter_refs(); frozen tensors get zeros
// and the embedding padding row is always zero.
struct Gradients {
  std::vector<Eigen::MatrixXd> tensors;
  double loss = 0.0;
};
Gradients neural_backward(const NeuralModel& model, const ForwardCache& cache,
                          const std::vector<int>& targets);

struct AdamState {
  std::vector<Eigen::MatrixXd> m, v;
  std::int64_t step = 0;
};
void adam_step(NeuralModel& model, const Gradients& gradients, AdamState& state);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_f1 = 0.0;
};

struct TrainRecord {
  std::vector<EpochRecord> epochs;
  bool early_stopped = false;
  int best_epoch = 0;
};

std::string train_record_to_csv(const TrainRecord& record);

// Validation-F1 early stopping: stop after `patience` consecutive epochs
// without strict improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}
  // Returns true when training should stop after this epoch.
  bool update(double metric, int epoch);
  int best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_; }

 private:
  int patience_;
  double best_ = -1.0;
  int bad_epochs_ = 0;
  int best_epoch_ = 0;
};

// Minibatch Adam training with early stopping on validation weighted F1;
// the model is left at the best-on-validation parameters.
TrainRecord train_neural(NeuralModel& model, const std::vector<std::vector<int>>& train_seqs,
                         const std::vector<Label>& train_labels,
                         const std::vector<std::vector<int>>& valid_seqs,
                         const std::vector<Label>& valid_labels);

std::vector<Label> neural_predict(const NeuralModel& model,
                                  const std::vector<std::vector<int>>& seqs);

}  // namespace hopetk
