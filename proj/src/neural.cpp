#include "hopetk/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hopetk/metrics.hpp"

namespace hopetk {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return 1.0 / (1.0 + (-z.array()).exp());
}

Eigen::MatrixXd glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> uniform(-limit, limit);
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = uniform(rng);
  }
  return w;
}

LstmParams init_lstm(int input_dim, int units, std::mt19937_64& rng) {
  LstmParams p;
  p.w_input = glorot_uniform(input_dim, 4 * units, rng);
  p.w_hidden = glorot_uniform(units, 4 * units, rng);
  p.bias = Eigen::MatrixXd::Zero(1, 4 * units);
  p.bias.block(0, units, 1, units).setOnes();  // forget-gate bias
  return p;
}

// One direction of the BiLSTM over precomputed step inputs. `inputs[s]` is
// the batch matrix consumed at processing step s; the caller reverses the
// order for the backward direction.
void run_lstm(const LstmParams& p, const std::vector<const Eigen::MatrixXd*>& inputs, int units,
              ForwardCache::LstmCache& cache) {
  const auto steps = static_cast<int>(inputs.size());
  const auto batch = inputs.empty() ? 0 : inputs[0]->rows();
  const int H = units;

  cache.gate_i.resize(steps);
  cache.gate_f.resize(steps);
  cache.gate_g.resize(steps);
  cache.gate_o.resize(steps);
  cache.cell.resize(steps);
  cache.hidden.resize(steps);
  cache.cell_tanh.resize(steps);

  Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(batch, H);
  Eigen::MatrixXd c_prev = Eigen::MatrixXd::Zero(batch, H);
  for (int s = 0; s < steps; ++s) {
    Eigen::MatrixXd z = (*inputs[s]) * p.w_input + h_prev * p.w_hidden;
    z.rowwise() += p.bias.row(0);

    cache.gate_i[s] = sigmoid(z.block(0, 0, batch, H));
    cache.gate_f[s] = sigmoid(z.block(0, H, batch, H));
    cache.gate_g[s] = z.block(0, 2 * H, batch, H).array().tanh();
    cache.gate_o[s] = sigmoid(z.block(0, 3 * H, batch, H));

    cache.cell[s] = cache.gate_f[s].cwiseProduct(c_prev) +
                    cache.gate_i[s].cwiseProduct(cache.gate_g[s]);
    cache.cell_tanh[s] = cache.cell[s].array().tanh();
    cache.hidden[s] = cache.gate_o[s].cwiseProduct(cache.cell_tanh[s]);

    h_prev = cache.hidden[s];
    c_prev = cache.cell[s];
  }
}

// BPTT for one direction. dh_direct[s] may be empty (no direct head
// gradient at that step). Returns per-step input gradients in processing
// order; weight gradients accumulate into the provided tensors.
std::vector<Eigen::MatrixXd> lstm_backward(const LstmParams& p,
                                           const std::vector<const Eigen::MatrixXd*>& inputs,
                                           const ForwardCache::LstmCache& cache, int units,
                                           const std::vector<Eigen::MatrixXd>& dh_direct,
                                           Eigen::MatrixXd& d_w_input,
                                           Eigen::MatrixXd& d_w_hidden, Eigen::MatrixXd& d_bias) {
  const auto steps = static_cast<int>(inputs.size());
  const auto batch = inputs.empty() ? 0 : inputs[0]->rows();
  const int H = units;

  std::vector<Eigen::MatrixXd> d_inputs(static_cast<std::size_t>(steps));
  Eigen::MatrixXd dh_carry = Eigen::MatrixXd::Zero(batch, H);
  Eigen::MatrixXd dc_carry = Eigen::MatrixXd::Zero(batch, H);
  Eigen::MatrixXd dz(batch, 4 * H);

  for (int s = steps - 1; s >= 0; --s) {
    Eigen::MatrixXd dh = dh_carry;
    if (dh_direct[static_cast<std::size_t>(s)].size() > 0) {
      dh += dh_direct[static_cast<std::size_t>(s)];
    }

    const Eigen::MatrixXd& i = cache.gate_i[s];
    const Eigen::MatrixXd& f = cache.gate_f[s];
    const Eigen::MatrixXd& g = cache.gate_g[s];
    const Eigen::MatrixXd& o = cache.gate_o[s];
    const Eigen::MatrixXd& c_tanh = cache.cell_tanh[s];
    Eigen::MatrixXd c_prev = Eigen::MatrixXd::Zero(batch, H);
    if (s > 0) c_prev = cache.cell[s - 1];

    Eigen::MatrixXd dc = dc_carry;
    dc.array() += dh.array() * o.array() * (1.0 - c_tanh.array().square());
    const Eigen::MatrixXd do_ = dh.cwiseProduct(c_tanh);
    const Eigen::MatrixXd di = dc.cwiseProduct(g);
    const Eigen::MatrixXd dg = dc.cwiseProduct(i);
    const Eigen::MatrixXd df = dc.cwiseProduct(c_prev);

    dz.block(0, 0, batch, H) = (di.array() * i.array() * (1.0 - i.array())).matrix();
    dz.block(0, H, batch, H) = (df.array() * f.array() * (1.0 - f.array())).matrix();
    dz.block(0, 2 * H, batch, H) = (dg.array() * (1.0 - g.array().square())).matrix();
    dz.block(0, 3 * H, batch, H) = (do_.array() * o.array() * (1.0 - o.array())).matrix();

    d_w_input += inputs[s]->transpose() * dz;
    if (s > 0) d_w_hidden += cache.hidden[s - 1].transpose() * dz;
    d_bias += dz.colwise().sum();

    d_inputs[static_cast<std::size_t>(s)] = dz * p.w_input.transpose();
    dh_carry = dz * p.w_hidden.transpose();
    dc_carry = dc.cwiseProduct(f);
  }
  return d_inputs;
}

}  // namespace

void NeuralConfig::validate() const {
  if (max_len < 1 || embed_dim < 1 || conv_filters < 1 || conv_kernel < 1 || pool_window < 1 ||
      lstm_units < 1 || batch_size < 1 || max_epochs < 1 || patience < 1) {
    throw TrainError("neural config: all counts must be positive");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw TrainError("neural config: dropout must be in [0,1)");
  if (conv_kernel > max_len) throw TrainError("neural config: conv kernel exceeds max_len");
  if (pooled_steps() < 1) {
    throw TrainError("neural config: pooling window leaves no steps for the BiLSTM");
  }
}

NeuralModel init_neural_model(const NeuralConfig& config, EmbeddingMatrix embedding) {
  config.validate();
  if (embedding.rows.cols() != config.embed_dim) {
    throw TrainError("embedding dimension does not match the neural config");
  }
  NeuralModel model;
  model.config = config;
  model.embedding = std::move(embedding);
  model.embedding.trainable = !config.freeze_embedding;

  std::mt19937_64 rng(config.seed ^ 0xC0FFEEULL);
  model.conv_weight = glorot_uniform(config.conv_kernel * config.embed_dim, config.conv_filters, rng);
  model.conv_bias = Eigen::MatrixXd::Zero(1, config.conv_filters);
  model.lstm_fwd = init_lstm(config.conv_filters, config.lstm_units, rng);
  model.lstm_bwd = init_lstm(config.conv_filters, config.lstm_units, rng);
  model.head_weight = glorot_uniform(config.head_input_dim(), kNumClasses, rng);
  model.head_bias = Eigen::MatrixXd::Zero(1, kNumClasses);
  model.classes.assign(kClassOrder.begin(), kClassOrder.end());
  return model;
}

std::vector<ParamRef> parameter_refs(NeuralModel& model) {
  const bool embed_trainable = model.embedding.trainable;
  return {
      {"embedding", &model.embedding.rows, embed_trainable},
      {"conv_weight", &model.conv_weight, true},
      {"conv_bias", &model.conv_bias, true},
      {"lstm_fwd.w_input", &model.lstm_fwd.w_input, true},
      {"lstm_fwd.w_hidden", &model.lstm_fwd.w_hidden, true},
      {"lstm_fwd.bias", &model.lstm_fwd.bias, true},
      {"lstm_bwd.w_input", &model.lstm_bwd.w_input, true},
      {"lstm_bwd.w_hidden", &model.lstm_bwd.w_hidden, true},
      {"lstm_bwd.bias", &model.lstm_bwd.bias, true},
      {"head_weight", &model.head_weight, true},
      {"head_bias", &model.head_bias, true},
  };
}

Eigen::MatrixXd neural_forward(const NeuralModel& model,
                               const std::vector<std::vector<int>>& batch, bool train_mode,
                               std::mt19937_64* rng, ForwardCache* cache) {
  const NeuralConfig& cfg = model.config;
  const auto B = static_cast<Eigen::Index>(batch.size());
  const int T = cfg.max_len;
  const int L = cfg.conv_steps();
  const int P = cfg.pooled_steps();
  const int E = cfg.embed_dim;
  const int F = cfg.conv_filters;
  const int H = cfg.lstm_units;
  const int K = cfg.conv_kernel;

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.sequences = batch;
  c.conv_input.resize(batch.size());
  c.conv_pre.resize(batch.size());
  c.pool_argmax.resize(batch.size());
  c.x_steps.assign(static_cast<std::size_t>(P), Eigen::MatrixXd(B, F));

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const std::vector<int>& seq = batch[b];
    if (static_cast<int>(seq.size()) != T) {
      throw TrainError("neural_forward: sequence length does not match max_len");
    }
    // im2col: row t concatenates the embeddings of tokens t .. t+K-1.
    Eigen::MatrixXd& cin = c.conv_input[b];
    cin.resize(L, K * E);
    for (int t = 0; t < L; ++t) {
      for (int j = 0; j < K; ++j) {
        const int id = seq[static_cast<std::size_t>(t + j)];
        cin.block(t, j * E, 1, E) = model.embedding.rows.row(id);
      }
    }
    Eigen::MatrixXd& pre = c.conv_pre[b];
    pre = cin * model.conv_weight;
    pre.rowwise() += model.conv_bias.row(0);

    // ReLU then non-overlapping max-pool; remainder rows are dropped.
    Eigen::MatrixXi& argmax = c.pool_argmax[b];
    argmax.resize(P, F);
    for (int w = 0; w < P; ++w) {
      for (int f = 0; f < F; ++f) {
        int best_row = w * cfg.pool_window;
        double best = pre(best_row, f);
        for (int r = 1; r < cfg.pool_window; ++r) {
          const int row = w * cfg.pool_window + r;
          if (pre(row, f) > best) {
            best = pre(row, f);
            best_row = row;
          }
        }
        argmax(w, f) = best_row;
        c.x_steps[static_cast<std::size_t>(w)](static_cast<Eigen::Index>(b), f) =
            std::max(0.0, best);
      }
    }
  }

  std::vector<const Eigen::MatrixXd*> fwd_inputs(static_cast<std::size_t>(P));
  std::vector<const Eigen::MatrixXd*> bwd_inputs(static_cast<std::size_t>(P));
  for (int s = 0; s < P; ++s) {
    fwd_inputs[static_cast<std::size_t>(s)] = &c.x_steps[static_cast<std::size_t>(s)];
    bwd_inputs[static_cast<std::size_t>(s)] = &c.x_steps[static_cast<std::size_t>(P - 1 - s)];
  }
  run_lstm(model.lstm_fwd, fwd_inputs, H, c.fwd);
  run_lstm(model.lstm_bwd, bwd_inputs, H, c.bwd);

  Eigen::MatrixXd head_input(B, cfg.head_input_dim());
  if (cfg.head == BilstmHead::final_state_concat) {
    head_input.leftCols(H) = c.fwd.hidden[static_cast<std::size_t>(P - 1)];
    head_input.rightCols(H) = c.bwd.hidden[static_cast<std::size_t>(P - 1)];
  } else {
    for (int t = 0; t < P; ++t) {
      head_input.block(0, t * 2 * H, B, H) = c.fwd.hidden[static_cast<std::size_t>(t)];
      head_input.block(0, t * 2 * H + H, B, H) =
          c.bwd.hidden[static_cast<std::size_t>(P - 1 - t)];
    }
  }

  if (train_mode && cfg.dropout > 0.0) {
    if (rng == nullptr) throw TrainError("neural_forward: train mode dropout needs an rng");
    const double keep = 1.0 - cfg.dropout;
    std::bernoulli_distribution coin(keep);
    c.dropout_mask.resize(B, head_input.cols());
    for (Eigen::Index i = 0; i < B; ++i) {
      for (Eigen::Index j = 0; j < head_input.cols(); ++j) {
        c.dropout_mask(i, j) = coin(*rng) ? 1.0 / keep : 0.0;
      }
    }
    head_input = head_input.cwiseProduct(c.dropout_mask);
  } else {
    c.dropout_mask.resize(0, 0);
  }
  c.head_input = head_input;

  Eigen::MatrixXd logits = head_input * model.head_weight;
  logits.rowwise() += model.head_bias.row(0);
  Eigen::MatrixXd probs(B, logits.cols());
  for (Eigen::Index i = 0; i < B; ++i) {
    const double zmax = logits.row(i).maxCoeff();
    Eigen::ArrayXd e = (logits.row(i).array() - zmax).exp();
    probs.row(i) = (e / e.sum()).matrix();
  }
  c.probs = probs;
  return probs;
}

double neural_loss(const NeuralModel& model, const std::vector<std::vector<int>>& batch,
                   const std::vector<int>& targets) {
  const Eigen::MatrixXd probs = neural_forward(model, batch, false);
  double loss = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    loss -= std::log(std::max(probs(static_cast<Eigen::Index>(i), targets[i]), 1e-300));
  }
  return loss / static_cast<double>(targets.size());
}

Gradients neural_backward(const NeuralModel& model, const ForwardCache& cache,
                          const std::vector<int>& targets) {
  const NeuralConfig& cfg = model.config;
  const auto B = static_cast<Eigen::Index>(cache.sequences.size());
  const int L = cfg.conv_steps();
  const int P = cfg.pooled_steps();
  const int E = cfg.embed_dim;
  const int F = cfg.conv_filters;
  const int H = cfg.lstm_units;
  const int K = cfg.conv_kernel;

  Gradients grads;
  grads.tensors.reserve(11);
  Eigen::MatrixXd d_embedding =
      Eigen::MatrixXd::Zero(model.embedding.rows.rows(), model.embedding.rows.cols());
  Eigen::MatrixXd d_conv_w = Eigen::MatrixXd::Zero(K * E, F);
  Eigen::MatrixXd d_conv_b = Eigen::MatrixXd::Zero(1, F);
  Eigen::MatrixXd d_fwd_wi = Eigen::MatrixXd::Zero(F, 4 * H);
  Eigen::MatrixXd d_fwd_wh = Eigen::MatrixXd::Zero(H, 4 * H);
  Eigen::MatrixXd d_fwd_b = Eigen::MatrixXd::Zero(1, 4 * H);
  Eigen::MatrixXd d_bwd_wi = Eigen::MatrixXd::Zero(F, 4 * H);
  Eigen::MatrixXd d_bwd_wh = Eigen::MatrixXd::Zero(H, 4 * H);
  Eigen::MatrixXd d_bwd_b = Eigen::MatrixXd::Zero(1, 4 * H);

  // Softmax cross-entropy: dZ = (p - onehot) / batch.
  Eigen::MatrixXd dz = cache.probs;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < B; ++i) {
    dz(i, targets[static_cast<std::size_t>(i)]) -= 1.0;
    loss -= std::log(std::max(cache.probs(i, targets[static_cast<std::size_t>(i)]), 1e-300));
  }
  dz /= static_cast<double>(B);
  grads.loss = loss / static_cast<double>(B);

  Eigen::MatrixXd d_head_w = cache.head_input.transpose() * dz;
  Eigen::MatrixXd d_head_b = dz.colwise().sum();
  Eigen::MatrixXd d_head_input = dz * model.head_weight.transpose();
  if (cache.dropout_mask.size() > 0) {
    d_head_input = d_head_input.cwiseProduct(cache.dropout_mask);
  }

  // Scatter head gradient onto per-step hidden-state gradients.
  std::vector<Eigen::MatrixXd> dh_fwd(static_cast<std::size_t>(P));
  std::vector<Eigen::MatrixXd> dh_bwd(static_cast<std::size_t>(P));
  if (cfg.head == BilstmHead::final_state_concat) {
    dh_fwd[static_cast<std::size_t>(P - 1)] = d_head_input.leftCols(H);
    dh_bwd[static_cast<std::size_t>(P - 1)] = d_head_input.rightCols(H);
  } else {
    for (int t = 0; t < P; ++t) {
      dh_fwd[static_cast<std::size_t>(t)] = d_head_input.block(0, t * 2 * H, B, H);
      dh_bwd[static_cast<std::size_t>(P - 1 - t)] = d_head_input.block(0, t * 2 * H + H, B, H);
    }
  }

  std::vector<const Eigen::MatrixXd*> fwd_inputs(static_cast<std::size_t>(P));
  std::vector<const Eigen::MatrixXd*> bwd_inputs(static_cast<std::size_t>(P));
  for (int s = 0; s < P; ++s) {
    fwd_inputs[static_cast<std::size_t>(s)] = &cache.x_steps[static_cast<std::size_t>(s)];
    bwd_inputs[static_cast<std::size_t>(s)] = &cache.x_steps[static_cast<std::size_t>(P - 1 - s)];
  }
  const std::vector<Eigen::MatrixXd> dx_fwd = lstm_backward(
      model.lstm_fwd, fwd_inputs, cache.fwd, H, dh_fwd, d_fwd_wi, d_fwd_wh, d_fwd_b);
  const std::vector<Eigen::MatrixXd> dx_bwd = lstm_backward(
      model.lstm_bwd, bwd_inputs, cache.bwd, H, dh_bwd, d_bwd_wi, d_bwd_wh, d_bwd_b);

  // Combine both directions into per-step pooled-input gradients.
  std::vector<Eigen::MatrixXd> d_pooled(static_cast<std::size_t>(P));
  for (int t = 0; t < P; ++t) {
    d_pooled[static_cast<std::size_t>(t)] =
        dx_fwd[static_cast<std::size_t>(t)] + dx_bwd[static_cast<std::size_t>(P - 1 - t)];
  }

  const bool embed_trainable = model.embedding.trainable;
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto bu = static_cast<std::size_t>(b);
    // Max-pool routes gradient to the argmax rows only; ReLU gates it.
    Eigen::MatrixXd d_pre = Eigen::MatrixXd::Zero(L, F);
    const Eigen::MatrixXd& pre = cache.conv_pre[bu];
    for (int w = 0; w < P; ++w) {
      for (int f = 0; f < F; ++f) {
        const int row = cache.pool_argmax[bu](w, f);
        if (pre(row, f) > 0.0) {
          d_pre(row, f) += d_pooled[static_cast<std::size_t>(w)](b, f);
        }
      }
    }

    d_conv_w += cache.conv_input[bu].transpose() * d_pre;
    d_conv_b += d_pre.colwise().sum();

    if (embed_trainable) {
      const Eigen::MatrixXd d_cin = d_pre * model.conv_weight.transpose();
      const std::vector<int>& seq = cache.sequences[bu];
      for (int t = 0; t < L; ++t) {
        for (int j = 0; j < K; ++j) {
          const int id = seq[static_cast<std::size_t>(t + j)];
          if (id == 0) continue;  // padding row gradient stays zero
          d_embedding.row(id) += d_cin.block(t, j * E, 1, E);
        }
      }
    }
  }

  grads.tensors.push_back(std::move(d_embedding));
  grads.tensors.push_back(std::move(d_conv_w));
  grads.tensors.push_back(std::move(d_conv_b));
  grads.tensors.push_back(std::move(d_fwd_wi));
  grads.tensors.push_back(std::move(d_fwd_wh));
  grads.tensors.push_back(std::move(d_fwd_b));
  grads.tensors.push_back(std::move(d_bwd_wi));
  grads.tensors.push_back(std::move(d_bwd_wh));
  grads.tensors.push_back(std::move(d_bwd_b));
  grads.tensors.push_back(std::move(d_head_w));
  grads.tensors.push_back(std::move(d_head_b));
  return grads;
}

void adam_step(NeuralModel& model, const Gradients& gradients, AdamState& state) {
  const NeuralConfig& cfg = model.config;
  std::vector<ParamRef> params = parameter_refs(model);
  if (state.m.empty()) {
    for (const ParamRef& p : params) {
      state.m.emplace_back(Eigen::MatrixXd::Zero(p.tensor->rows(), p.tensor->cols()));
      state.v.emplace_back(Eigen::MatrixXd::Zero(p.tensor->rows(), p.tensor->cols()));
    }
  }
  state.step++;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    const Eigen::MatrixXd& g = gradients.tensors[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g.cwiseProduct(g);
    const Eigen::ArrayXXd m_hat = state.m[i].array() / correction1;
    const Eigen::ArrayXXd v_hat = state.v[i].array() / correction2;
    params[i].tensor->array() -=
        cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
  }
}

std::string train_record_to_csv(const TrainRecord& record) {
  std::ostringstream out;
  out << "epoch,loss,valid_f1\n";
  out.precision(12);
  for (const EpochRecord& e : record.epochs) {
    out << e.epoch << ',' << e.train_loss << ',' << e.valid_f1 << '\n';
  }
  return out.str();
}

bool EarlyStopper::update(double metric, int epoch) {
  if (metric > best_) {
    best_ = metric;
    best_epoch_ = epoch;
    bad_epochs_ = 0;
    return false;
  }
  bad_epochs_++;
  return bad_epochs_ >= patience_;
}

namespace {

std::vector<int> class_targets(const std::vector<Label>& labels) {
  std::vector<int> targets(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    targets[i] = static_cast<int>(labels[i]);
  }
  return targets;
}

double validation_weighted_f1(const NeuralModel& model,
                              const std::vector<std::vector<int>>& seqs,
                              const std::vector<Label>& labels) {
  const std::vector<Label> predicted = neural_predict(model, seqs);
  return classification_report(confusion_matrix(labels, predicted)).weighted_f1;
}

}  // namespace

TrainRecord train_neural(NeuralModel& model, const std::vector<std::vector<int>>& train_seqs,
                         const std::vector<Label>& train_labels,
                         const std::vector<std::vector<int>>& valid_seqs,
                         const std::vector<Label>& valid_labels) {
  if (train_seqs.empty() || valid_seqs.empty()) throw TrainError("train_neural: empty corpus");
  if (train_seqs.size() != train_labels.size() || valid_seqs.size() != valid_labels.size()) {
    throw TrainError("train_neural: sequences and labels differ in length");
  }
  const NeuralConfig& cfg = model.config;
  const std::vector<int> targets = class_targets(train_labels);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_seqs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainRecord record;
  EarlyStopper stopper(cfg.patience);
  AdamState adam;
  std::vector<Eigen::MatrixXd> best_params;

  const auto snapshot = [&]() {
    best_params.clear();
    for (const ParamRef& p : parameter_refs(model)) best_params.push_back(*p.tensor);
  };

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<std::vector<int>> batch;
      std::vector<int> batch_targets;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(train_seqs[order[i]]);
        batch_targets.push_back(targets[order[i]]);
      }

      ForwardCache cache;
      neural_forward(model, batch, true, &rng, &cache);
      Gradients grads = neural_backward(model, cache, batch_targets);
      if (!std::isfinite(grads.loss)) {
        throw TrainError("train_neural: loss diverged (non-finite) at epoch " +
                         std::to_string(epoch));
      }
      adam_step(model, grads, adam);
      epoch_loss += grads.loss * static_cast<double>(batch.size());
      seen += batch.size();
    }

    EpochRecord er;
    er.epoch = epoch;
    er.train_loss = epoch_loss / static_cast<double>(seen);
    er.valid_f1 = validation_weighted_f1(model, valid_seqs, valid_labels);
    record.epochs.push_back(er);

    const bool stop = stopper.update(er.valid_f1, epoch);
    if (stopper.best_epoch() == epoch) snapshot();
    if (stop) {
      record.early_stopped = true;
      break;
    }
  }

  record.best_epoch = stopper.best_epoch();
  if (!best_params.empty()) {
    std::vector<ParamRef> params = parameter_refs(model);
    for (std::size_t i = 0; i < params.size(); ++i) *params[i].tensor = best_params[i];
  }
  return record;
}

std::vector<Label> neural_predict(const NeuralModel& model,
                                  const std::vector<std::vector<int>>& seqs) {
  std::vector<Label> out;
  out.reserve(seqs.size());
  const std::size_t batch_size = static_cast<std::size_t>(model.config.batch_size);
  for (std::size_t start = 0; start < seqs.size(); start += batch_size) {
    const std::size_t end = std::min(seqs.size(), start + batch_size);
    const std::vector<std::vector<int>> batch(seqs.begin() + static_cast<std::ptrdiff_t>(start),
                                              seqs.begin() + static_cast<std::ptrdiff_t>(end));
    const Eigen::MatrixXd probs = neural_forward(model, batch, false);
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      int best = 0;
      for (int k = 1; k < probs.cols(); ++k) {
        if (probs(i, k) > probs(i, best)) best = k;
      }
      out.push_back(model.classes[static_cast<std::size_t>(best)]);
    }
  }
  return out;
}

}  // namespace hopetk
