// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "csifb/nn/adam.hpp"
#include "csifb/nn/model.hpp"

namespace csifb::nn {

struct TrainConfig {
  int batch_size = 256;
  int epochs = 200;
  double initial_lr = 1e-3;
  int plateau_patience = 50;
  double lr_factor = 0.5;
  AdamConfig adam{};
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_val_loss = 0.0;
};

/// Mean cosine loss over the batch columns and its gradient w.r.t. the
/// network output (already divided by the batch size).
template <typename T>
double batch_cosine_loss(const Mat<T>& target, const Mat<T>& output, int nt, int ns, Mat<T>* grad);

/// Per-sample cosine similarity (rho_s or rho_m) of eval-mode reconstructions.
template <typename T>
std::vector<double> evaluate_similarity(Model<T>& model, const Mat<T>& data, int chunk = 1024);

/// Mean eval-mode loss (= -mean similarity).
template <typename T>
double evaluate_loss(Model<T>& model, const Mat<T>& data);

/// Seeded shuffled minibatches, Adam, validation each epoch, learning rate
/// scaled by lr_factor after plateau_patience epochs without a strict
/// validation improvement. The model ends holding the best-validation
/// parameters (unchanged when epochs == 0).
template <typename T>
TrainResult train(Model<T>& model, const Mat<T>& train_data, const Mat<T>& val_data,
                  const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

std::string history_csv(const std::vector<EpochRecord>& history);

}  // namespace csifb::nn
