// SPDX-License-Identifier: Apache-2.0
#include "csifb/nn/trainer.hpp"

#include <numeric>
#include <sstream>

#include "csifb/errors.hpp"
#include "csifb/metrics.hpp"
#include "csifb/rng.hpp"

namespace csifb::nn {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (!(initial_lr > 0)) throw ConfigError("train: learning rate must be > 0");
  if (plateau_patience < 1) throw ConfigError("train: plateau_patience must be >= 1");
  if (!(lr_factor > 0 && lr_factor <= 1)) throw ConfigError("train: lr_factor must be in (0, 1]");
}

template <typename T>
double batch_cosine_loss(const Mat<T>& target, const Mat<T>& output, int nt, int ns, Mat<T>* grad) {
  if (target.rows() != output.rows() || target.cols() != output.cols())
    throw ContractError("batch_cosine_loss: shape mismatch");
  if (target.cols() == 0) throw ContractError("batch_cosine_loss: empty batch");
  const Eigen::Index d = target.rows();
  const double inv_b = 1.0 / static_cast<double>(target.cols());
  if (grad) grad->resize(d, target.cols());
  std::vector<double> x(d), xh(d), g(d);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < target.cols(); ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      x[i] = static_cast<double>(target(i, j));
      xh[i] = static_cast<double>(output(i, j));
    }
    loss += cosine_loss_and_grad(x, xh, nt, ns, g);
    if (grad)
      for (Eigen::Index i = 0; i < d; ++i) (*grad)(i, j) = static_cast<T>(g[i] * inv_b);
  }
  return loss * inv_b;
}

template <typename T>
std::vector<double> evaluate_similarity(Model<T>& model, const Mat<T>& data, int chunk) {
  const int nt = model.spec().nt, ns = model.spec().ns;
  std::vector<double> out;
  out.reserve(data.cols());
  std::vector<double> x(data.rows()), xh(data.rows()), g(data.rows());
  for (Eigen::Index start = 0; start < data.cols(); start += chunk) {
    const Eigen::Index n = std::min<Eigen::Index>(chunk, data.cols() - start);
    const Mat<T> batch = data.middleCols(start, n);
    const Mat<T> y = model.forward(batch, Mode::eval).output;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        x[i] = static_cast<double>(batch(i, j));
        xh[i] = static_cast<double>(y(i, j));
      }
      out.push_back(-cosine_loss_and_grad(x, xh, nt, ns, g));
    }
  }
  return out;
}

template <typename T>
double evaluate_loss(Model<T>& model, const Mat<T>& data) {
  if (data.cols() == 0) throw ContractError("evaluate_loss: empty split");
  const std::vector<double> s = evaluate_similarity(model, data);
  return -std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

template <typename T>
TrainResult train(Model<T>& model, const Mat<T>& train_data, const Mat<T>& val_data,
                  const TrainConfig& config, const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (train_data.cols() == 0) throw ContractError("train: empty training split");
  if (val_data.cols() == 0) throw ContractError("train: empty validation split");
  TrainResult result;
  if (config.epochs == 0) return result;

  const int nt = model.spec().nt, ns = model.spec().ns;
  Adam<T> adam(model.params(), config.adam);
  Rng shuffle_rng(config.seed);
  model.reseed_quantizer(mix64(config.seed));

  std::vector<Mat<T>> best;
  auto snapshot = [&] {
    best.clear();
    for (const Param<T>* p : model.params()) best.push_back(p->value);
  };

  const Eigen::Index n = train_data.cols();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  double lr = config.initial_lr;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  Mat<T> batch, grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (Eigen::Index i = n - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.below(static_cast<std::uint64_t>(i) + 1)]);
    double loss_sum = 0.0;
    Eigen::Index seen = 0;
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(config.batch_size, n - start);
      batch.resize(train_data.rows(), b);
      for (Eigen::Index j = 0; j < b; ++j) batch.col(j) = train_data.col(order[start + j]);
      model.zero_grad();
      const ForwardResult<T> fr = model.forward(batch, Mode::train);
      loss_sum += batch_cosine_loss(batch, fr.output, nt, ns, &grad) * static_cast<double>(b);
      seen += b;
      model.backward(grad);
      adam.step(lr);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.val_loss = evaluate_loss(model, val_data);
    rec.lr = lr;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_loss < best_val) {
      best_val = rec.val_loss;
      result.best_epoch = epoch;
      since_best = 0;
      snapshot();
    } else if (++since_best >= config.plateau_patience) {
      lr *= config.lr_factor;
      since_best = 0;
    }
  }
  for (std::size_t k = 0; k < best.size(); ++k) model.params()[k]->value = best[k];
  result.best_val_loss = best_val;
  return result;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,train_loss,val_loss,lr\n";
  for (const EpochRecord& r : history)
    os << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.lr << '\n';
  return os.str();
}

#define CSIFB_INSTANTIATE(T)                                                                    \
  template double batch_cosine_loss<T>(const Mat<T>&, const Mat<T>&, int, int, Mat<T>*);        \
  template std::vector<double> evaluate_similarity<T>(Model<T>&, const Mat<T>&, int);           \
  template double evaluate_loss<T>(Model<T>&, const Mat<T>&);                                   \
  template TrainResult train<T>(Model<T>&, const Mat<T>&, const Mat<T>&, const TrainConfig&,    \
                                const std::function<void(const EpochRecord&)>&);
CSIFB_INSTANTIATE(float)
CSIFB_INSTANTIATE(double)
#undef CSIFB_INSTANTIATE

}  // namespace csifb::nn
