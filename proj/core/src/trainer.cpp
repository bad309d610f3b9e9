#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "binrec/collab.hpp"
#include "binrec/error.hpp"
#include "binrec/eval.hpp"

namespace binrec {

std::string_view to_string(ScoringModel m) { return m == ScoringModel::binmf ? "binmf" : "mf"; }

std::string_view to_string(OptimizerKind o) { return o == OptimizerKind::adam ? "adam" : "momentum"; }

ScoringModel parse_scoring_model(std::string_view name) {
  if (name == "binmf") return ScoringModel::binmf;
  if (name == "mf") return ScoringModel::mf;
  throw ConfigError("unknown model: " + std::string(name) + " (expected binmf or mf)");
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "momentum") return OptimizerKind::momentum;
  throw ConfigError("unknown optimizer: " + std::string(name) + " (expected adam or momentum)");
}

double TrainConfig::resolved_temperature(std::size_t dim) const {
  return temperature.value_or(std::sqrt(static_cast<double>(dim)));
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (early_stop_patience == 0) throw ConfigError("early_stop_patience must be positive");
  if (temperature && !(*temperature > 0.0 && std::isfinite(*temperature))) {
    throw ConfigError("temperature must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw ConfigError("weight_decay must be >= 0");
}

namespace {

// Dense first-order optimizer over a fixed list of parameter buffers.
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, std::vector<std::span<double>> params)
      : cfg_(cfg), params_(std::move(params)) {
    for (const auto& p : params_) {
      first_.emplace_back(p.size(), 0.0);
      if (cfg_.optimizer == OptimizerKind::adam) second_.emplace_back(p.size(), 0.0);
    }
  }

  void step(const std::vector<std::span<const double>>& grads) {
    ++t_;
    const double lr = cfg_.learning_rate;
    const double wd = cfg_.weight_decay;
    if (cfg_.optimizer == OptimizerKind::adam) {
      constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
      for (std::size_t k = 0; k < params_.size(); ++k) {
        auto p = params_[k];
        const auto g = grads[k];
        auto& m = first_[k];
        auto& v = second_[k];
        for (std::size_t j = 0; j < p.size(); ++j) {
          const double gj = g[j] + wd * p[j];
          m[j] = beta1 * m[j] + (1.0 - beta1) * gj;
          v[j] = beta2 * v[j] + (1.0 - beta2) * gj * gj;
          p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
        }
      }
    } else {
      const double mu = cfg_.momentum;
      for (std::size_t k = 0; k < params_.size(); ++k) {
        auto p = params_[k];
        const auto g = grads[k];
        auto& vel = first_[k];
        for (std::size_t j = 0; j < p.size(); ++j) {
          vel[j] = mu * vel[j] + g[j] + wd * p[j];
          p[j] -= lr * vel[j];
        }
      }
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<std::span<double>> params_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  std::uint64_t t_ = 0;
};

template <typename M>
std::span<double> buffer(M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <typename M>
std::span<const double> cbuffer(const M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

double validation_auc(ScoringModel kind, const CollabModel& model, const BinarizationHead& head,
                      std::span<const IndexedExample> valid) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(valid.size());
  labels.reserve(valid.size());
  if (kind == ScoringModel::binmf) {
    // Ranking by the ±1 inner product equals ranking by any monotone link.
    const CodeBook codes = encode_all(model, head);
    for (const auto& ex : valid) {
      scores.push_back(static_cast<double>(signed_dot(codes.users.at(ex.user), codes.items.at(ex.item))));
      labels.push_back(ex.label);
    }
  } else {
    for (const auto& ex : valid) {
      scores.push_back(embed(model, ex.user, EntityKind::user).dot(embed(model, ex.item, EntityKind::item)));
      labels.push_back(ex.label);
    }
  }
  return auc(scores, labels);
}

void check_labels(std::span<const IndexedExample> train, std::span<const IndexedExample> valid) {
  if (train.empty()) throw DataError("training set is empty");
  if (valid.empty()) throw DataError("validation set is empty");
  std::size_t pos = 0;
  for (const auto& ex : train) {
    if (ex.label != 0 && ex.label != 1) throw DataError("training labels must be 0 or 1");
    pos += static_cast<std::size_t>(ex.label);
  }
  if (pos == 0 || pos == train.size()) {
    throw DataError("training labels are all " + std::to_string(pos == 0 ? 0 : 1) +
                    "; binary cross-entropy training needs both classes");
  }
}

TrainResult train_impl(ScoringModel kind, CollabModel model, BinarizationHead head,
                       std::span<const IndexedExample> train, std::span<const IndexedExample> valid,
                       const TrainConfig& cfg) {
  cfg.validate();
  check_labels(train, valid);
  if (head.dim() != model.dim() || static_cast<std::size_t>(head.weight.rows()) != model.dim()) {
    throw ConfigError("binarization head width does not match the embedding width");
  }

  const double tau = cfg.resolved_temperature(model.dim());
  const auto full_loss = [&](const CollabModel& m, const BinarizationHead& h) {
    return kind == ScoringModel::binmf ? binmf_loss(m, h, train, tau, Quantizer::sign) : mf_loss(m, train);
  };

  TrainResult result{model, head, {}};
  result.log.initial_loss = full_loss(model, head);
  if (cfg.max_epochs == 0) return result;

  double best_auc = validation_auc(kind, model, head, valid);
  result.log.best_valid_auc = best_auc;

  Gradients grads = Gradients::zeros_like(model, head);
  std::vector<std::span<double>> params{buffer(model.user_table), buffer(model.item_table)};
  std::vector<std::span<const double>> grad_views{cbuffer(grads.user_table), cbuffer(grads.item_table)};
  if (kind == ScoringModel::binmf) {
    params.push_back(buffer(head.weight));
    params.push_back(buffer(head.bias));
    grad_views.push_back(cbuffer(grads.weight));
    grad_views.push_back(cbuffer(grads.bias));
  }
  Optimizer optimizer(cfg, params);

  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<IndexedExample> batch;
  batch.reserve(cfg.batch_size);

  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(train[order[k]]);
      grads.set_zero();
      const double loss = kind == ScoringModel::binmf
                              ? binmf_loss_and_gradients(model, head, batch, tau, Quantizer::sign, grads)
                              : mf_loss_and_gradients(model, batch, grads);
      loss_sum += loss * static_cast<double>(batch.size());
      optimizer.step(grad_views);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.valid_auc = validation_auc(kind, model, head, valid);
    result.log.epochs.push_back(rec);

    if (rec.valid_auc > best_auc) {
      best_auc = rec.valid_auc;
      result.model = model;
      result.head = head;
      result.log.best_epoch = epoch;
      result.log.best_valid_auc = best_auc;
      stale = 0;
    } else if (++stale >= cfg.early_stop_patience) {
      break;
    }
  }
  return result;
}

}  // namespace

TrainResult train_binmf(CollabModel model, BinarizationHead head, std::span<const IndexedExample> train,
                        std::span<const IndexedExample> valid, const TrainConfig& cfg) {
  return train_impl(ScoringModel::binmf, std::move(model), std::move(head), train, valid, cfg);
}

TrainResult train_mf(CollabModel model, BinarizationHead head, std::span<const IndexedExample> train,
                     std::span<const IndexedExample> valid, const TrainConfig& cfg) {
  return train_impl(ScoringModel::mf, std::move(model), std::move(head), train, valid, cfg);
}

TrainResult train_model(ScoringModel kind, CollabModel model, BinarizationHead head,
                        std::span<const IndexedExample> train, std::span<const IndexedExample> valid,
                        const TrainConfig& cfg) {
  return train_impl(kind, std::move(model), std::move(head), train, valid, cfg);
}

}  // namespace binrec
