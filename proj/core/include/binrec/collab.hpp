#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "binrec/binary_code.hpp"
#include "binrec/dataset.hpp"

namespace binrec {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class EntityKind { user, item };

std::string_view to_string(EntityKind kind);

// Latent factor tables, one row per dense user / item index.
struct CollabModel {
  RowMatrix user_table;
  RowMatrix item_table;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(user_table.cols()); }
  std::size_t n_users() const noexcept { return static_cast<std::size_t>(user_table.rows()); }
  std::size_t n_items() const noexcept { return static_cast<std::size_t>(item_table.rows()); }
};

// Fully connected layer + tanh feeding the sign quantizer.
struct BinarizationHead {
  RowMatrix weight;  // d x d
  Vector bias;       // d

  std::size_t dim() const noexcept { return static_cast<std::size_t>(bias.size()); }
};

/// Embeddings ~ N(0, 0.01^2); W = random orthogonal scaled by `weight_scale`; b = 0.
/// Deterministic for a given seed. Throws ConfigError on zero dimensions.
std::pair<CollabModel, BinarizationHead> init_model(std::size_t n_users, std::size_t n_items, std::size_t dim,
                                                    std::uint64_t seed, double weight_scale = 1.0);

/// Row view into the user or item table. Throws std::out_of_range on a bad index.
Eigen::Map<const Vector> embed(const CollabModel& model, std::size_t index, EntityKind kind);
Eigen::Map<Vector> embed_mut(CollabModel& model, std::size_t index, EntityKind kind);

/// tanh(W e + b), before quantization.
Vector activations(const BinarizationHead& head, const Eigen::Ref<const Vector>& e);

/// bit_j = 1 iff activation_j > 0. Throws DataError on non-finite input.
BinaryCode binarize(const BinarizationHead& head, const Eigen::Ref<const Vector>& e);
BinaryCode sign_code(const Eigen::Ref<const Vector>& pre_sign);

double logistic(double x) noexcept;

/// logistic(±1 dot / temperature). Throws std::invalid_argument on width mismatch.
double score_binmf(const BinaryCode& code_u, const BinaryCode& code_i, double temperature);

/// logistic(e_u . e_i). Throws std::invalid_argument on width mismatch.
double score_mf(const Eigen::Ref<const Vector>& e_u, const Eigen::Ref<const Vector>& e_i);

/// Backward rule for the sign quantizer: the upstream gradient passes through unchanged.
Vector ste_backward(const Eigen::Ref<const Vector>& upstream);

// Every user and item code, indexed like the model tables.
struct CodeBook {
  std::vector<BinaryCode> users;
  std::vector<BinaryCode> items;

  std::size_t size() const noexcept { return users.size() + items.size(); }
  const BinaryCode& lookup(std::size_t index, EntityKind kind) const;
};

CodeBook encode_all(const CollabModel& model, const BinarizationHead& head);

// --- training -----------------------------------------------------------------

struct IndexedExample {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  int label = 0;
};

std::vector<IndexedExample> index_rows(const SplitSet& split, Partition partition);

enum class ScoringModel { binmf, mf };
enum class OptimizerKind { adam, momentum };

std::string_view to_string(ScoringModel m);
std::string_view to_string(OptimizerKind o);
ScoringModel parse_scoring_model(std::string_view name);
OptimizerKind parse_optimizer(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 1024;
  std::size_t max_epochs = 50;
  std::size_t early_stop_patience = 5;
  // Score scaling for BinMF; unset means sqrt(d).
  std::optional<double> temperature;
  std::uint64_t seed = 42;
  OptimizerKind optimizer = OptimizerKind::adam;
  double momentum = 0.9;
  double weight_decay = 0.0;

  double resolved_temperature(std::size_t dim) const;
  /// Throws ConfigError if any field is out of range.
  void validate() const;
};

// How the forward pass quantizes tanh activations before the inner product.
enum class Quantizer {
  sign,      // ±1 codes, straight-through backward
  identity,  // smooth surrogate: the activations themselves
};

// Gradients with the same shapes as the parameters they belong to.
struct Gradients {
  RowMatrix user_table;
  RowMatrix item_table;
  RowMatrix weight;
  Vector bias;

  static Gradients zeros_like(const CollabModel& model, const BinarizationHead& head);
  void set_zero();
};

/// Mean BCE over the batch for the BinMF objective, accumulating parameter
/// gradients into `grads` (which must be zeroed by the caller). With
/// Quantizer::sign the sign step uses the straight-through rule.
double binmf_loss_and_gradients(const CollabModel& model, const BinarizationHead& head,
                                std::span<const IndexedExample> batch, double temperature, Quantizer quantizer,
                                Gradients& grads);

/// Mean BCE for the plain MF objective logistic(e_u . e_i); head gradients stay zero.
double mf_loss_and_gradients(const CollabModel& model, std::span<const IndexedExample> batch, Gradients& grads);

/// Mean BCE without gradients.
double binmf_loss(const CollabModel& model, const BinarizationHead& head, std::span<const IndexedExample> batch,
                  double temperature, Quantizer quantizer);
double mf_loss(const CollabModel& model, std::span<const IndexedExample> batch);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_auc = 0.0;
};

struct TrainingLog {
  double initial_loss = 0.0;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0 = the initial parameters
  std::optional<double> best_valid_auc;
};

struct TrainResult {
  CollabModel model;
  BinarizationHead head;
  TrainingLog log;
};

/// Minibatch training on mean BCE with early stopping on validation AUC.
/// Returns the best-validation parameters. Throws DataError when the training
/// labels are single-class or the validation set has no AUC.
TrainResult train_binmf(CollabModel model, BinarizationHead head, std::span<const IndexedExample> train,
                        std::span<const IndexedExample> valid, const TrainConfig& cfg);

TrainResult train_mf(CollabModel model, BinarizationHead head, std::span<const IndexedExample> train,
                     std::span<const IndexedExample> valid, const TrainConfig& cfg);

TrainResult train_model(ScoringModel kind, CollabModel model, BinarizationHead head,
                        std::span<const IndexedExample> train, std::span<const IndexedExample> valid,
                        const TrainConfig& cfg);

}  // namespace binrec
