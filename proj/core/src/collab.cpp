#include "binrec/collab.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/QR>

#include "binrec/error.hpp"

namespace binrec {

namespace {

constexpr double kEmbeddingScale = 0.01;

// Numerically stable log(1 + exp(x)).
double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double bce_with_logit(double logit, int label) noexcept {
  return softplus(logit) - static_cast<double>(label) * logit;
}

void check_index(std::size_t index, std::size_t rows, EntityKind kind) {
  if (index >= rows) {
    throw std::out_of_range(std::string(to_string(kind)) + " index " + std::to_string(index) +
                            " out of range (table has " + std::to_string(rows) + " rows)");
  }
}

Vector quantize(const Vector& a, Quantizer q) {
  if (q == Quantizer::identity) return a;
  return a.unaryExpr([](double v) { return v > 0.0 ? 1.0 : -1.0; });
}

struct HeadForward {
  Vector activation;  // tanh(W e + b)
  Vector quantized;   // ±1 or the activation itself
};

HeadForward head_forward(const BinarizationHead& head, const Eigen::Ref<const Vector>& e, Quantizer q) {
  HeadForward f;
  f.activation = activations(head, e);
  f.quantized = quantize(f.activation, q);
  return f;
}

// Propagates d loss / d quantized back through the sign (STE), tanh and the
// affine layer, accumulating into the head and embedding-row gradients.
void head_backward(const BinarizationHead& head, const Eigen::Ref<const Vector>& e, const HeadForward& f,
                   const Vector& d_quantized, Gradients& grads, Eigen::Map<Vector> d_embedding) {
  const Vector d_activation = ste_backward(d_quantized);
  const Vector d_pre = d_activation.cwiseProduct((1.0 - f.activation.array().square()).matrix());
  grads.weight.noalias() += d_pre * e.transpose();
  grads.bias += d_pre;
  d_embedding.noalias() += head.weight.transpose() * d_pre;
}

Eigen::Map<Vector> grad_row(RowMatrix& table, std::uint32_t row) {
  return {table.row(row).data(), table.cols()};
}

void check_batch(const CollabModel& model, std::span<const IndexedExample> batch) {
  for (const auto& ex : batch) {
    check_index(ex.user, model.n_users(), EntityKind::user);
    check_index(ex.item, model.n_items(), EntityKind::item);
  }
}

}  // namespace

std::string_view to_string(EntityKind kind) { return kind == EntityKind::user ? "user" : "item"; }

std::pair<CollabModel, BinarizationHead> init_model(std::size_t n_users, std::size_t n_items, std::size_t dim,
                                                    std::uint64_t seed, double weight_scale) {
  if (n_users == 0 || n_items == 0 || dim == 0) {
    throw ConfigError("init_model: n_users, n_items and d must all be positive");
  }
  if (!(weight_scale > 0.0) || !std::isfinite(weight_scale)) {
    throw ConfigError("init_model: weight scale must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto draw = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    RowMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * normal(rng);
    return m;
  };

  const auto d = static_cast<Eigen::Index>(dim);
  CollabModel model;
  model.user_table = draw(static_cast<Eigen::Index>(n_users), d, kEmbeddingScale);
  model.item_table = draw(static_cast<Eigen::Index>(n_items), d, kEmbeddingScale);

  // Orthogonal factor of a Gaussian matrix keeps early codes diverse.
  const Eigen::MatrixXd gaussian = draw(d, d, 1.0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  const Eigen::MatrixXd q = qr.householderQ();
  BinarizationHead head;
  head.weight = weight_scale * q;
  head.bias = Vector::Zero(d);
  return {std::move(model), std::move(head)};
}

Eigen::Map<const Vector> embed(const CollabModel& model, std::size_t index, EntityKind kind) {
  const RowMatrix& table = kind == EntityKind::user ? model.user_table : model.item_table;
  check_index(index, static_cast<std::size_t>(table.rows()), kind);
  return {table.row(static_cast<Eigen::Index>(index)).data(), table.cols()};
}

Eigen::Map<Vector> embed_mut(CollabModel& model, std::size_t index, EntityKind kind) {
  RowMatrix& table = kind == EntityKind::user ? model.user_table : model.item_table;
  check_index(index, static_cast<std::size_t>(table.rows()), kind);
  return {table.row(static_cast<Eigen::Index>(index)).data(), table.cols()};
}

Vector activations(const BinarizationHead& head, const Eigen::Ref<const Vector>& e) {
  if (e.size() != head.weight.cols()) {
    throw std::invalid_argument("embedding width " + std::to_string(e.size()) + " does not match head width " +
                                std::to_string(head.weight.cols()));
  }
  return (head.weight * e + head.bias).array().tanh().matrix();
}

BinaryCode sign_code(const Eigen::Ref<const Vector>& pre_sign) {
  BinaryCode code(static_cast<std::size_t>(pre_sign.size()));
  for (Eigen::Index j = 0; j < pre_sign.size(); ++j) code.set(static_cast<std::size_t>(j), pre_sign[j] > 0.0);
  return code;
}

BinaryCode binarize(const BinarizationHead& head, const Eigen::Ref<const Vector>& e) {
  if (!e.allFinite()) throw DataError("binarize: embedding contains non-finite values");
  return sign_code(activations(head, e));
}

double logistic(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

double score_binmf(const BinaryCode& code_u, const BinaryCode& code_i, double temperature) {
  return logistic(static_cast<double>(signed_dot(code_u, code_i)) / temperature);
}

double score_mf(const Eigen::Ref<const Vector>& e_u, const Eigen::Ref<const Vector>& e_i) {
  if (e_u.size() != e_i.size()) {
    throw std::invalid_argument("embedding width mismatch: " + std::to_string(e_u.size()) + " vs " +
                                std::to_string(e_i.size()));
  }
  return logistic(e_u.dot(e_i));
}

Vector ste_backward(const Eigen::Ref<const Vector>& upstream) { return upstream; }

const BinaryCode& CodeBook::lookup(std::size_t index, EntityKind kind) const {
  const auto& codes = kind == EntityKind::user ? users : items;
  check_index(index, codes.size(), kind);
  return codes[index];
}

CodeBook encode_all(const CollabModel& model, const BinarizationHead& head) {
  CodeBook book;
  book.users.reserve(model.n_users());
  book.items.reserve(model.n_items());
  for (std::size_t u = 0; u < model.n_users(); ++u) book.users.push_back(binarize(head, embed(model, u, EntityKind::user)));
  for (std::size_t i = 0; i < model.n_items(); ++i) book.items.push_back(binarize(head, embed(model, i, EntityKind::item)));
  return book;
}

std::vector<IndexedExample> index_rows(const SplitSet& split, Partition partition) {
  const auto& rows = split.rows(partition);
  std::vector<IndexedExample> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({split.users.at(r.user_id), split.items.at(r.item_id), r.label});
  return out;
}

Gradients Gradients::zeros_like(const CollabModel& model, const BinarizationHead& head) {
  Gradients g;
  g.user_table = RowMatrix::Zero(model.user_table.rows(), model.user_table.cols());
  g.item_table = RowMatrix::Zero(model.item_table.rows(), model.item_table.cols());
  g.weight = RowMatrix::Zero(head.weight.rows(), head.weight.cols());
  g.bias = Vector::Zero(head.bias.size());
  return g;
}

void Gradients::set_zero() {
  user_table.setZero();
  item_table.setZero();
  weight.setZero();
  bias.setZero();
}

double binmf_loss_and_gradients(const CollabModel& model, const BinarizationHead& head,
                                std::span<const IndexedExample> batch, double temperature, Quantizer quantizer,
                                Gradients& grads) {
  if (batch.empty()) return 0.0;
  check_batch(model, batch);
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto& ex : batch) {
    const auto e_u = embed(model, ex.user, EntityKind::user);
    const auto e_i = embed(model, ex.item, EntityKind::item);
    const HeadForward fu = head_forward(head, e_u, quantizer);
    const HeadForward fi = head_forward(head, e_i, quantizer);

    const double logit = fu.quantized.dot(fi.quantized) / temperature;
    loss += bce_with_logit(logit, ex.label);

    const double d_dot = (logistic(logit) - ex.label) / (n * temperature);
    const Vector d_qu = d_dot * fi.quantized;
    const Vector d_qi = d_dot * fu.quantized;
    head_backward(head, e_u, fu, d_qu, grads, grad_row(grads.user_table, ex.user));
    head_backward(head, e_i, fi, d_qi, grads, grad_row(grads.item_table, ex.item));
  }
  return loss / n;
}

double mf_loss_and_gradients(const CollabModel& model, std::span<const IndexedExample> batch, Gradients& grads) {
  if (batch.empty()) return 0.0;
  check_batch(model, batch);
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto& ex : batch) {
    const auto e_u = embed(model, ex.user, EntityKind::user);
    const auto e_i = embed(model, ex.item, EntityKind::item);
    const double logit = e_u.dot(e_i);
    loss += bce_with_logit(logit, ex.label);
    const double d_logit = (logistic(logit) - ex.label) / n;
    grads.user_table.row(ex.user) += d_logit * e_i.transpose();
    grads.item_table.row(ex.item) += d_logit * e_u.transpose();
  }
  return loss / n;
}

double binmf_loss(const CollabModel& model, const BinarizationHead& head, std::span<const IndexedExample> batch,
                  double temperature, Quantizer quantizer) {
  if (batch.empty()) return 0.0;
  check_batch(model, batch);
  double loss = 0.0;
  for (const auto& ex : batch) {
    const Vector qu = quantize(activations(head, embed(model, ex.user, EntityKind::user)), quantizer);
    const Vector qi = quantize(activations(head, embed(model, ex.item, EntityKind::item)), quantizer);
    loss += bce_with_logit(qu.dot(qi) / temperature, ex.label);
  }
  return loss / static_cast<double>(batch.size());
}

double mf_loss(const CollabModel& model, std::span<const IndexedExample> batch) {
  if (batch.empty()) return 0.0;
  check_batch(model, batch);
  double loss = 0.0;
  for (const auto& ex : batch) {
    loss += bce_with_logit(embed(model, ex.user, EntityKind::user).dot(embed(model, ex.item, EntityKind::item)),
                           ex.label);
  }
  return loss / static_cast<double>(batch.size());
}

}  // namespace binrec
