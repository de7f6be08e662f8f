#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "satire/autodiff.hpp"
#include "satire/corpus.hpp"

namespace satire {

enum class Variant { v4LHN, v4LHNP, v4LHND, v4LHNPD };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);
bool has_paragraph_features(Variant v);
bool has_document_features(Variant v);

struct ModelConfig {
  Variant variant = Variant::v4LHNPD;
  std::size_t char_embed_dim = 30;
  std::size_t word_embed_dim = 100;
  std::size_t filters = 30;
  std::size_t window = 3;
  std::size_t hidden = 60;
  ShapeDims dims;  // 16 paragraphs x 128 words x 24 chars
  double dropout = 0.5;
  std::uint64_t seed = 1;
  std::size_t char_vocab = 0;  // table sizes including padding and unknown
  std::size_t word_vocab = 0;
  std::size_t paragraph_feature_dim = 0;  // required for 4LHNP / 4LHNPD
  std::size_t document_feature_dim = 0;   // required for 4LHND / 4LHNPD

  std::size_t word_rep_dim() const { return filters + word_embed_dim; }
  std::size_t paragraph_rep_dim() const { return 2 * hidden; }
  void validate() const;
};

struct GruCellParams {
  Parameter Wz, Uz, bz, Wr, Ur, br, Wh, Uh, bh;
  std::vector<Parameter*> params();
};

struct MlpParams {
  Parameter W1, b1, W2, b2;
  std::vector<Parameter*> params();
};

// All learnable state for one variant. Parameter groups absent from the
// variant are never allocated.
struct HierNetModel {
  ModelConfig config;
  Parameter char_embed, word_embed;
  Parameter conv_w, conv_b;
  GruCellParams wgru_fwd, wgru_bwd;
  GruCellParams pgru_fwd, pgru_bwd;
  Parameter attn_W, attn_b, attn_v;
  Parameter cls_W, cls_b;
  std::optional<Parameter> attn_U;  // paragraph-feature path
  std::optional<MlpParams> pmlp;
  std::optional<MlpParams> dmlp;
  std::optional<Parameter> cls_U;   // document-feature path

  // Shared groups come first so identically seeded variants agree on them.
  std::vector<Parameter*> params();
  std::vector<NDArray> snapshot() const;
  void restore(const std::vector<NDArray>& snap);
};

using EmbeddingTable = std::unordered_map<std::string, std::vector<double>>;

// One line per token: the token then `dim` whitespace-separated numbers.
EmbeddingTable load_embeddings(const std::string& path, std::size_t dim);

// Glorot-uniform weights, zero biases, +-0.05 embeddings; pretrained word
// vectors overlaid where the vocabulary has them (they stay trainable).
HierNetModel build_model(const ModelConfig& config,
                         const Vocabulary* vocab = nullptr,
                         const EmbeddingTable* pretrained = nullptr);

// Network input for one document: shaped indices plus scaled linguistic
// features for the variants that consume them.
struct DocumentInput {
  ShapedDocument shaped;
  std::vector<std::vector<double>> paragraph_features;  // per shaped slot
  std::vector<double> document_features;
  double label01() const { return shaped.label == Label::satire ? 1.0 : 0.0; }
};

struct ForwardResult {
  Var prediction;                      // [1], in (0,1)
  std::vector<double> alpha;           // over effective paragraphs
  std::vector<std::size_t> slots;      // shaped slot of each alpha entry
};

// One Eq.-by-Eq. pass: char CNN -> word Bi-GRU -> paragraph Bi-GRU ->
// (feature-aware) attention -> classifier. Padded positions never enter
// either GRU pass and padded paragraphs are excluded before the softmax.
ForwardResult forward(Tape& tape, HierNetModel& model,
                      const DocumentInput& doc, bool training);

// z, r, candidate, next state per Eq. 1-4; the candidate bias sits inside
// the reset gating.
Var gru_step(Tape& tape, GruCellParams& cell, Var x_t, Var h_prev);

struct AttendResult {
  Var alpha;     // [k], sums to 1 over the given states
  Var document;  // weighted sum of the states
};

// Attention over encoded paragraph states. Variants with paragraph features
// require one scaled feature vector per state; the others forbid them.
AttendResult attend(Tape& tape, HierNetModel& model,
                    const std::vector<Var>& states,
                    const std::vector<std::vector<double>>* paragraph_features);

// Sigmoid classifier over the document representation, with the
// document-feature path when the variant has one.
Var classify(Tape& tape, HierNetModel& model, Var document,
             const std::vector<double>* document_features, bool training);

struct Metrics {
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

Metrics metrics_from_predictions(const std::vector<double>& probs,
                                 const std::vector<Label>& labels);

double predict_probability(HierNetModel& model, const DocumentInput& doc);
Metrics evaluate(HierNetModel& model, const std::vector<DocumentInput>& docs);

// Stops after `patience` consecutive strict F1 drops; tracks the best epoch
// (earliest on ties).
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience = 5) : patience_(patience) {}
  bool feed(double f1);  // true => stop after this epoch
  int best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }
  int drops() const { return drops_; }

 private:
  int patience_;
  int epoch_ = -1;
  double best_ = -1.0;
  int best_epoch_ = -1;
  double prev_ = -1.0;
  int drops_ = 0;
};

struct TrainOptions {
  int max_epochs = 100;
  int patience = 5;
  double initial_lr = 0.3;
  double lr_decay = 0.9;
  std::uint64_t seed = 1;
};

struct EpochStats {
  int epoch;
  double lr;
  double train_loss;  // mean per-document loss
  double val_f1;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = -1;
  double best_f1 = 0.0;
  bool early_stopped = false;
};

// Seeded shuffle, per-document SGD (batch size 1) with the decayed rate,
// validation F1 after each epoch, early stopping, best-epoch restore.
TrainResult train(HierNetModel& model, const std::vector<DocumentInput>& train_docs,
                  const std::vector<DocumentInput>& validation_docs,
                  const TrainOptions& opts);

struct AttentionRecord {
  std::string doc_id;
  std::vector<double> alpha;           // sums to 1 over true paragraphs
  std::vector<double> scaled;          // alpha / max(alpha)
  std::vector<std::size_t> slots;
};

AttentionRecord attention_record(HierNetModel& model,
                                 const DocumentInput& doc);

}  // namespace satire
