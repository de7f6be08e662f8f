#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "satire/corpus.hpp"
#include "satire/features.hpp"

namespace satire {

enum class GramKind { word1, word2, char2, char3, linguistic };

struct BaselineOptions {
  bool word_ngrams = true;
  bool char_ngrams = false;
  bool linguistic = false;
  std::size_t min_doc_freq = 2;
};

// Sparse column space: lowercase word {1,2}-grams and character {2,3}-grams
// over the document text, with an optional scaled linguistic-feature block
// appended. The vocabulary comes from the training partition only.
struct NGramFeaturizer {
  struct Column {
    std::string gram;  // gram text, or the feature name for the LF block
    GramKind kind;
  };
  BaselineOptions options;
  std::vector<Column> columns;
  std::unordered_map<std::string, std::size_t> word_gram_index;
  std::unordered_map<std::string, std::size_t> char_gram_index;
  std::size_t linguistic_offset = 0;  // first LF column, if enabled
  FeatureScaler scaler;               // document-level, train-fit

  std::size_t dim() const { return columns.size(); }
};

struct SparseVector {
  std::vector<std::pair<std::size_t, double>> entries;  // sorted by column
};

NGramFeaturizer build_featurizer(const std::vector<TokenizedDocument>& train,
                                 const BaselineOptions& options,
                                 const std::vector<FeatureVector>& train_lf = {});

// Counts of known grams; the LF block holds the scaled document features.
SparseVector featurize(const TokenizedDocument& doc,
                       const NGramFeaturizer& featurizer,
                       const FeatureVector* doc_features = nullptr);

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double C = 0.1;
  int epochs = 100;
  std::uint64_t seed = 1;
};

// Class-balanced weights N / (2 * N_class); they sum to N.
std::vector<double> balanced_weights(const std::vector<Label>& labels);

// Primal hinge objective (1/2)||w||^2 + C * sum_j beta_j * hinge_j,
// minimized by deterministic cyclic subgradient descent. Satire is +1.
LinearModel train_linear(const std::vector<SparseVector>& xs,
                         const std::vector<Label>& labels, double C,
                         int epochs = 100);

double decision_value(const LinearModel& model, const SparseVector& x);

struct BaselineMetrics {
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
};

BaselineMetrics evaluate_linear(const LinearModel& model,
                                const std::vector<SparseVector>& xs,
                                const std::vector<Label>& labels);

// Grid search over C by validation F1 (first grid entry wins ties).
LinearModel select_C(const std::vector<SparseVector>& train_xs,
                     const std::vector<Label>& train_labels,
                     const std::vector<SparseVector>& val_xs,
                     const std::vector<Label>& val_labels,
                     const std::vector<double>& grid, int epochs = 100);

struct WeightedGram {
  std::string gram;
  GramKind kind;
  double weight;
};

struct TopWeighted {
  std::vector<WeightedGram> satire;  // most positive
  std::vector<WeightedGram> truth;   // most negative
};

TopWeighted top_weighted(const LinearModel& model,
                         const NGramFeaturizer& featurizer, std::size_t k);

std::string export_model_json(const LinearModel& model,
                              const NGramFeaturizer& featurizer);

}  // namespace satire
