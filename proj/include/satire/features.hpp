#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "satire/corpus.hpp"

namespace satire {

// LIWC-style category lexicon: literal words plus prefix stems (a trailing
// '*' in the file marks a prefix pattern).
struct Lexicon {
  struct Category {
    std::string name;
    std::unordered_set<std::string> literals;
    std::vector<std::string> prefixes;
  };
  std::vector<Category> categories;
};

Lexicon load_lexicon(const std::string& path);
Lexicon parse_lexicon(std::istream& in, const std::string& origin);

enum class FeatureFamily { psycholinguistic, stylistic, readability, structural };
enum class FeatureLevel { paragraph, document };

const char* family_name(FeatureFamily f);

struct FeatureValue {
  std::string name;
  FeatureFamily family;
  double value = 0.0;
};

// Feature order is fixed by (family order, declaration order) so vectors of
// the same inventory are positionally comparable.
struct FeatureVector {
  FeatureLevel level = FeatureLevel::paragraph;
  std::vector<FeatureValue> values;

  std::vector<double> raw() const {
    std::vector<double> v;
    v.reserve(values.size());
    for (const auto& f : values) v.push_back(f.value);
    return v;
  }
};

// Tags for one document, aligned with TokenizedDocument:
// tags[paragraph][sentence][token].
using DocumentTags = std::vector<std::vector<std::vector<std::string>>>;

// One value per lexicon category: matching tokens / word tokens.
std::vector<FeatureValue> psycholinguistic_features(
    const std::vector<Token>& tokens, const Lexicon& lexicon);

// One value per Penn Treebank tag: tag count / total tags.
std::vector<FeatureValue> stylistic_features(
    const std::vector<std::string>& tags);

// Maximal vowel groups (aeiouy), minus a terminal silent 'e', floored at 1.
int count_syllables(const std::string& word);

// Flesch Reading Ease, Gunning Fog, ARI, Coleman-Liau, syllables per word.
std::vector<FeatureValue> readability_features(
    const std::vector<const Sentence*>& span);

// Word count, ln(1+words), punctuation chars, digit chars, capital letters,
// sentence count. Character counts run over the raw text.
std::vector<FeatureValue> structural_features(
    const std::string& raw, const std::vector<const Sentence*>& span);

// All four families over one span, in the fixed family order.
FeatureVector extract_span_features(const std::vector<const Sentence*>& span,
                                    const std::string& raw,
                                    const std::vector<std::string>& flat_tags,
                                    const Lexicon& lexicon,
                                    FeatureLevel level);

struct DocumentFeatures {
  std::vector<FeatureVector> paragraphs;
  FeatureVector document;  // computed on the whole span, not averaged
};

DocumentFeatures extract_all(const TokenizedDocument& doc,
                             const DocumentTags& tags, const Lexicon& lexicon);

// Zero-mean/unit-variance standardization with training-set statistics
// (population standard deviation). Degenerate features map to 0.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::size_t dim() const { return mean.size(); }
};

FeatureScaler fit_scaler(const std::vector<FeatureVector>& train_vectors);
FeatureVector apply_scaler(const FeatureScaler& scaler,
                           const FeatureVector& v);
std::vector<double> scale_values(const FeatureScaler& scaler,
                                 const std::vector<double>& raw);

}  // namespace satire
