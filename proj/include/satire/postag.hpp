#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "satire/corpus.hpp"
#include "satire/features.hpp"

namespace satire {

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

// Greedy averaged perceptron over a fixed feature template set. A finalized
// model is immutable and safe for concurrent tagging.
class TaggerModel {
 public:
  TaggerModel();

  // Greedy left-to-right training with seeded shuffling; weights are
  // averaged over all token timesteps.
  static TaggerModel train(const std::vector<TaggedSentence>& corpus,
                           int epochs, std::uint64_t seed = 1);

  std::vector<std::string> tag(const std::vector<std::string>& tokens) const;
  DocumentTags tag_document(const TokenizedDocument& doc) const;

  double accuracy(const std::vector<TaggedSentence>& corpus) const;

  // flat weight table for persistence: features() x penn_tagset()
  std::vector<std::string> feature_keys() const;
  std::vector<double> weight_row(const std::string& feature) const;
  static TaggerModel from_weights(const std::vector<std::string>& features,
                                  const std::vector<double>& flat_weights);

  bool empty() const { return weights_.empty(); }

 private:
  struct Accum {
    std::vector<double> w;       // current weights, one per tag
    std::vector<double> total;   // timestep-weighted sums for averaging
    std::vector<std::uint64_t> stamp;
  };
  std::unordered_map<std::string, Accum> weights_;
  std::uint64_t steps_ = 0;
  bool finalized_ = false;

  static std::vector<std::string> extract_features(
      const std::vector<std::string>& tokens, std::size_t i,
      const std::string& prev_tag);
  int predict(const std::vector<std::string>& feats) const;
  void update(const std::vector<std::string>& feats, int gold, int guess);
  void finalize();
};

// token<TAB>tag lines, blank line between sentences.
std::vector<TaggedSentence> load_tagged_corpus(const std::string& path);

// Pre-tagged file aligned 1:1 with the tokenizer's output for `doc`.
DocumentTags load_pretagged(const std::string& path,
                            const TokenizedDocument& doc);

}  // namespace satire
