#pragma once

#include <string>
#include <vector>

#include "satire/features.hpp"
#include "satire/hiernet.hpp"
#include "satire/postag.hpp"

namespace satire {

// Single-file container: magic, JSON header with an array manifest, then a
// payload of little-endian 64-bit floats. Round-trips bit-exactly.
struct Checkpoint {
  std::string toolkit_version;
  std::uint64_t seed = 0;
  std::string config_hash;
  HierNetModel model;
  Vocabulary vocab;
  std::vector<std::string> feature_names;
  std::vector<FeatureFamily> feature_families;
  FeatureScaler paragraph_scaler;
  FeatureScaler document_scaler;
  Lexicon lexicon;
  TaggerModel tagger;
};

std::string config_json(const ModelConfig& config);
std::string hash_config(const ModelConfig& config);

void save_checkpoint(Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace satire
