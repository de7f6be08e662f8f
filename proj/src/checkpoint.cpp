#include "satire/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "satire/tagset.hpp"
#include "satire/version.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian");

namespace satire {

namespace {

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
  return json{{"variant", variant_name(c.variant)},
              {"char_embed_dim", c.char_embed_dim},
              {"word_embed_dim", c.word_embed_dim},
              {"filters", c.filters},
              {"window", c.window},
              {"hidden", c.hidden},
              {"paragraphs", c.dims.paragraphs},
              {"words", c.dims.words},
              {"chars", c.dims.chars},
              {"dropout", c.dropout},
              {"seed", c.seed},
              {"char_vocab", c.char_vocab},
              {"word_vocab", c.word_vocab},
              {"paragraph_feature_dim", c.paragraph_feature_dim},
              {"document_feature_dim", c.document_feature_dim}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.char_embed_dim = j.at("char_embed_dim").get<std::size_t>();
  c.word_embed_dim = j.at("word_embed_dim").get<std::size_t>();
  c.filters = j.at("filters").get<std::size_t>();
  c.window = j.at("window").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.dims.paragraphs = j.at("paragraphs").get<std::size_t>();
  c.dims.words = j.at("words").get<std::size_t>();
  c.dims.chars = j.at("chars").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.char_vocab = j.at("char_vocab").get<std::size_t>();
  c.word_vocab = j.at("word_vocab").get<std::size_t>();
  c.paragraph_feature_dim = j.at("paragraph_feature_dim").get<std::size_t>();
  c.document_feature_dim = j.at("document_feature_dim").get<std::size_t>();
  return c;
}

json lexicon_to_json(const Lexicon& lex) {
  json cats = json::array();
  for (const auto& c : lex.categories) {
    std::vector<std::string> lits(c.literals.begin(), c.literals.end());
    std::sort(lits.begin(), lits.end());
    auto prefixes = c.prefixes;
    std::sort(prefixes.begin(), prefixes.end());
    cats.push_back(json{{"name", c.name},
                        {"literals", lits},
                        {"prefixes", prefixes}});
  }
  return cats;
}

Lexicon lexicon_from_json(const json& cats) {
  Lexicon lex;
  for (const auto& c : cats) {
    Lexicon::Category cat;
    cat.name = c.at("name").get<std::string>();
    for (const auto& l : c.at("literals"))
      cat.literals.insert(l.get<std::string>());
    for (const auto& p : c.at("prefixes"))
      cat.prefixes.push_back(p.get<std::string>());
    lex.categories.push_back(std::move(cat));
  }
  return lex;
}

FeatureFamily family_from_name(const std::string& n) {
  if (n == "psycholinguistic") return FeatureFamily::psycholinguistic;
  if (n == "stylistic") return FeatureFamily::stylistic;
  if (n == "readability") return FeatureFamily::readability;
  if (n == "structural") return FeatureFamily::structural;
  throw DataError("checkpoint: unknown feature family '" + n + "'");
}

struct ArrayRef {
  std::string name;
  const std::vector<double>* data;
  std::vector<std::size_t> shape;
};

void append_payload_arrays(Checkpoint& ckpt, std::vector<ArrayRef>& arrays,
                           std::vector<std::vector<double>>& scratch) {
  for (Parameter* p : ckpt.model.params())
    arrays.push_back({p->name, &p->value.data, p->value.shape});
  auto add_plain = [&arrays](const std::string& name,
                             const std::vector<double>& v) {
    if (!v.empty()) arrays.push_back({name, &v, {v.size()}});
  };
  add_plain("scaler.paragraph.mean", ckpt.paragraph_scaler.mean);
  add_plain("scaler.paragraph.std", ckpt.paragraph_scaler.stddev);
  add_plain("scaler.document.mean", ckpt.document_scaler.mean);
  add_plain("scaler.document.std", ckpt.document_scaler.stddev);
  if (!ckpt.tagger.empty()) {
    auto keys = ckpt.tagger.feature_keys();
    scratch.emplace_back();
    auto& flat = scratch.back();
    flat.reserve(keys.size() * penn_tagset().size());
    for (const auto& k : keys) {
      auto row = ckpt.tagger.weight_row(k);
      flat.insert(flat.end(), row.begin(), row.end());
    }
    arrays.push_back({"tagger.weights", &flat,
                      {keys.size(), penn_tagset().size()}});
  }
}

}  // namespace

std::string config_json(const ModelConfig& config) {
  return config_to_json(config).dump();
}

std::string hash_config(const ModelConfig& config) {
  return fnv1a_hex(config_json(config));
}

void save_checkpoint(Checkpoint& ckpt, const std::string& path) {
  std::vector<ArrayRef> arrays;
  std::vector<std::vector<double>> scratch;
  append_payload_arrays(ckpt, arrays, scratch);

  json manifest = json::array();
  std::size_t offset = 0;
  for (const auto& a : arrays) {
    manifest.push_back(
        json{{"name", a.name}, {"shape", a.shape}, {"offset", offset}});
    offset += a.data->size() * sizeof(double);
  }

  json header;
  header["toolkit_version"] =
      ckpt.toolkit_version.empty() ? kToolkitVersion : ckpt.toolkit_version;
  header["seed"] = ckpt.seed;
  header["config_hash"] = ckpt.config_hash.empty()
                              ? hash_config(ckpt.model.config)
                              : ckpt.config_hash;
  header["config"] = config_to_json(ckpt.model.config);
  header["vocab_words"] = ckpt.vocab.words;
  std::vector<int> char_codes;
  for (char c : ckpt.vocab.chars)
    char_codes.push_back(static_cast<unsigned char>(c));
  header["vocab_chars"] = char_codes;
  header["feature_names"] = ckpt.feature_names;
  std::vector<std::string> fams;
  for (auto f : ckpt.feature_families) fams.push_back(family_name(f));
  header["feature_families"] = fams;
  header["lexicon"] = lexicon_to_json(ckpt.lexicon);
  header["tagger_features"] =
      ckpt.tagger.empty() ? std::vector<std::string>{} : ckpt.tagger.feature_keys();
  header["arrays"] = manifest;
  std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, 5);
  std::uint32_t len = static_cast<std::uint32_t>(header_text.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(header_text.data(),
            static_cast<std::streamsize>(header_text.size()));
  for (const auto& a : arrays)
    out.write(reinterpret_cast<const char*>(a.data->data()),
              static_cast<std::streamsize>(a.data->size() * sizeof(double)));
  if (!out) throw DataError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open checkpoint: " + path);
  char magic[5];
  if (!in.read(magic, 5))
    throw DataError("checkpoint payload truncated: " + path);
  if (std::memcmp(magic, kCheckpointMagic, 5) != 0)
    throw DataError("checkpoint version '" + std::string(magic, 5) +
                    "' unsupported (expected " + kCheckpointMagic + ")");
  std::uint32_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof len))
    throw DataError("checkpoint payload truncated: " + path);
  std::string header_text(len, '\0');
  if (!in.read(header_text.data(), len))
    throw DataError("checkpoint payload truncated: " + path);
  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("checkpoint header corrupt: ") + e.what());
  }

  Checkpoint ckpt;
  ckpt.toolkit_version = header.at("toolkit_version").get<std::string>();
  ckpt.seed = header.at("seed").get<std::uint64_t>();
  ckpt.config_hash = header.at("config_hash").get<std::string>();
  ModelConfig config = config_from_json(header.at("config"));
  ckpt.model = build_model(config);

  ckpt.vocab.words = header.at("vocab_words").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < ckpt.vocab.words.size(); ++i)
    ckpt.vocab.word_to_index[ckpt.vocab.words[i]] = static_cast<int>(i) + 2;
  for (int code : header.at("vocab_chars").get<std::vector<int>>()) {
    char c = static_cast<char>(static_cast<unsigned char>(code));
    ckpt.vocab.chars.push_back(c);
    ckpt.vocab.char_to_index[c] =
        static_cast<int>(ckpt.vocab.chars.size()) + 1;
  }
  ckpt.feature_names =
      header.at("feature_names").get<std::vector<std::string>>();
  for (const auto& f : header.at("feature_families"))
    ckpt.feature_families.push_back(family_from_name(f.get<std::string>()));
  ckpt.lexicon = lexicon_from_json(header.at("lexicon"));

  // index model parameters by name; anything else in the manifest must be a
  // scaler or tagger array
  std::unordered_map<std::string, Parameter*> by_name;
  for (Parameter* p : ckpt.model.params()) by_name[p->name] = p;

  auto tagger_features =
      header.at("tagger_features").get<std::vector<std::string>>();
  std::vector<double> tagger_weights;

  std::unordered_map<std::string, bool> loaded;
  for (auto& [name, _] : by_name) loaded[name] = false;

  for (const auto& entry : header.at("arrays")) {
    std::string name = entry.at("name").get<std::string>();
    auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    std::size_t offset = entry.at("offset").get<std::size_t>();
    std::size_t count = 1;
    for (std::size_t s : shape) count *= s;
    std::vector<double> data(count);
    in.seekg(static_cast<std::streamoff>(9 + len + offset));
    if (!in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(count * sizeof(double))))
      throw DataError("checkpoint payload truncated: " + path);

    if (auto it = by_name.find(name); it != by_name.end()) {
      if (it->second->value.shape != shape)
        throw DataError("checkpoint array '" + name + "' has shape " +
                        shape_str(shape) + ", model expects " +
                        shape_str(it->second->value.shape));
      it->second->value.data = std::move(data);
      loaded[name] = true;
    } else if (name == "scaler.paragraph.mean") {
      ckpt.paragraph_scaler.mean = std::move(data);
    } else if (name == "scaler.paragraph.std") {
      ckpt.paragraph_scaler.stddev = std::move(data);
    } else if (name == "scaler.document.mean") {
      ckpt.document_scaler.mean = std::move(data);
    } else if (name == "scaler.document.std") {
      ckpt.document_scaler.stddev = std::move(data);
    } else if (name == "tagger.weights") {
      tagger_weights = std::move(data);
    } else {
      throw DataError("checkpoint array '" + name +
                      "' is not part of variant " +
                      variant_name(config.variant));
    }
  }
  for (const auto& [name, ok] : loaded)
    if (!ok)
      throw DataError("checkpoint is missing array '" + name + "' for variant " +
                      std::string(variant_name(config.variant)));

  if (!tagger_features.empty())
    ckpt.tagger = TaggerModel::from_weights(tagger_features, tagger_weights);
  return ckpt;
}

}  // namespace satire
