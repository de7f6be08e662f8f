#include "satire/postag.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>

#include "satire/tagset.hpp"

namespace satire {

namespace {

std::string to_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (unsigned char c : s)
    if (!std::isdigit(c)) return false;
  return true;
}

}  // namespace

TaggerModel::TaggerModel() = default;

std::vector<std::string> TaggerModel::extract_features(
    const std::vector<std::string>& tokens, std::size_t i,
    const std::string& prev_tag) {
  const std::string& w = tokens[i];
  std::string lower = to_lower(w);
  std::vector<std::string> feats;
  feats.reserve(10);
  feats.push_back("w=" + lower);
  for (std::size_t n = 1; n <= 3 && n <= lower.size(); ++n)
    feats.push_back("suf" + std::to_string(n) + "=" +
                    lower.substr(lower.size() - n));
  feats.push_back("pt=" + prev_tag);
  feats.push_back("pw=" + (i > 0 ? to_lower(tokens[i - 1]) : std::string("<s>")));
  feats.push_back("nw=" + (i + 1 < tokens.size() ? to_lower(tokens[i + 1])
                                                 : std::string("</s>")));
  if (!w.empty() && std::isupper(static_cast<unsigned char>(w[0])))
    feats.push_back("cap");
  if (all_digits(w)) feats.push_back("dig");
  if (w.find('-') != std::string::npos) feats.push_back("hyp");
  return feats;
}

int TaggerModel::predict(const std::vector<std::string>& feats) const {
  const std::size_t n_tags = penn_tagset().size();
  std::vector<double> scores(n_tags, 0.0);
  for (const auto& f : feats) {
    auto it = weights_.find(f);
    if (it == weights_.end()) continue;
    for (std::size_t t = 0; t < n_tags; ++t) scores[t] += it->second.w[t];
  }
  int best = 0;
  for (std::size_t t = 1; t < n_tags; ++t)
    if (scores[t] > scores[best]) best = static_cast<int>(t);
  return best;
}

void TaggerModel::update(const std::vector<std::string>& feats, int gold,
                         int guess) {
  const std::size_t n_tags = penn_tagset().size();
  auto bump = [this, n_tags](const std::string& f, int tag, double delta) {
    auto& acc = weights_[f];
    if (acc.w.empty()) {
      acc.w.assign(n_tags, 0.0);
      acc.total.assign(n_tags, 0.0);
      acc.stamp.assign(n_tags, 0);
    }
    auto t = static_cast<std::size_t>(tag);
    acc.total[t] += acc.w[t] * static_cast<double>(steps_ - acc.stamp[t]);
    acc.stamp[t] = steps_;
    acc.w[t] += delta;
  };
  for (const auto& f : feats) {
    bump(f, gold, 1.0);
    bump(f, guess, -1.0);
  }
}

void TaggerModel::finalize() {
  for (auto& [f, acc] : weights_) {
    for (std::size_t t = 0; t < acc.w.size(); ++t) {
      acc.total[t] += acc.w[t] * static_cast<double>(steps_ + 1 - acc.stamp[t]);
      acc.w[t] = steps_ > 0 ? acc.total[t] / static_cast<double>(steps_)
                            : acc.w[t];
    }
    acc.total.clear();
    acc.stamp.clear();
  }
  finalized_ = true;
}

TaggerModel TaggerModel::train(const std::vector<TaggedSentence>& corpus,
                               int epochs, std::uint64_t seed) {
  if (corpus.empty()) throw DataError("empty training corpus");
  for (const auto& s : corpus) {
    if (s.tokens.size() != s.tags.size())
      throw DataError("tagged sentence with " +
                      std::to_string(s.tokens.size()) + " tokens but " +
                      std::to_string(s.tags.size()) + " tags");
    for (const auto& t : s.tags)
      if (tag_id(t) < 0) throw DataError("unknown tag '" + t + "'");
  }
  TaggerModel m;
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t si : order) {
      const auto& sent = corpus[si];
      std::string prev = "<s>";
      for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
        ++m.steps_;
        auto feats = extract_features(sent.tokens, i, prev);
        int guess = m.predict(feats);
        int gold = tag_id(sent.tags[i]);
        if (guess != gold) m.update(feats, gold, guess);
        prev = penn_tagset()[static_cast<std::size_t>(guess)];
      }
    }
  }
  m.finalize();
  return m;
}

std::vector<std::string> TaggerModel::tag(
    const std::vector<std::string>& tokens) const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  std::string prev = "<s>";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto feats = extract_features(tokens, i, prev);
    int t = predict(feats);
    prev = penn_tagset()[static_cast<std::size_t>(t)];
    out.push_back(prev);
  }
  return out;
}

DocumentTags TaggerModel::tag_document(const TokenizedDocument& doc) const {
  DocumentTags tags;
  for (const auto& p : doc.paragraphs) {
    std::vector<std::vector<std::string>> ptags;
    for (const auto& s : p.sentences) {
      std::vector<std::string> tokens;
      tokens.reserve(s.tokens.size());
      for (const auto& t : s.tokens) tokens.push_back(t.surface);
      ptags.push_back(tag(tokens));
    }
    tags.push_back(std::move(ptags));
  }
  return tags;
}

double TaggerModel::accuracy(const std::vector<TaggedSentence>& corpus) const {
  std::size_t total = 0, hit = 0;
  for (const auto& s : corpus) {
    auto pred = tag(s.tokens);
    for (std::size_t i = 0; i < s.tags.size(); ++i) {
      ++total;
      if (pred[i] == s.tags[i]) ++hit;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
}

std::vector<std::string> TaggerModel::feature_keys() const {
  std::vector<std::string> keys;
  keys.reserve(weights_.size());
  for (const auto& [f, _] : weights_) keys.push_back(f);
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::vector<double> TaggerModel::weight_row(const std::string& feature) const {
  auto it = weights_.find(feature);
  if (it == weights_.end())
    return std::vector<double>(penn_tagset().size(), 0.0);
  return it->second.w;
}

TaggerModel TaggerModel::from_weights(
    const std::vector<std::string>& features,
    const std::vector<double>& flat_weights) {
  const std::size_t n_tags = penn_tagset().size();
  if (flat_weights.size() != features.size() * n_tags)
    throw DataError("tagger weights: expected " +
                    std::to_string(features.size() * n_tags) + " values, got " +
                    std::to_string(flat_weights.size()));
  TaggerModel m;
  for (std::size_t i = 0; i < features.size(); ++i) {
    Accum acc;
    acc.w.assign(flat_weights.begin() + i * n_tags,
                 flat_weights.begin() + (i + 1) * n_tags);
    m.weights_[features[i]] = std::move(acc);
  }
  m.finalized_ = true;
  return m;
}

std::vector<TaggedSentence> load_tagged_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open tagged corpus: " + path);
  std::vector<TaggedSentence> out;
  TaggedSentence cur;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!cur.tokens.empty()) out.push_back(std::move(cur));
      cur = TaggedSentence{};
      continue;
    }
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path + ": line " + std::to_string(line_no) +
                      " is not token<TAB>tag");
    cur.tokens.push_back(line.substr(0, tab));
    cur.tags.push_back(line.substr(tab + 1));
  }
  if (!cur.tokens.empty()) out.push_back(std::move(cur));
  return out;
}

DocumentTags load_pretagged(const std::string& path,
                            const TokenizedDocument& doc) {
  auto sentences = load_tagged_corpus(path);
  for (const auto& s : sentences)
    for (const auto& t : s.tags)
      if (tag_id(t) < 0) throw DataError(path + ": unknown tag '" + t + "'");

  DocumentTags tags;
  std::size_t si = 0;
  std::size_t position = 0;  // running token index across the document
  for (const auto& p : doc.paragraphs) {
    std::vector<std::vector<std::string>> ptags;
    for (const auto& sent : p.sentences) {
      if (si >= sentences.size())
        throw DataError(path + ": missing tags at token position " +
                        std::to_string(position));
      const auto& got = sentences[si];
      for (std::size_t i = 0; i < std::min(got.tokens.size(), sent.tokens.size()); ++i) {
        if (got.tokens[i] != sent.tokens[i].surface)
          throw DataError(path + ": token mismatch at position " +
                          std::to_string(position + i) + ": expected '" +
                          sent.tokens[i].surface + "', file has '" +
                          got.tokens[i] + "'");
      }
      if (got.tokens.size() != sent.tokens.size())
        throw DataError(path + ": sentence length mismatch at position " +
                        std::to_string(position +
                                       std::min(got.tokens.size(),
                                                sent.tokens.size())));
      position += sent.tokens.size();
      ptags.push_back(got.tags);
      ++si;
    }
    tags.push_back(std::move(ptags));
  }
  if (si != sentences.size())
    throw DataError(path + ": file has " + std::to_string(sentences.size()) +
                    " sentences, document has " + std::to_string(si));
  return tags;
}

}  // namespace satire
