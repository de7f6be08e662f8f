#include "satire/features.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "satire/tagset.hpp"

namespace satire {

namespace {

std::string to_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool token_is_word(const std::string& surface) {
  return !is_punct_token(surface);
}

std::size_t count_word_tokens(const std::vector<Token>& tokens) {
  std::size_t n = 0;
  for (const auto& t : tokens)
    if (token_is_word(t.surface)) ++n;
  return n;
}

}  // namespace

const char* family_name(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::psycholinguistic: return "psycholinguistic";
    case FeatureFamily::stylistic: return "stylistic";
    case FeatureFamily::readability: return "readability";
    case FeatureFamily::structural: return "structural";
  }
  return "?";
}

Lexicon parse_lexicon(std::istream& in, const std::string& origin) {
  Lexicon lex;
  std::map<int, std::size_t> id_to_cat;
  std::string line;
  std::size_t line_no = 0;
  int delims_seen = 0;
  std::unordered_set<std::string> seen_names;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '%') {
      ++delims_seen;
      continue;
    }
    auto fields = split_tabs(line);
    if (delims_seen == 1) {
      // header: id<TAB>name
      if (fields.size() < 2)
        throw DataError(origin + ": header line " + std::to_string(line_no) +
                        " needs id<TAB>name");
      int id = std::stoi(fields[0]);
      std::string name = fields[1];
      if (name.empty() || !seen_names.insert(name).second)
        throw DataError(origin + ": duplicate or empty category '" + name +
                        "' at line " + std::to_string(line_no));
      id_to_cat[id] = lex.categories.size();
      lex.categories.push_back({name, {}, {}});
    } else if (delims_seen >= 2) {
      // body: word<TAB>id[,id...]  (ids may also be tab-separated)
      if (fields.size() < 2)
        throw DataError(origin + ": body line " + std::to_string(line_no) +
                        " needs word<TAB>id");
      std::string word = to_lower(fields[0]);
      bool prefix = !word.empty() && word.back() == '*';
      if (prefix) word.pop_back();
      if (word.empty())
        throw DataError(origin + ": empty pattern at line " +
                        std::to_string(line_no));
      for (std::size_t f = 1; f < fields.size(); ++f) {
        std::stringstream ss(fields[f]);
        std::string part;
        while (std::getline(ss, part, ',')) {
          if (part.empty()) continue;
          int id = std::stoi(part);
          auto it = id_to_cat.find(id);
          if (it == id_to_cat.end())
            throw DataError(origin + ": unknown category id " + part +
                            " at line " + std::to_string(line_no));
          auto& cat = lex.categories[it->second];
          if (prefix) cat.prefixes.push_back(word);
          else cat.literals.insert(word);
        }
      }
    } else {
      throw DataError(origin + ": content before the '%' header at line " +
                      std::to_string(line_no));
    }
  }
  if (lex.categories.empty())
    throw DataError(origin + ": no categories defined");
  return lex;
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open lexicon file: " + path);
  return parse_lexicon(in, path);
}

std::vector<FeatureValue> psycholinguistic_features(
    const std::vector<Token>& tokens, const Lexicon& lexicon) {
  std::vector<FeatureValue> out;
  out.reserve(lexicon.categories.size());
  double total = static_cast<double>(count_word_tokens(tokens));
  for (const auto& cat : lexicon.categories) {
    std::size_t hits = 0;
    if (total > 0) {
      for (const auto& t : tokens) {
        bool match = cat.literals.count(t.lower) > 0;
        if (!match)
          for (const auto& pre : cat.prefixes)
            if (t.lower.size() >= pre.size() &&
                t.lower.compare(0, pre.size(), pre) == 0) {
              match = true;
              break;
            }
        if (match) ++hits;
      }
    }
    double v = total > 0 ? static_cast<double>(hits) / total : 0.0;
    out.push_back({cat.name, FeatureFamily::psycholinguistic, v});
  }
  return out;
}

std::vector<FeatureValue> stylistic_features(
    const std::vector<std::string>& tags) {
  const auto& tagset = penn_tagset();
  std::vector<std::size_t> counts(tagset.size(), 0);
  for (const auto& t : tags) {
    int id = tag_id(t);
    if (id < 0) throw DataError("unknown tag '" + t + "'");
    ++counts[static_cast<std::size_t>(id)];
  }
  std::vector<FeatureValue> out;
  out.reserve(tagset.size());
  double total = static_cast<double>(tags.size());
  for (std::size_t i = 0; i < tagset.size(); ++i) {
    double v = total > 0 ? static_cast<double>(counts[i]) / total : 0.0;
    out.push_back({tagset[i], FeatureFamily::stylistic, v});
  }
  return out;
}

int count_syllables(const std::string& word) {
  std::string w = to_lower(word);
  auto is_vowel = [](char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' ||
           c == 'y';
  };
  int groups = 0;
  bool prev = false;
  for (char c : w) {
    bool v = is_vowel(c);
    if (v && !prev) ++groups;
    prev = v;
  }
  if (groups > 1 && w.size() >= 1 && w.back() == 'e' &&
      !(w.size() >= 2 && w.compare(w.size() - 2, 2, "le") == 0))
    --groups;
  return groups < 1 ? 1 : groups;
}

std::vector<FeatureValue> readability_features(
    const std::vector<const Sentence*>& span) {
  std::size_t n_sents = span.size();
  std::size_t n_words = 0, n_syll = 0, n_complex = 0, n_letters = 0;
  for (const Sentence* s : span)
    for (const auto& t : s->tokens) {
      if (!token_is_word(t.surface)) continue;
      ++n_words;
      int syl = count_syllables(t.surface);
      n_syll += static_cast<std::size_t>(syl);
      if (syl >= 3) ++n_complex;
      for (unsigned char c : t.surface)
        if (std::isalpha(c)) ++n_letters;
    }
  if (n_sents == 0 || n_words == 0) throw DataError("empty span");
  double words = static_cast<double>(n_words);
  double sents = static_cast<double>(n_sents);
  double wps = words / sents;
  double spw = static_cast<double>(n_syll) / words;
  double fre = 206.835 - 1.015 * wps - 84.6 * spw;
  double fog = 0.4 * (wps + 100.0 * static_cast<double>(n_complex) / words);
  double ari = 4.71 * static_cast<double>(n_letters) / words + 0.5 * wps -
               21.43;
  double L = 100.0 * static_cast<double>(n_letters) / words;
  double S = 100.0 * sents / words;
  double cli = 0.0588 * L - 0.296 * S - 15.8;
  return {{"FRE", FeatureFamily::readability, fre},
          {"FOG", FeatureFamily::readability, fog},
          {"ARI", FeatureFamily::readability, ari},
          {"CLI", FeatureFamily::readability, cli},
          {"SyllPerWord", FeatureFamily::readability, spw}};
}

std::vector<FeatureValue> structural_features(
    const std::string& raw, const std::vector<const Sentence*>& span) {
  std::size_t n_words = 0;
  for (const Sentence* s : span)
    for (const auto& t : s->tokens)
      if (token_is_word(t.surface)) ++n_words;
  std::size_t punct = 0, digits = 0, caps = 0;
  for (unsigned char c : raw) {
    if (std::ispunct(c)) ++punct;
    if (std::isdigit(c)) ++digits;
    if (std::isupper(c)) ++caps;
  }
  double wc = static_cast<double>(n_words);
  return {{"WordCount", FeatureFamily::structural, wc},
          {"LogWordCount", FeatureFamily::structural, std::log(1.0 + wc)},
          {"Punct", FeatureFamily::structural, static_cast<double>(punct)},
          {"Digit", FeatureFamily::structural, static_cast<double>(digits)},
          {"Cap", FeatureFamily::structural, static_cast<double>(caps)},
          {"Sent", FeatureFamily::structural,
           static_cast<double>(span.size())}};
}

FeatureVector extract_span_features(const std::vector<const Sentence*>& span,
                                    const std::string& raw,
                                    const std::vector<std::string>& flat_tags,
                                    const Lexicon& lexicon,
                                    FeatureLevel level) {
  std::vector<Token> tokens;
  for (const Sentence* s : span)
    tokens.insert(tokens.end(), s->tokens.begin(), s->tokens.end());
  if (flat_tags.size() != tokens.size())
    throw DataError("tag/token count mismatch: " +
                    std::to_string(flat_tags.size()) + " tags for " +
                    std::to_string(tokens.size()) + " tokens");
  FeatureVector fv;
  fv.level = level;
  auto append = [&fv](std::vector<FeatureValue> vs) {
    for (auto& v : vs) fv.values.push_back(std::move(v));
  };
  append(psycholinguistic_features(tokens, lexicon));
  append(stylistic_features(flat_tags));
  append(readability_features(span));
  append(structural_features(raw, span));
  return fv;
}

DocumentFeatures extract_all(const TokenizedDocument& doc,
                             const DocumentTags& tags, const Lexicon& lexicon) {
  if (tags.size() != doc.paragraphs.size())
    throw DataError("document '" + doc.id + "': " +
                    std::to_string(tags.size()) + " tag paragraphs for " +
                    std::to_string(doc.paragraphs.size()) + " paragraphs");
  DocumentFeatures out;
  std::vector<const Sentence*> doc_span;
  std::string doc_raw;
  std::vector<std::string> doc_tags;
  for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
    const auto& para = doc.paragraphs[p];
    if (tags[p].size() != para.sentences.size())
      throw DataError("document '" + doc.id + "' paragraph " +
                      std::to_string(p) + ": sentence count mismatch");
    std::vector<const Sentence*> span;
    std::vector<std::string> flat;
    for (std::size_t s = 0; s < para.sentences.size(); ++s) {
      span.push_back(&para.sentences[s]);
      flat.insert(flat.end(), tags[p][s].begin(), tags[p][s].end());
    }
    out.paragraphs.push_back(extract_span_features(
        span, para.raw, flat, lexicon, FeatureLevel::paragraph));
    doc_span.insert(doc_span.end(), span.begin(), span.end());
    if (!doc_raw.empty()) doc_raw += "\n";
    doc_raw += para.raw;
    doc_tags.insert(doc_tags.end(), flat.begin(), flat.end());
  }
  out.document = extract_span_features(doc_span, doc_raw, doc_tags, lexicon,
                                       FeatureLevel::document);
  return out;
}

FeatureScaler fit_scaler(const std::vector<FeatureVector>& train_vectors) {
  if (train_vectors.empty())
    throw DataError("fit_scaler: no training vectors");
  std::size_t dim = train_vectors[0].values.size();
  FeatureScaler sc;
  sc.mean.assign(dim, 0.0);
  sc.stddev.assign(dim, 0.0);
  for (const auto& v : train_vectors) {
    if (v.values.size() != dim)
      throw DataError("fit_scaler: dimension mismatch");
    for (std::size_t i = 0; i < dim; ++i) sc.mean[i] += v.values[i].value;
  }
  double n = static_cast<double>(train_vectors.size());
  for (double& m : sc.mean) m /= n;
  for (const auto& v : train_vectors)
    for (std::size_t i = 0; i < dim; ++i) {
      double d = v.values[i].value - sc.mean[i];
      sc.stddev[i] += d * d;
    }
  for (double& s : sc.stddev) s = std::sqrt(s / n);
  return sc;
}

std::vector<double> scale_values(const FeatureScaler& scaler,
                                 const std::vector<double>& raw) {
  if (raw.size() != scaler.dim())
    throw DataError("apply_scaler: vector has " + std::to_string(raw.size()) +
                    " features, scaler has " + std::to_string(scaler.dim()));
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    out[i] = scaler.stddev[i] > 0.0
                 ? (raw[i] - scaler.mean[i]) / scaler.stddev[i]
                 : 0.0;
  return out;
}

FeatureVector apply_scaler(const FeatureScaler& scaler,
                           const FeatureVector& v) {
  FeatureVector out = v;
  auto scaled = scale_values(scaler, v.raw());
  for (std::size_t i = 0; i < scaled.size(); ++i)
    out.values[i].value = scaled[i];
  return out;
}

}  // namespace satire
