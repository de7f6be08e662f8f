#include "satire/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace satire {

namespace {

using nlohmann::json;

bool is_punct_char(unsigned char c) { return std::ispunct(c) != 0; }

bool is_space_char(unsigned char c) { return std::isspace(c) != 0; }

std::string to_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && is_space_char(s[a])) ++a;
  while (b > a && is_space_char(s[b - 1])) --b;
  return s.substr(a, b - a);
}

// Blank-line splitter for corpora that store the body as one string.
std::vector<std::string> split_blank_lines(const std::string& body) {
  std::vector<std::string> paras;
  std::string cur;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      if (!trim(cur).empty()) paras.push_back(trim(cur));
      cur.clear();
    } else {
      if (!cur.empty()) cur += "\n";
      cur += line;
    }
  }
  if (!trim(cur).empty()) paras.push_back(trim(cur));
  return paras;
}

Label parse_label(const std::string& s, std::size_t line_no) {
  if (s == "true") return Label::true_news;
  if (s == "satire") return Label::satire;
  throw DataError("unknown label '" + s + "' at line " +
                  std::to_string(line_no));
}

}  // namespace

bool is_punct_token(const std::string& token) {
  if (token.empty()) return false;
  for (unsigned char c : token)
    if (!is_punct_char(c)) return false;
  return true;
}

std::vector<RawDocument> parse_corpus(std::istream& in,
                                      const std::string& origin) {
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("malformed line " + std::to_string(line_no) + " in " +
                      origin + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("source") ||
        !j.contains("label") || !j.contains("paragraphs"))
      throw DataError("line " + std::to_string(line_no) + " in " + origin +
                      ": expected keys id, source, label, paragraphs");
    RawDocument d;
    d.id = j.at("id").get<std::string>();
    d.source = j.at("source").get<std::string>();
    d.label = parse_label(j.at("label").get<std::string>(), line_no);
    if (d.source.empty())
      throw DataError("document '" + d.id + "' has an empty source");
    const json& paras = j.at("paragraphs");
    if (paras.is_string()) {
      d.paragraphs = split_blank_lines(paras.get<std::string>());
    } else if (paras.is_array()) {
      for (const auto& p : paras) d.paragraphs.push_back(p.get<std::string>());
    } else {
      throw DataError("line " + std::to_string(line_no) + " in " + origin +
                      ": paragraphs must be an array or string");
    }
    if (d.paragraphs.empty())
      throw DataError("document '" + d.id + "' has no paragraphs");
    for (const auto& p : d.paragraphs)
      if (trim(p).empty())
        throw DataError("document '" + d.id + "' has an empty paragraph");
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<RawDocument> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open corpus file: " + path);
  return parse_corpus(in, path);
}

void write_corpus(const std::vector<RawDocument>& docs,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write corpus file: " + path);
  for (const auto& d : docs) {
    json j{{"id", d.id},
           {"source", d.source},
           {"label", label_name(d.label)},
           {"paragraphs", d.paragraphs}};
    out << j.dump() << "\n";
  }
}

SplitSpec load_split_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open split spec: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed split spec: ") + e.what());
  }
  SplitSpec spec;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string v = it.value().get<std::string>();
    Partition p;
    if (v == "train") p = Partition::train;
    else if (v == "validation") p = Partition::validation;
    else if (v == "test") p = Partition::test;
    else
      throw DataError("split spec: unknown partition '" + v + "' for source '" +
                      it.key() + "'");
    spec.partition[it.key()] = p;
  }
  return spec;
}

std::vector<Sentence> tokenize_paragraph(const std::string& text) {
  struct Piece {
    std::string surface;
    bool chunk_final;  // followed by whitespace in the source
  };
  std::vector<Piece> pieces;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space_char(text[i])) ++i;
    if (i >= n) break;
    std::size_t chunk_end = i;
    while (chunk_end < n && !is_space_char(text[chunk_end])) ++chunk_end;
    std::size_t first = pieces.size();
    while (i < chunk_end) {
      if (is_punct_char(text[i])) {
        pieces.push_back({std::string(1, text[i]), false});
        ++i;
      } else {
        std::size_t j = i;
        while (j < chunk_end && !is_punct_char(text[j])) ++j;
        pieces.push_back({text.substr(i, j - i), false});
        i = j;
      }
    }
    if (pieces.size() > first) pieces.back().chunk_final = true;
  }

  std::vector<Sentence> sentences;
  Sentence cur;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const Piece& p = pieces[k];
    cur.tokens.push_back({p.surface, to_lower(p.surface)});
    bool terminal = p.surface == "." || p.surface == "!" || p.surface == "?";
    bool last = k + 1 == pieces.size();
    if (terminal && (p.chunk_final || last)) {
      sentences.push_back(std::move(cur));
      cur = Sentence{};
    }
  }
  if (!cur.tokens.empty()) {
    // unterminated trailing fragment joins the previous sentence
    if (!sentences.empty()) {
      auto& tail = sentences.back().tokens;
      tail.insert(tail.end(), cur.tokens.begin(), cur.tokens.end());
    } else {
      sentences.push_back(std::move(cur));
    }
  }
  return sentences;
}

TokenizedDocument tokenize(const RawDocument& doc) {
  TokenizedDocument out;
  out.id = doc.id;
  out.label = doc.label;
  for (const auto& p : doc.paragraphs) {
    TokenizedParagraph tp;
    tp.raw = p;
    tp.sentences = tokenize_paragraph(p);
    out.paragraphs.push_back(std::move(tp));
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<TokenizedDocument>& docs,
                            std::size_t min_count) {
  std::map<std::string, std::size_t> word_freq;
  std::map<char, std::size_t> char_freq;
  for (const auto& d : docs)
    for (const auto& p : d.paragraphs)
      for (const auto& s : p.sentences)
        for (const auto& t : s.tokens) {
          ++word_freq[t.lower];
          for (char c : t.surface) ++char_freq[c];
        }

  Vocabulary v;
  std::vector<std::pair<std::string, std::size_t>> ws;
  for (const auto& [w, f] : word_freq)
    if (f >= min_count) ws.emplace_back(w, f);
  std::sort(ws.begin(), ws.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (std::size_t i = 0; i < ws.size(); ++i) {
    v.words.push_back(ws[i].first);
    v.word_to_index[ws[i].first] = static_cast<int>(i) + 2;
  }

  std::vector<std::pair<char, std::size_t>> cs(char_freq.begin(),
                                               char_freq.end());
  std::sort(cs.begin(), cs.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (std::size_t i = 0; i < cs.size(); ++i) {
    v.chars.push_back(cs[i].first);
    v.char_to_index[cs[i].first] = static_cast<int>(i) + 2;
  }
  return v;
}

ShapedDocument shape_document(const TokenizedDocument& doc,
                              const Vocabulary& vocab, const ShapeDims& dims) {
  ShapedDocument s;
  s.id = doc.id;
  s.label = doc.label;
  s.dims = dims;
  s.word_counts.assign(dims.paragraphs, 0);
  s.word_indices.assign(dims.paragraphs * dims.words, Vocabulary::kPad);
  s.char_indices.assign(dims.paragraphs * dims.words * dims.chars,
                        Vocabulary::kPad);
  s.paragraph_count = std::min(doc.paragraphs.size(), dims.paragraphs);
  for (std::size_t p = 0; p < s.paragraph_count; ++p) {
    std::size_t w = 0;
    for (const auto& sent : doc.paragraphs[p].sentences) {
      for (const auto& tok : sent.tokens) {
        if (w >= dims.words) break;
        s.word_indices[p * dims.words + w] = vocab.word_index(tok.lower);
        int* ch = s.char_indices.data() + (p * dims.words + w) * dims.chars;
        std::size_t nc = std::min(tok.surface.size(), dims.chars);
        for (std::size_t c = 0; c < nc; ++c)
          ch[c] = vocab.char_index(tok.surface[c]);
        ++w;
      }
      if (w >= dims.words) break;
    }
    s.word_counts[p] = w;
  }
  return s;
}

CorpusSplit split_by_source(const std::vector<RawDocument>& docs,
                            const SplitSpec& spec) {
  CorpusSplit out;
  for (const auto& d : docs) {
    auto it = spec.partition.find(d.source);
    if (it == spec.partition.end())
      throw DataError("source '" + d.source + "' has no partition");
    switch (it->second) {
      case Partition::train: out.train.push_back(d); break;
      case Partition::validation: out.validation.push_back(d); break;
      case Partition::test: out.test.push_back(d); break;
    }
  }
  return out;
}

}  // namespace satire
