#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "satire/error.hpp"

namespace satire {

enum class Label { true_news, satire };

inline const char* label_name(Label l) {
  return l == Label::satire ? "satire" : "true";
}

// One news article: body paragraphs only, no headline/author metadata.
struct RawDocument {
  std::string id;
  std::string source;
  Label label = Label::true_news;
  std::vector<std::string> paragraphs;
};

struct Token {
  std::string surface;
  std::string lower;
};

struct Sentence {
  std::vector<Token> tokens;
};

struct TokenizedParagraph {
  std::vector<Sentence> sentences;
  std::string raw;  // original paragraph text, kept for character counts
  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.tokens.size();
    return n;
  }
};

struct TokenizedDocument {
  std::string id;
  Label label = Label::true_news;
  std::vector<TokenizedParagraph> paragraphs;
};

// Reserved index 0 = padding, 1 = unknown; real entries start at 2.
struct Vocabulary {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  std::unordered_map<std::string, int> word_to_index;
  std::unordered_map<char, int> char_to_index;
  std::vector<std::string> words;  // words[i] has index i + 2
  std::vector<char> chars;         // chars[i] has index i + 2

  int word_index(const std::string& lower) const {
    auto it = word_to_index.find(lower);
    return it == word_to_index.end() ? kUnk : it->second;
  }
  int char_index(char c) const {
    auto it = char_to_index.find(c);
    return it == char_to_index.end() ? kUnk : it->second;
  }
  std::size_t word_table_size() const { return words.size() + 2; }
  std::size_t char_table_size() const { return chars.size() + 2; }
};

struct ShapeDims {
  std::size_t paragraphs = 16;
  std::size_t words = 128;
  std::size_t chars = 24;
};

// Fixed-shape index arrays for the network. Positions beyond true lengths
// hold the padding index 0.
struct ShapedDocument {
  std::string id;
  Label label = Label::true_news;
  ShapeDims dims;
  std::size_t paragraph_count = 0;
  std::vector<std::size_t> word_counts;  // [paragraphs]
  std::vector<int> word_indices;         // [paragraphs * words]
  std::vector<int> char_indices;         // [paragraphs * words * chars]

  int word_at(std::size_t p, std::size_t w) const {
    return word_indices[p * dims.words + w];
  }
  const int* chars_at(std::size_t p, std::size_t w) const {
    return char_indices.data() + (p * dims.words + w) * dims.chars;
  }
};

enum class Partition { train, validation, test };

struct SplitSpec {
  std::unordered_map<std::string, Partition> partition;  // source -> slot
};

struct CorpusSplit {
  std::vector<RawDocument> train;
  std::vector<RawDocument> validation;
  std::vector<RawDocument> test;
};

// JSON Lines, one object per line with keys id/source/label/paragraphs.
// `paragraphs` may also be a single string; it is then split on blank lines.
std::vector<RawDocument> load_corpus(const std::string& path);
std::vector<RawDocument> parse_corpus(std::istream& in,
                                      const std::string& origin);
void write_corpus(const std::vector<RawDocument>& docs,
                  const std::string& path);

SplitSpec load_split_spec(const std::string& path);

// Whitespace split with punctuation characters detached as standalone
// tokens. Sentences end after . ! ? followed by whitespace or the end of the
// paragraph; a trailing unterminated fragment joins the preceding sentence.
TokenizedDocument tokenize(const RawDocument& doc);
std::vector<Sentence> tokenize_paragraph(const std::string& text);

bool is_punct_token(const std::string& token);

// Words with corpus frequency >= min_count get indices >= 2 in descending
// frequency order (ties lexicographic). All observed characters are indexed
// the same way.
Vocabulary build_vocabulary(const std::vector<TokenizedDocument>& docs,
                            std::size_t min_count = 2);

// Keeps the head on truncation: first `dims.paragraphs` paragraphs, first
// `dims.words` tokens, first `dims.chars` bytes. Word lookup uses the
// lowercase form; character lookup uses the surface form.
ShapedDocument shape_document(const TokenizedDocument& doc,
                              const Vocabulary& vocab,
                              const ShapeDims& dims = {});

CorpusSplit split_by_source(const std::vector<RawDocument>& docs,
                            const SplitSpec& spec);

}  // namespace satire
