#include "satire/baseline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

namespace satire {

namespace {

std::string to_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> lowercase_tokens(const TokenizedDocument& doc) {
  std::vector<std::string> toks;
  for (const auto& p : doc.paragraphs)
    for (const auto& s : p.sentences)
      for (const auto& t : s.tokens) toks.push_back(t.lower);
  return toks;
}

// lowercased document text, paragraphs joined by newlines
std::string document_text(const TokenizedDocument& doc) {
  std::string text;
  for (const auto& p : doc.paragraphs) {
    if (!text.empty()) text += "\n";
    text += to_lower(p.raw);
  }
  return text;
}

void collect_word_grams(const TokenizedDocument& doc,
                        std::map<std::string, std::size_t>& counts) {
  auto toks = lowercase_tokens(doc);
  for (const auto& t : toks) ++counts["1|" + t];
  for (std::size_t i = 0; i + 1 < toks.size(); ++i)
    ++counts["2|" + toks[i] + " " + toks[i + 1]];
}

void collect_char_grams(const TokenizedDocument& doc,
                        std::map<std::string, std::size_t>& counts) {
  std::string text = document_text(doc);
  for (std::size_t n = 2; n <= 3; ++n)
    for (std::size_t i = 0; i + n <= text.size(); ++i)
      ++counts[std::to_string(n) + "|" + text.substr(i, n)];
}

GramKind word_kind(const std::string& key) {
  return key[0] == '1' ? GramKind::word1 : GramKind::word2;
}

GramKind char_kind(const std::string& key) {
  return key[0] == '2' ? GramKind::char2 : GramKind::char3;
}

}  // namespace

NGramFeaturizer build_featurizer(const std::vector<TokenizedDocument>& train,
                                 const BaselineOptions& options,
                                 const std::vector<FeatureVector>& train_lf) {
  NGramFeaturizer fz;
  fz.options = options;

  // document frequencies over the training partition
  std::map<std::string, std::size_t> word_df, char_df;
  for (const auto& doc : train) {
    if (options.word_ngrams) {
      std::map<std::string, std::size_t> counts;
      collect_word_grams(doc, counts);
      for (const auto& [g, _] : counts) ++word_df[g];
    }
    if (options.char_ngrams) {
      std::map<std::string, std::size_t> counts;
      collect_char_grams(doc, counts);
      for (const auto& [g, _] : counts) ++char_df[g];
    }
  }
  // keys are "n|gram", so iteration yields 1-grams before 2-grams,
  // lexicographic within each order
  for (const auto& [g, df] : word_df)
    if (df >= options.min_doc_freq) {
      fz.word_gram_index[g] = fz.columns.size();
      fz.columns.push_back({g.substr(2), word_kind(g)});
    }
  for (const auto& [g, df] : char_df)
    if (df >= options.min_doc_freq) {
      fz.char_gram_index[g] = fz.columns.size();
      fz.columns.push_back({g.substr(2), char_kind(g)});
    }
  if (options.linguistic) {
    if (train_lf.empty())
      throw DataError("featurizer: linguistic block requested without "
                      "training feature vectors");
    fz.scaler = fit_scaler(train_lf);
    fz.linguistic_offset = fz.columns.size();
    for (const auto& f : train_lf[0].values)
      fz.columns.push_back({f.name, GramKind::linguistic});
  }
  return fz;
}

SparseVector featurize(const TokenizedDocument& doc,
                       const NGramFeaturizer& fz,
                       const FeatureVector* doc_features) {
  std::map<std::size_t, double> acc;
  if (fz.options.word_ngrams) {
    std::map<std::string, std::size_t> counts;
    collect_word_grams(doc, counts);
    for (const auto& [g, c] : counts) {
      auto it = fz.word_gram_index.find(g);
      if (it != fz.word_gram_index.end())
        acc[it->second] += static_cast<double>(c);
    }
  }
  if (fz.options.char_ngrams) {
    std::map<std::string, std::size_t> counts;
    collect_char_grams(doc, counts);
    for (const auto& [g, c] : counts) {
      auto it = fz.char_gram_index.find(g);
      if (it != fz.char_gram_index.end())
        acc[it->second] += static_cast<double>(c);
    }
  }
  if (fz.options.linguistic) {
    if (!doc_features)
      throw DataError("featurize: document '" + doc.id +
                      "' needs a linguistic feature vector");
    auto scaled = scale_values(fz.scaler, doc_features->raw());
    for (std::size_t i = 0; i < scaled.size(); ++i)
      if (scaled[i] != 0.0) acc[fz.linguistic_offset + i] = scaled[i];
  }
  SparseVector x;
  x.entries.assign(acc.begin(), acc.end());
  return x;
}

std::vector<double> balanced_weights(const std::vector<Label>& labels) {
  std::size_t n_satire = 0;
  for (Label l : labels)
    if (l == Label::satire) ++n_satire;
  std::size_t n_true = labels.size() - n_satire;
  if (n_satire == 0 || n_true == 0)
    throw DataError("balanced_weights: training set has a single class");
  double n = static_cast<double>(labels.size());
  std::vector<double> beta(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    beta[i] = labels[i] == Label::satire
                  ? n / (2.0 * static_cast<double>(n_satire))
                  : n / (2.0 * static_cast<double>(n_true));
  return beta;
}

double decision_value(const LinearModel& model, const SparseVector& x) {
  double v = model.bias;
  for (const auto& [col, val] : x.entries)
    if (col < model.weights.size()) v += model.weights[col] * val;
  return v;
}

LinearModel train_linear(const std::vector<SparseVector>& xs,
                         const std::vector<Label>& labels, double C,
                         int epochs) {
  if (xs.empty() || xs.size() != labels.size())
    throw DataError("train_linear: empty or mismatched training data");
  auto beta = balanced_weights(labels);  // throws on a single class
  std::size_t dim = 0;
  for (const auto& x : xs)
    for (const auto& [col, _] : x.entries) dim = std::max(dim, col + 1);

  LinearModel m;
  m.C = C;
  m.epochs = epochs;
  m.weights.assign(dim, 0.0);

  // cyclic subgradient steps on (1/2)||w||^2 + C sum_j beta_j hinge_j,
  // equivalently lambda = 1/(C*N) on the averaged objective
  double n = static_cast<double>(xs.size());
  double lambda = 1.0 / (C * n);
  std::size_t t = 0;
  for (int e = 0; e < epochs; ++e) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      ++t;
      double eta = 1.0 / (lambda * static_cast<double>(t));
      double y = labels[j] == Label::satire ? 1.0 : -1.0;
      double margin = y * decision_value(m, xs[j]);
      double shrink = 1.0 - eta * lambda;
      for (double& w : m.weights) w *= shrink;
      if (margin < 1.0) {
        double step = eta * beta[j] * y;
        for (const auto& [col, val] : xs[j].entries)
          m.weights[col] += step * val;
        m.bias += step;
      }
    }
  }
  return m;
}

BaselineMetrics evaluate_linear(const LinearModel& model,
                                const std::vector<SparseVector>& xs,
                                const std::vector<Label>& labels) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    bool pred_satire = decision_value(model, xs[i]) > 0.0;
    bool is_satire = labels[i] == Label::satire;
    if (pred_satire && is_satire) ++tp;
    else if (pred_satire) ++fp;
    else if (is_satire) ++fn;
    else ++tn;
  }
  BaselineMetrics m;
  double n = static_cast<double>(xs.size());
  if (n == 0) return m;
  m.accuracy = static_cast<double>(tp + tn) / n;
  m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

LinearModel select_C(const std::vector<SparseVector>& train_xs,
                     const std::vector<Label>& train_labels,
                     const std::vector<SparseVector>& val_xs,
                     const std::vector<Label>& val_labels,
                     const std::vector<double>& grid, int epochs) {
  if (grid.empty()) throw UsageError("select_C: empty C grid");
  LinearModel best;
  double best_f1 = -1.0;
  for (double c : grid) {
    LinearModel m = train_linear(train_xs, train_labels, c, epochs);
    double f1 = evaluate_linear(m, val_xs, val_labels).f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best = std::move(m);
    }
  }
  return best;
}

TopWeighted top_weighted(const LinearModel& model,
                         const NGramFeaturizer& fz, std::size_t k) {
  std::vector<std::size_t> desc(model.weights.size());
  for (std::size_t i = 0; i < desc.size(); ++i) desc[i] = i;
  std::vector<std::size_t> asc = desc;
  // stable sorts keep ties in ascending column order
  std::stable_sort(desc.begin(), desc.end(),
                   [&](std::size_t a, std::size_t b) {
                     return model.weights[a] > model.weights[b];
                   });
  std::stable_sort(asc.begin(), asc.end(), [&](std::size_t a, std::size_t b) {
    return model.weights[a] < model.weights[b];
  });
  TopWeighted out;
  for (std::size_t col : desc) {
    if (out.satire.size() >= k || model.weights[col] <= 0.0) break;
    out.satire.push_back(
        {fz.columns[col].gram, fz.columns[col].kind, model.weights[col]});
  }
  for (std::size_t col : asc) {
    if (out.truth.size() >= k || model.weights[col] >= 0.0) break;
    out.truth.push_back(
        {fz.columns[col].gram, fz.columns[col].kind, model.weights[col]});
  }
  return out;
}

std::string export_model_json(const LinearModel& model,
                              const NGramFeaturizer& fz) {
  nlohmann::json j;
  j["columns"] = nlohmann::json::array();
  for (const auto& c : fz.columns) j["columns"].push_back(c.gram);
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["C"] = model.C;
  return j.dump(2);
}

}  // namespace satire
