#include "satire/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace satire {

namespace {

// ln Gamma via Lanczos approximation
double log_gamma(double x) {
  static const double coef[6] = {76.18009172947146,  -86.50532032941677,
                                 24.01409824083091,  -1.231739572450155,
                                 0.1208650973866179e-2, -0.5395239384953e-5};
  double y = x;
  double tmp = x + 5.5;
  tmp -= (x + 0.5) * std::log(tmp);
  double ser = 1.000000000190015;
  for (double c : coef) ser += c / ++y;
  return -tmp + std::log(2.5066282746310005 * ser / x);
}

// continued fraction for the incomplete beta function (Lentz's method)
double beta_cf(double a, double b, double x) {
  const int max_iter = 300;
  const double eps = 3e-14, fpmin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

// regularized incomplete beta I_x(a, b)
double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                    a * std::log(x) + b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double variance_of(const std::vector<double>& xs) {
  double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

char hex_digit(int v) { return v < 10 ? static_cast<char>('0' + v)
                                      : static_cast<char>('a' + v - 10); }

std::string escape_html(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  return std::sqrt(variance_of(xs));
}

std::vector<double> feature_importance(
    const std::vector<std::vector<double>>& W) {
  if (W.empty() || W[0].empty())
    throw DataError("feature_importance: empty weight matrix");
  std::size_t m = W[0].size();
  std::vector<double> I(W.size(), 0.0);
  for (std::size_t k = 0; k < W.size(); ++k) {
    if (W[k].size() != m)
      throw DataError("feature_importance: ragged weight matrix");
    double s = 0.0;
    for (double w : W[k]) s += std::abs(w);
    I[k] = s / static_cast<double>(m);
  }
  return I;
}

std::vector<FamilyScore> family_importance(
    const std::vector<FeatureImportance>& features) {
  struct Key {
    FeatureFamily family;
    FeatureLevel level;
    bool operator==(const Key& o) const {
      return family == o.family && level == o.level;
    }
  };
  std::vector<Key> keys;
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  for (const auto& f : features) {
    Key k{f.family, f.level};
    std::size_t idx = 0;
    for (; idx < keys.size(); ++idx)
      if (keys[idx] == k) break;
    if (idx == keys.size()) {
      keys.push_back(k);
      sums.push_back(0.0);
      counts.push_back(0);
    }
    sums[idx] += f.importance;
    ++counts[idx];
  }
  std::vector<FamilyScore> out;
  double global_max = 0.0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    FamilyScore fs;
    fs.family = keys[i].family;
    fs.level = keys[i].level;
    fs.mean_importance = sums[i] / static_cast<double>(counts[i]);
    global_max = std::max(global_max, fs.mean_importance);
    out.push_back(fs);
  }
  for (auto& fs : out)
    fs.scaled = global_max > 0.0 ? fs.mean_importance / global_max : 0.0;
  return out;
}

ImportanceReport importance_report(
    const HierNetModel& model, const std::vector<std::string>& feature_names,
    const std::vector<FeatureFamily>& feature_families) {
  if (feature_names.size() != feature_families.size())
    throw DataError("importance_report: name/family size mismatch");
  ImportanceReport report;
  auto add_level = [&](const Parameter& W1, FeatureLevel level) {
    // stored [hidden x K]; the importance matrix is its transpose [K x M]
    std::size_t hidden = W1.value.rows(), K = W1.value.cols();
    if (K != feature_names.size())
      throw DataError("importance_report: " + W1.name + " has " +
                      std::to_string(K) + " feature columns, expected " +
                      std::to_string(feature_names.size()));
    std::vector<std::vector<double>> Wt(K, std::vector<double>(hidden));
    for (std::size_t i = 0; i < hidden; ++i)
      for (std::size_t k = 0; k < K; ++k) Wt[k][i] = W1.value.at(i, k);
    auto I = feature_importance(Wt);
    for (std::size_t k = 0; k < K; ++k)
      report.features.push_back(
          {feature_names[k], feature_families[k], level, I[k]});
  };
  if (model.pmlp) add_level(model.pmlp->W1, FeatureLevel::paragraph);
  if (model.dmlp) add_level(model.dmlp->W1, FeatureLevel::document);
  if (report.features.empty())
    throw DataError("importance_report: variant " +
                    std::string(variant_name(model.config.variant)) +
                    " has no feature weights");
  report.families = family_importance(report.features);
  return report;
}

WelchResult welch_t_test(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw DataError("welch_t_test: both samples need at least 2 values");
  double va = variance_of(a), vb = variance_of(b);
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double se2 = va / na + vb / nb;
  if (se2 <= 0.0) throw DataError("welch_t_test: degenerate variance");
  WelchResult r;
  r.t = (mean_of(a) - mean_of(b)) / std::sqrt(se2);
  r.df = se2 * se2 /
         (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
  double x = r.df / (r.df + r.t * r.t);
  r.p = r.t == 0.0 ? 1.0 : reg_inc_beta(r.df / 2.0, 0.5, x);
  return r;
}

std::vector<std::size_t> top_k_indices(const std::vector<double>& alpha,
                                       std::size_t k) {
  std::vector<std::size_t> order(alpha.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) {
                     return alpha[x] > alpha[y];
                   });
  order.resize(std::min(k, order.size()));
  return order;
}

ClassSamples top_k_paragraph_samples(
    HierNetModel& model, const std::vector<DocumentInput>& docs,
    const std::vector<std::vector<std::vector<double>>>& raw_paragraph_features,
    std::size_t k) {
  if (docs.size() != raw_paragraph_features.size())
    throw DataError("top_k_paragraph_samples: feature rows do not match docs");
  ClassSamples out;
  for (std::size_t di = 0; di < docs.size(); ++di) {
    auto rec = attention_record(model, docs[di]);
    for (std::size_t oi : top_k_indices(rec.alpha, k)) {
      std::size_t slot = rec.slots[oi];
      if (slot >= raw_paragraph_features[di].size())
        throw DataError("top_k_paragraph_samples: missing raw features for "
                        "paragraph " + std::to_string(slot));
      const auto& fv = raw_paragraph_features[di][slot];
      auto& dest = docs[di].shaped.label == Label::satire ? out.satire
                                                          : out.truth;
      if (dest.empty()) dest.resize(fv.size());
      if (dest.size() != fv.size())
        throw DataError("top_k_paragraph_samples: feature dim mismatch");
      for (std::size_t f = 0; f < fv.size(); ++f) dest[f].push_back(fv[f]);
    }
  }
  return out;
}

ClassSamples document_samples(
    const std::vector<Label>& labels,
    const std::vector<std::vector<double>>& raw_document_features) {
  if (labels.size() != raw_document_features.size())
    throw DataError("document_samples: label/feature size mismatch");
  ClassSamples out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& fv = raw_document_features[i];
    auto& dest = labels[i] == Label::satire ? out.satire : out.truth;
    if (dest.empty()) dest.resize(fv.size());
    for (std::size_t f = 0; f < fv.size(); ++f) dest[f].push_back(fv[f]);
  }
  return out;
}

std::vector<FeatureStat> feature_stats(
    const ClassSamples& samples, const std::vector<std::string>& names,
    const std::vector<FeatureFamily>& families, const std::string& level) {
  if (samples.satire.size() != names.size() ||
      samples.truth.size() != names.size())
    throw DataError("feature_stats: sample/name size mismatch");
  std::vector<FeatureStat> out;
  for (std::size_t f = 0; f < names.size(); ++f) {
    FeatureStat st;
    st.name = names[f];
    st.family = families[f];
    st.level = level;
    st.satire_mean = mean_of(samples.satire[f]);
    st.satire_std = sample_std(samples.satire[f]);
    st.true_mean = mean_of(samples.truth[f]);
    st.true_std = sample_std(samples.truth[f]);
    try {
      st.test = welch_t_test(samples.satire[f], samples.truth[f]);
      st.test_ok = true;
    } catch (const DataError&) {
      st.test_ok = false;
    }
    out.push_back(std::move(st));
  }
  return out;
}

std::string attention_report_html(const AttentionRecord& record,
                                  const RawDocument& doc) {
  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
       << "<title>" << escape_html(record.doc_id) << "</title>\n</head>\n"
       << "<body style=\"font-family: Georgia, serif; max-width: 48em; "
          "margin: 2em auto;\">\n"
       << "<h2>" << escape_html(record.doc_id) << " ("
       << label_name(doc.label) << ")</h2>\n";
  for (std::size_t i = 0; i < record.alpha.size(); ++i) {
    std::size_t slot = record.slots[i];
    const std::string& text =
        slot < doc.paragraphs.size() ? doc.paragraphs[slot] : std::string();
    char raw_buf[32], scaled_buf[32];
    std::snprintf(raw_buf, sizeof raw_buf, "%.4f", record.alpha[i]);
    std::snprintf(scaled_buf, sizeof scaled_buf, "%.2f", record.scaled[i]);
    // highlight opacity follows the scaled score
    int alpha_byte = static_cast<int>(record.scaled[i] * 255.0 + 0.5);
    std::string hex;
    hex += hex_digit(alpha_byte / 16);
    hex += hex_digit(alpha_byte % 16);
    html << "<div style=\"margin: 0.6em 0; padding: 0.5em 0.8em; "
            "background-color: #ff9e2d" << hex
         << "; border-radius: 4px;\">\n"
         << "<p style=\"margin: 0;\">" << escape_html(text) << "</p>\n"
         << "<p style=\"margin: 0.3em 0 0; font-size: 0.85em; "
            "color: #444;\">&alpha; = " << raw_buf
         << " &middot; scaled " << scaled_buf << "</p>\n</div>\n";
  }
  html << "</body>\n</html>\n";
  return html.str();
}

}  // namespace satire
