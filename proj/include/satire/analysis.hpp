#pragma once

#include <string>
#include <vector>

#include "satire/features.hpp"
#include "satire/hiernet.hpp"

namespace satire {

// I_k = mean over outputs of |w[k][m]| for a [K x M] weight matrix whose
// rows touch the raw (scaled) features directly.
std::vector<double> feature_importance(
    const std::vector<std::vector<double>>& W);

struct FeatureImportance {
  std::string name;
  FeatureFamily family;
  FeatureLevel level;
  double importance = 0.0;
};

struct FamilyScore {
  FeatureFamily family;
  FeatureLevel level;
  double mean_importance = 0.0;
  double scaled = 0.0;  // divided by the global max
};

struct ImportanceReport {
  std::vector<FeatureImportance> features;
  std::vector<FamilyScore> families;
};

// Per-feature importance from the first feature-MLP layer of each level the
// variant has, plus family means scaled by the global maximum.
ImportanceReport importance_report(
    const HierNetModel& model,
    const std::vector<std::string>& feature_names,
    const std::vector<FeatureFamily>& feature_families);

std::vector<FamilyScore> family_importance(
    const std::vector<FeatureImportance>& features);

struct WelchResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  double df = 0.0;
};

// Welch's t with Welch-Satterthwaite degrees of freedom; p comes from the
// regularized incomplete beta function.
WelchResult welch_t_test(const std::vector<double>& a,
                         const std::vector<double>& b);

double mean_of(const std::vector<double>& xs);
double sample_std(const std::vector<double>& xs);

// Indices of the k largest attention weights, ties broken toward the
// earlier paragraph.
std::vector<std::size_t> top_k_indices(const std::vector<double>& alpha,
                                       std::size_t k);

// Pools the raw paragraph feature values of each document's k highest-alpha
// paragraphs (ties prefer the earlier paragraph) into per-class samples.
struct ClassSamples {
  // [feature][sample] for each class
  std::vector<std::vector<double>> satire;
  std::vector<std::vector<double>> truth;
};

ClassSamples top_k_paragraph_samples(
    HierNetModel& model, const std::vector<DocumentInput>& docs,
    const std::vector<std::vector<std::vector<double>>>& raw_paragraph_features,
    std::size_t k = 3);

ClassSamples document_samples(
    const std::vector<Label>& labels,
    const std::vector<std::vector<double>>& raw_document_features);

struct FeatureStat {
  std::string name;
  FeatureFamily family;
  std::string level;  // "paragraph_top3" or "document"
  double satire_mean = 0.0, satire_std = 0.0;
  double true_mean = 0.0, true_std = 0.0;
  bool test_ok = false;
  WelchResult test;
};

std::vector<FeatureStat> feature_stats(
    const ClassSamples& samples, const std::vector<std::string>& names,
    const std::vector<FeatureFamily>& families, const std::string& level);

// Self-contained HTML: one block per attended paragraph with its text, raw
// alpha (4 decimals), scaled score (2 decimals), and a background whose
// intensity follows the scaled score.
std::string attention_report_html(const AttentionRecord& record,
                                  const RawDocument& doc);

}  // namespace satire
