#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "satire/analysis.hpp"
#include "synthetic.hpp"

using namespace satire;
using namespace satire::testing;

TEST_CASE("feature importance is the mean absolute weight") {
  auto I = feature_importance({{1.0, -2.0}, {3.0, 4.0}});
  REQUIRE(I.size() == 2);
  CHECK(I[0] == 1.5);
  CHECK(I[1] == 3.5);

  auto Z = feature_importance({{0.0, 0.0, 0.0}});
  CHECK(Z[0] == 0.0);

  // homogeneity: doubling the matrix doubles every I_k
  auto D = feature_importance({{2.0, -4.0}, {6.0, 8.0}});
  CHECK(D[0] == 2.0 * I[0]);
  CHECK(D[1] == 2.0 * I[1]);

  // invariant under output-column permutation
  auto P = feature_importance({{-2.0, 1.0}, {4.0, 3.0}});
  CHECK(P == I);

  // equivariant under feature-row permutation
  auto R = feature_importance({{3.0, 4.0}, {1.0, -2.0}});
  CHECK(R[0] == I[1]);
  CHECK(R[1] == I[0]);

  CHECK_THROWS_AS(feature_importance({}), DataError);
  CHECK_THROWS_AS(feature_importance({{1.0, 2.0}, {1.0}}), DataError);
}

TEST_CASE("family importance averages members and max-scales globally") {
  std::vector<FeatureImportance> feats = {
      {"a", FeatureFamily::structural, FeatureLevel::paragraph, 1.0},
      {"b", FeatureFamily::structural, FeatureLevel::paragraph, 3.0},
      {"c", FeatureFamily::readability, FeatureLevel::document, 1.0},
  };
  auto fams = family_importance(feats);
  REQUIRE(fams.size() == 2);
  CHECK(fams[0].mean_importance == 2.0);
  CHECK(fams[0].scaled == 1.0);
  CHECK(fams[1].mean_importance == 1.0);
  CHECK(fams[1].scaled == 0.5);

  // single family self-normalizes to 1.0
  auto solo = family_importance({feats[2]});
  REQUIRE(solo.size() == 1);
  CHECK(solo[0].scaled == 1.0);

  // exactly one family at the top (ties permitted), everything in (0, 1]
  double top = 0.0;
  for (const auto& f : fams) {
    CHECK(f.scaled > 0.0);
    CHECK(f.scaled <= 1.0);
    top = std::max(top, f.scaled);
  }
  CHECK(top == 1.0);
}

TEST_CASE("importance report reads the first MLP layer of each level") {
  auto cfg = small_config(Variant::v4LHNPD, 3);
  auto model = build_model(cfg);
  std::vector<std::string> names = {"f0", "f1", "f2", "f3", "f4"};
  std::vector<FeatureFamily> fams = {
      FeatureFamily::psycholinguistic, FeatureFamily::stylistic,
      FeatureFamily::readability, FeatureFamily::structural,
      FeatureFamily::structural};
  auto report = importance_report(model, names, fams);
  CHECK(report.features.size() == 2 * names.size());  // both levels
  for (const auto& f : report.features) CHECK(f.importance >= 0.0);

  // hand-recompute one entry from the stored matrix
  const auto& W1 = model.pmlp->W1.value;
  double s = 0.0;
  for (std::size_t i = 0; i < W1.rows(); ++i) s += std::abs(W1.at(i, 2));
  CHECK(report.features[2].importance ==
        doctest::Approx(s / static_cast<double>(W1.rows())).epsilon(1e-12));

  auto plain = build_model(small_config(Variant::v4LHN, 3));
  CHECK_THROWS_AS(importance_report(plain, names, fams), DataError);
}

TEST_CASE("welch t-test matches the frozen oracle") {
  auto r1 = welch_t_test({1, 2, 3}, {4, 5, 6});
  CHECK(std::abs(r1.t - (-3.6742346141747673)) < 1e-3);
  CHECK(std::abs(r1.p - 0.021311641128756727) < 1e-3);
  CHECK(r1.df == doctest::Approx(4.0).epsilon(1e-9));

  auto r2 = welch_t_test({1.1, 2.3, 3.1, 4.8}, {2.0, 2.1, 3.9, 5.5, 6.1});
  CHECK(std::abs(r2.t - (-0.9549973448272608)) < 1e-3);
  CHECK(std::abs(r2.p - 0.3714963683855221) < 1e-3);

  auto r3 = welch_t_test({10, 12, 9, 11, 10, 13}, {10.5, 11.5, 10, 12, 9.5});
  CHECK(std::abs(r3.t - 0.17566515003642524) < 1e-3);
  CHECK(std::abs(r3.p - 0.8645243367738038) < 1e-3);
}

TEST_CASE("welch t-test symmetry and degenerate inputs") {
  auto a = welch_t_test({1, 2, 3}, {4, 5, 6});
  auto b = welch_t_test({4, 5, 6}, {1, 2, 3});
  CHECK(a.t == doctest::Approx(-b.t).epsilon(1e-12));
  CHECK(a.p == doctest::Approx(b.p).epsilon(1e-12));

  // identical samples with variance: t = 0, p = 1
  auto same = welch_t_test({1, 2, 3, 4}, {1, 2, 3, 4});
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);

  CHECK_THROWS_AS(welch_t_test({1.0}, {1, 2}), DataError);
  CHECK_THROWS_AS(welch_t_test({2, 2, 2}, {2, 2, 2}), DataError);
}

TEST_CASE("top-k attention selection") {
  CHECK(top_k_indices({0.5, 0.3, 0.1, 0.1}, 3) ==
        std::vector<std::size_t>{0, 1, 2});
  CHECK(top_k_indices({0.5, 0.5}, 3) == std::vector<std::size_t>{0, 1});
  CHECK(top_k_indices({0.25, 0.25, 0.25, 0.25}, 1) ==
        std::vector<std::size_t>{0});
  CHECK(top_k_indices({0.1, 0.7, 0.2}, 2) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("class sample pooling and per-feature statistics") {
  std::vector<Label> labels = {Label::satire, Label::true_news, Label::satire};
  std::vector<std::vector<double>> feats = {{1.0, 10.0}, {2.0, 20.0},
                                            {3.0, 30.0}};
  auto samples = document_samples(labels, feats);
  REQUIRE(samples.satire.size() == 2);
  CHECK(samples.satire[0] == std::vector<double>{1.0, 3.0});
  CHECK(samples.truth[1] == std::vector<double>{20.0});

  samples.truth[0] = {2.0, 4.0, 6.0};
  samples.truth[1] = {20.0, 40.0, 60.0};
  auto stats = feature_stats(samples, {"f0", "f1"},
                             {FeatureFamily::structural,
                              FeatureFamily::structural},
                             "document");
  REQUIRE(stats.size() == 2);
  CHECK(stats[0].satire_mean == 2.0);
  CHECK(stats[0].true_mean == 4.0);
  CHECK(stats[0].test_ok);
  CHECK(stats[0].level == "document");
}

TEST_CASE("attention heatmap html") {
  AttentionRecord rec;
  rec.doc_id = "doc<1>";
  rec.alpha = {0.6, 0.3, 0.1};
  rec.scaled = {1.0, 0.5, 0.1 / 0.6};
  rec.slots = {0, 1, 2};
  RawDocument doc{"doc<1>", "s", Label::satire,
                  {"First & loudest.", "Second paragraph.", "Third one."}};
  auto html = attention_report_html(rec, doc);
  CHECK(html.find("0.6000") != std::string::npos);
  CHECK(html.find("1.00") != std::string::npos);
  CHECK(html.find("0.50") != std::string::npos);
  CHECK(html.find("0.17") != std::string::npos);
  CHECK(html.find("First &amp; loudest.") != std::string::npos);
  CHECK(html.find("doc&lt;1&gt;") != std::string::npos);
  CHECK(html.find("<script") == std::string::npos);

  AttentionRecord solo;
  solo.doc_id = "solo";
  solo.alpha = {1.0};
  solo.scaled = {1.0};
  solo.slots = {0};
  RawDocument sdoc{"solo", "s", Label::true_news, {"Only paragraph."}};
  CHECK(attention_report_html(solo, sdoc).find("1.00") != std::string::npos);
}
