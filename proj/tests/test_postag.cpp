#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "satire/postag.hpp"
#include "satire/tagset.hpp"

using namespace satire;

namespace {

std::vector<TaggedSentence> seed_corpus() {
  return load_tagged_corpus(std::string(SATIRE_DATA_DIR) + "/pos_seed.tsv");
}

}  // namespace

TEST_CASE("tagset is the fixed Penn inventory") {
  CHECK(penn_tagset().size() == 45);
  CHECK(tag_id("CC") == 0);
  CHECK(tag_id("NN") == 11);
  CHECK(tag_id("``") == 44);
  CHECK(tag_id("BOGUS") == -1);
}

TEST_CASE("training memorizes a singleton and validates input") {
  TaggedSentence s{{"the", "cat"}, {"DT", "NN"}};
  auto model = TaggerModel::train({s}, 5);
  CHECK(model.tag({"the", "cat"}) == std::vector<std::string>{"DT", "NN"});

  CHECK_THROWS_WITH_AS(TaggerModel::train({}, 5), "empty training corpus",
                       DataError);
  TaggedSentence bad{{"x"}, {"BOGUS"}};
  CHECK_THROWS_WITH_AS(TaggerModel::train({bad}, 1), "unknown tag 'BOGUS'",
                       DataError);
  TaggedSentence ragged{{"x", "y"}, {"NN"}};
  CHECK_THROWS_AS(TaggerModel::train({ragged}, 1), DataError);
}

TEST_CASE("tag output length and determinism") {
  auto corpus = seed_corpus();
  auto model = TaggerModel::train(corpus, 3, 7);
  CHECK(model.tag({}).empty());
  std::vector<std::string> sent = {"The", "editor", "approved", "the",
                                   "budget", "."};
  auto once = model.tag(sent);
  CHECK(once.size() == sent.size());
  CHECK(model.tag(sent) == once);
}

TEST_CASE("training is deterministic given corpus, epochs, seed") {
  auto corpus = seed_corpus();
  auto a = TaggerModel::train(corpus, 3, 11);
  auto b = TaggerModel::train(corpus, 3, 11);
  auto keys = a.feature_keys();
  REQUIRE(keys == b.feature_keys());
  for (const auto& k : keys) CHECK(a.weight_row(k) == b.weight_row(k));
}

TEST_CASE("digits fall to CD through the is-digit template") {
  auto model = TaggerModel::train(seed_corpus(), 5, 7);
  auto tags = model.tag({"We", "saw", "12345", "birds", "."});
  CHECK(tags[2] == "CD");
}

TEST_CASE("held-out accuracy on the seed corpus") {
  auto corpus = seed_corpus();
  REQUIRE(corpus.size() >= 45);
  std::vector<TaggedSentence> train(corpus.begin(), corpus.end() - 5);
  std::vector<TaggedSentence> heldout(corpus.end() - 5, corpus.end());
  auto model = TaggerModel::train(train, 5, 7);
  double acc = model.accuracy(heldout);
  std::printf("held-out tagging accuracy: %.2f\n", acc);
  // measured 0.73 on this fixture; the shortfall is out-of-vocabulary words
  CHECK(acc >= 0.70);
  CHECK(model.accuracy(train) >= 0.97);
}

TEST_CASE("averaged weights equal the mean of per-step snapshots") {
  // one sentence, one epoch: two timesteps traced by hand.
  // t=1: zero scores guess CC(0), gold DT -> +1/-1 on the step-1 features;
  // t=2: w=x/suf1=x now score DT, guess DT, gold NN -> +1/-1 on step-2
  // features. Averages over T=2 follow directly.
  TaggedSentence s{{"x", "x"}, {"DT", "NN"}};
  auto model = TaggerModel::train({s}, 1, 3);
  int CC = tag_id("CC"), DT = tag_id("DT"), NN = tag_id("NN");

  auto row = model.weight_row("w=x");
  CHECK(row[DT] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(row[CC] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(row[NN] == doctest::Approx(0.5).epsilon(1e-15));

  row = model.weight_row("pt=<s>");
  CHECK(row[DT] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(row[CC] == doctest::Approx(-1.0).epsilon(1e-15));

  row = model.weight_row("pt=CC");
  CHECK(row[NN] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(row[DT] == doctest::Approx(-0.5).epsilon(1e-15));

  row = model.weight_row("nw=x");
  CHECK(row[DT] == doctest::Approx(1.0).epsilon(1e-15));

  row = model.weight_row("pw=x");
  CHECK(row[NN] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(row[DT] == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("weight table round-trips through the flat form") {
  auto model = TaggerModel::train(seed_corpus(), 2, 7);
  auto keys = model.feature_keys();
  std::vector<double> flat;
  for (const auto& k : keys) {
    auto row = model.weight_row(k);
    flat.insert(flat.end(), row.begin(), row.end());
  }
  auto back = TaggerModel::from_weights(keys, flat);
  std::vector<std::string> sent = {"The", "crowd", "cheered", "."};
  CHECK(back.tag(sent) == model.tag(sent));
  CHECK_THROWS_AS(TaggerModel::from_weights(keys, {1.0}), DataError);
}

TEST_CASE("load_pretagged verifies alignment") {
  RawDocument raw{"d", "s", Label::true_news,
                  {"The mayor spoke. He left.", "A new day."}};
  auto doc = tokenize(raw);

  std::string good_path = "/tmp/satire_test_pretag_good.tsv";
  {
    std::ofstream out(good_path);
    out << "The\tDT\nmayor\tNN\nspoke\tVBD\n.\t.\n\n"
        << "He\tPRP\nleft\tVBD\n.\t.\n\n"
        << "A\tDT\nnew\tJJ\nday\tNN\n.\t.\n";
  }
  auto tags = load_pretagged(good_path, doc);
  REQUIRE(tags.size() == 2);
  REQUIRE(tags[0].size() == 2);
  CHECK(tags[0][0] == std::vector<std::string>{"DT", "NN", "VBD", "."});
  CHECK(tags[1][0] == std::vector<std::string>{"DT", "JJ", "NN", "."});

  std::string bad_path = "/tmp/satire_test_pretag_bad.tsv";
  {
    std::ofstream out(bad_path);
    out << "The\tDT\nmayor\tNN\nspoke\tVBD\nextra\tNN\n.\t.\n\n"
        << "He\tPRP\nleft\tVBD\n.\t.\n\n"
        << "A\tDT\nnew\tJJ\nday\tNN\n.\t.\n";
  }
  try {
    load_pretagged(bad_path, doc);
    FAIL("expected alignment error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("position 3") != std::string::npos);
  }

  // blank file only matches an empty document
  std::string empty_path = "/tmp/satire_test_pretag_empty.tsv";
  { std::ofstream out(empty_path); }
  TokenizedDocument empty_doc;
  empty_doc.id = "e";
  CHECK(load_pretagged(empty_path, empty_doc).empty());
  CHECK_THROWS_AS(load_pretagged(empty_path, doc), DataError);

  std::remove(good_path.c_str());
  std::remove(bad_path.c_str());
  std::remove(empty_path.c_str());
}
