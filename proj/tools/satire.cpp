// satire: train, evaluate, and analyze satirical-news detectors.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "satire/analysis.hpp"
#include "satire/baseline.hpp"
#include "satire/checkpoint.hpp"
#include "satire/corpus.hpp"
#include "satire/features.hpp"
#include "satire/hiernet.hpp"
#include "satire/postag.hpp"
#include "satire/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace satire;

namespace {

// ---------------------------------------------------------------------------
// shared plumbing

std::string default_out_dir() {
  const char* home = std::getenv("SATIRE_HOME");
  return home && *home ? home : ".";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory: " + dir);
}

double pct(double v) { return std::round(v * 10000.0) / 100.0; }

json metrics_json(const Metrics& m) {
  return json{{"acc", pct(m.accuracy)},
              {"pre", pct(m.precision)},
              {"rec", pct(m.recall)},
              {"f1", pct(m.f1)}};
}

json baseline_metrics_json(const BaselineMetrics& m) {
  return json{{"acc", pct(m.accuracy)},
              {"pre", pct(m.precision)},
              {"rec", pct(m.recall)},
              {"f1", pct(m.f1)}};
}

// every artifact carries the run stamp
void stamp(json& j, std::uint64_t seed, const std::string& config_hash) {
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["toolkit_version"] = kToolkitVersion;
}

std::string stamp_comment(std::uint64_t seed, const std::string& config_hash) {
  return "# seed=" + std::to_string(seed) + " config=" + config_hash +
         " version=" + kToolkitVersion + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write: " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

struct LoadedCorpus {
  std::vector<RawDocument> raw;
  std::vector<TokenizedDocument> tokens;
};

LoadedCorpus load_and_tokenize(const std::string& path) {
  LoadedCorpus c;
  c.raw = load_corpus(path);
  c.tokens.reserve(c.raw.size());
  for (const auto& d : c.raw) c.tokens.push_back(tokenize(d));
  return c;
}

// Tag source shared by several commands: either a tagger trained on a
// token<TAB>tag corpus or per-document pre-tagged files.
struct TagSource {
  std::string tagger_corpus;
  std::string pretagged_dir;
  int epochs = 5;
  std::uint64_t seed = 1;
  TaggerModel tagger;

  void prepare() {
    if (!tagger_corpus.empty()) {
      auto corpus = load_tagged_corpus(tagger_corpus);
      tagger = TaggerModel::train(corpus, epochs, seed);
    } else if (pretagged_dir.empty()) {
      throw UsageError("need --tagger-corpus or --pretagged");
    }
  }

  DocumentTags tags_for(const TokenizedDocument& doc) const {
    if (!pretagged_dir.empty())
      return load_pretagged(pretagged_dir + "/" + doc.id + ".tags", doc);
    return tagger.tag_document(doc);
  }
};

void register_tag_source(CLI::App* cmd, TagSource& src) {
  cmd->add_option("--tagger-corpus", src.tagger_corpus,
                  "token<TAB>tag training file for the built-in tagger");
  cmd->add_option("--pretagged", src.pretagged_dir,
                  "directory of <doc_id>.tags files from an external tagger");
  cmd->add_option("--tagger-epochs", src.epochs, "tagger training epochs");
}

// The full document -> network-input pipeline, rebuilt for training or
// restored from a checkpoint for inference commands.
struct InputPipeline {
  ModelConfig config;
  Vocabulary vocab;
  Lexicon lexicon;
  TaggerModel tagger;
  std::string pretagged_dir;
  FeatureScaler para_scaler, doc_scaler;
  std::vector<std::string> feature_names;
  std::vector<FeatureFamily> feature_families;

  bool wants_features() const {
    return has_paragraph_features(config.variant) ||
           has_document_features(config.variant);
  }

  DocumentFeatures features_of(const TokenizedDocument& doc) const {
    DocumentTags tags =
        !pretagged_dir.empty()
            ? load_pretagged(pretagged_dir + "/" + doc.id + ".tags", doc)
            : tagger.tag_document(doc);
    return extract_all(doc, tags, lexicon);
  }

  DocumentInput make_input(const TokenizedDocument& doc) const {
    DocumentInput in;
    in.shaped = shape_document(doc, vocab, config.dims);
    if (wants_features()) {
      auto df = features_of(doc);
      if (has_paragraph_features(config.variant)) {
        std::size_t take =
            std::min(df.paragraphs.size(), config.dims.paragraphs);
        for (std::size_t p = 0; p < take; ++p)
          in.paragraph_features.push_back(
              scale_values(para_scaler, df.paragraphs[p].raw()));
      }
      if (has_document_features(config.variant))
        in.document_features = scale_values(doc_scaler, df.document.raw());
    }
    return in;
  }

  std::vector<DocumentInput> make_inputs(
      const std::vector<TokenizedDocument>& docs) const {
    std::vector<DocumentInput> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(make_input(d));
    return out;
  }
};

InputPipeline pipeline_from_checkpoint(Checkpoint& ckpt,
                                       const std::string& pretagged_dir) {
  InputPipeline p;
  p.config = ckpt.model.config;
  p.vocab = ckpt.vocab;
  p.lexicon = ckpt.lexicon;
  p.tagger = ckpt.tagger;
  p.pretagged_dir = pretagged_dir;
  p.para_scaler = ckpt.paragraph_scaler;
  p.doc_scaler = ckpt.document_scaler;
  p.feature_names = ckpt.feature_names;
  p.feature_families = ckpt.feature_families;
  if (p.wants_features() && p.tagger.empty() && pretagged_dir.empty())
    throw DataError("checkpoint has no tagger; supply --pretagged");
  return p;
}

std::string table_row(const std::string& name, const Metrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%-12s acc %6.2f  pre %6.2f  rec %6.2f  f1 %6.2f",
                name.c_str(), pct(m.accuracy), pct(m.precision), pct(m.recall),
                pct(m.f1));
  return buf;
}

// ---------------------------------------------------------------------------
// subcommand implementations

struct CommonArgs {
  std::string out = default_out_dir();
  std::uint64_t seed = 1;
  std::string config_file;  // consumed by merge_config_args beforehand
};

void register_common(CLI::App* cmd, CommonArgs& common) {
  cmd->add_option("--out", common.out, "output directory");
  cmd->add_option("--seed", common.seed, "random seed");
  cmd->add_option("--config", common.config_file,
                  "JSON config file with flat keys mirroring flag names");
}

int cmd_ingest(const std::string& corpus_path, const CommonArgs& common) {
  auto corpus = load_and_tokenize(corpus_path);
  json opts{{"command", "ingest"}, {"corpus", corpus_path}};
  std::string hash = fnv1a_hex(opts.dump());

  struct Acc {
    std::size_t docs = 0;
    std::vector<double> paras, sents, words, caps, punct, digits;
  };
  Acc per_label[2];
  std::map<std::string, std::size_t> per_source;
  for (std::size_t i = 0; i < corpus.raw.size(); ++i) {
    const auto& raw = corpus.raw[i];
    const auto& tok = corpus.tokens[i];
    Acc& a = per_label[raw.label == Label::satire ? 1 : 0];
    ++a.docs;
    ++per_source[raw.source];
    std::vector<const Sentence*> span;
    std::string text;
    for (const auto& p : tok.paragraphs) {
      for (const auto& s : p.sentences) span.push_back(&s);
      if (!text.empty()) text += "\n";
      text += p.raw;
    }
    auto st = structural_features(text, span);
    a.paras.push_back(static_cast<double>(tok.paragraphs.size()));
    a.words.push_back(st[0].value);
    a.punct.push_back(st[2].value);
    a.digits.push_back(st[3].value);
    a.caps.push_back(st[4].value);
    a.sents.push_back(st[5].value);
  }
  auto describe = [](const Acc& a) {
    auto ms = [](const std::vector<double>& xs) {
      return json{{"mean", xs.empty() ? 0.0 : mean_of(xs)},
                  {"std", sample_std(xs)}};
    };
    return json{{"documents", a.docs},      {"paragraphs", ms(a.paras)},
                {"sentences", ms(a.sents)}, {"words", ms(a.words)},
                {"capitals", ms(a.caps)},   {"punctuation", ms(a.punct)},
                {"digits", ms(a.digits)}};
  };
  json summary{{"true", describe(per_label[0])},
               {"satire", describe(per_label[1])},
               {"sources", per_source}};
  stamp(summary, common.seed, hash);
  ensure_dir(common.out);
  write_json(common.out + "/corpus_summary.json", summary);
  std::printf("ingest: %zu documents (%zu true, %zu satire) seed=%llu -> %s\n",
              corpus.raw.size(), per_label[0].docs, per_label[1].docs,
              static_cast<unsigned long long>(common.seed),
              (common.out + "/corpus_summary.json").c_str());
  return 0;
}

int cmd_split(const std::string& corpus_path, const std::string& split_path,
              const CommonArgs& common) {
  auto docs = load_corpus(corpus_path);
  auto spec = load_split_spec(split_path);
  auto split = split_by_source(docs, spec);
  ensure_dir(common.out);
  write_corpus(split.train, common.out + "/train.jsonl");
  write_corpus(split.validation, common.out + "/validation.jsonl");
  write_corpus(split.test, common.out + "/test.jsonl");
  json opts{
      {"command", "split"}, {"corpus", corpus_path}, {"split", split_path}};
  json summary{{"train", split.train.size()},
               {"validation", split.validation.size()},
               {"test", split.test.size()}};
  stamp(summary, common.seed, fnv1a_hex(opts.dump()));
  write_json(common.out + "/split_summary.json", summary);
  std::printf("split: train=%zu validation=%zu test=%zu seed=%llu -> %s\n",
              split.train.size(), split.validation.size(), split.test.size(),
              static_cast<unsigned long long>(common.seed), common.out.c_str());
  return 0;
}

int cmd_tag(const std::string& corpus_path, TagSource& tags, int heldout,
            const CommonArgs& common) {
  if (tags.tagger_corpus.empty()) throw UsageError("tag needs --tagger-corpus");
  auto tagged = load_tagged_corpus(tags.tagger_corpus);
  double heldout_acc = -1.0;
  if (heldout > 0 && static_cast<std::size_t>(heldout) < tagged.size()) {
    std::vector<TaggedSentence> train(tagged.begin(), tagged.end() - heldout);
    std::vector<TaggedSentence> held(tagged.end() - heldout, tagged.end());
    auto probe = TaggerModel::train(train, tags.epochs, common.seed);
    heldout_acc = probe.accuracy(held);
  }
  tags.seed = common.seed;
  tags.prepare();

  auto corpus = load_and_tokenize(corpus_path);
  ensure_dir(common.out + "/tags");
  for (const auto& doc : corpus.tokens) {
    auto dt = tags.tagger.tag_document(doc);
    std::string text;
    for (std::size_t p = 0; p < doc.paragraphs.size(); ++p)
      for (std::size_t s = 0; s < doc.paragraphs[p].sentences.size(); ++s) {
        const auto& sent = doc.paragraphs[p].sentences[s];
        for (std::size_t t = 0; t < sent.tokens.size(); ++t)
          text += sent.tokens[t].surface + "\t" + dt[p][s][t] + "\n";
        text += "\n";
      }
    write_text(common.out + "/tags/" + doc.id + ".tags", text);
  }
  json opts{{"command", "tag"},
            {"corpus", corpus_path},
            {"tagger_corpus", tags.tagger_corpus},
            {"epochs", tags.epochs}};
  json summary{{"documents", corpus.raw.size()},
               {"training_sentences", tagged.size()}};
  if (heldout_acc >= 0.0)
    summary["heldout_accuracy"] = std::round(heldout_acc * 100.0) / 100.0;
  stamp(summary, common.seed, fnv1a_hex(opts.dump()));
  write_json(common.out + "/tag_summary.json", summary);
  if (heldout_acc >= 0.0)
    std::printf(
        "tag: %zu documents, held-out accuracy %.2f, seed=%llu -> %s/tags\n",
        corpus.raw.size(), heldout_acc,
        static_cast<unsigned long long>(common.seed), common.out.c_str());
  else
    std::printf("tag: %zu documents, seed=%llu -> %s/tags\n",
                corpus.raw.size(),
                static_cast<unsigned long long>(common.seed),
                common.out.c_str());
  return 0;
}

int cmd_features(const std::string& corpus_path,
                 const std::string& lexicon_path, TagSource& tags,
                 const CommonArgs& common) {
  auto lexicon = load_lexicon(lexicon_path);
  tags.seed = common.seed;
  tags.prepare();
  auto corpus = load_and_tokenize(corpus_path);

  json opts{{"command", "features"},
            {"corpus", corpus_path},
            {"lexicon", lexicon_path}};
  std::string hash = fnv1a_hex(opts.dump());
  std::string csv = stamp_comment(common.seed, hash);
  bool header_done = false;
  for (const auto& doc : corpus.tokens) {
    auto df = extract_all(doc, tags.tags_for(doc), lexicon);
    if (!header_done) {
      csv += "doc_id,paragraph_index,level";
      for (const auto& v : df.document.values) csv += "," + v.name;
      csv += "\n";
      header_done = true;
    }
    auto row = [&csv, &doc](long pi, const char* level,
                            const FeatureVector& fv) {
      csv += doc.id + "," + std::to_string(pi) + "," + level;
      for (const auto& v : fv.values) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", v.value);
        csv += std::string(",") + buf;
      }
      csv += "\n";
    };
    for (std::size_t p = 0; p < df.paragraphs.size(); ++p)
      row(static_cast<long>(p), "paragraph", df.paragraphs[p]);
    row(-1, "document", df.document);
  }
  ensure_dir(common.out);
  write_text(common.out + "/features.csv", csv);
  std::printf("features: %zu documents, seed=%llu -> %s/features.csv\n",
              corpus.raw.size(), static_cast<unsigned long long>(common.seed),
              common.out.c_str());
  return 0;
}

struct TrainArgs {
  std::string corpus, split, embeddings, lexicon, resume;
  std::string variant = "4LHNPD";
  std::size_t min_count = 2;
  int epochs = 100;
  int patience = 5;
  double lr = 0.3;
  double lr_decay = 0.9;
  double dropout = 0.5;
  std::size_t hidden = 60, filters = 30, window = 3;
  std::size_t char_embed_dim = 30, word_embed_dim = 100;
  std::size_t max_paragraphs = 16, max_words = 128, max_chars = 24;
};

int cmd_train(TrainArgs& args, TagSource& tags, const CommonArgs& common) {
  Variant variant = parse_variant(args.variant);
  auto corpus = load_and_tokenize(args.corpus);
  auto spec = load_split_spec(args.split);
  auto split = split_by_source(corpus.raw, spec);
  if (split.train.empty()) throw DataError("empty training set");
  if (split.validation.empty()) throw DataError("empty validation set");

  auto tokenize_all = [](const std::vector<RawDocument>& docs) {
    std::vector<TokenizedDocument> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(tokenize(d));
    return out;
  };
  auto train_tok = tokenize_all(split.train);
  auto val_tok = tokenize_all(split.validation);
  auto test_tok = tokenize_all(split.test);

  InputPipeline pipe;
  HierNetModel model;
  bool resumed = !args.resume.empty();
  if (resumed) {
    auto ckpt = load_checkpoint(args.resume);
    if (ckpt.model.config.variant != variant)
      throw DataError("resume: checkpoint variant " +
                      std::string(variant_name(ckpt.model.config.variant)) +
                      " does not match --variant " + args.variant);
    pipe = pipeline_from_checkpoint(ckpt, tags.pretagged_dir);
    model = std::move(ckpt.model);
  } else {
    pipe.config.variant = variant;
    pipe.config.char_embed_dim = args.char_embed_dim;
    pipe.config.word_embed_dim = args.word_embed_dim;
    pipe.config.filters = args.filters;
    pipe.config.window = args.window;
    pipe.config.hidden = args.hidden;
    pipe.config.dims =
        ShapeDims{args.max_paragraphs, args.max_words, args.max_chars};
    pipe.config.dropout = args.dropout;
    pipe.config.seed = common.seed;
    pipe.vocab = build_vocabulary(train_tok, args.min_count);
    pipe.config.char_vocab = pipe.vocab.char_table_size();
    pipe.config.word_vocab = pipe.vocab.word_table_size();

    if (pipe.wants_features()) {
      if (args.lexicon.empty())
        throw UsageError(args.variant + " needs --lexicon");
      pipe.lexicon = load_lexicon(args.lexicon);
      tags.seed = common.seed;
      tags.prepare();
      pipe.tagger = tags.tagger;
      pipe.pretagged_dir = tags.pretagged_dir;

      // scalers are fit on the training partition only
      std::vector<FeatureVector> para_vecs, doc_vecs;
      for (const auto& doc : train_tok) {
        auto df = pipe.features_of(doc);
        for (auto& fv : df.paragraphs) para_vecs.push_back(std::move(fv));
        doc_vecs.push_back(std::move(df.document));
      }
      pipe.para_scaler = fit_scaler(para_vecs);
      pipe.doc_scaler = fit_scaler(doc_vecs);
      pipe.feature_names.clear();
      pipe.feature_families.clear();
      for (const auto& v : doc_vecs[0].values) {
        pipe.feature_names.push_back(v.name);
        pipe.feature_families.push_back(v.family);
      }
      pipe.config.paragraph_feature_dim =
          has_paragraph_features(variant) ? pipe.para_scaler.dim() : 0;
      pipe.config.document_feature_dim =
          has_document_features(variant) ? pipe.doc_scaler.dim() : 0;
    }

    if (!args.embeddings.empty()) {
      auto table = load_embeddings(args.embeddings, pipe.config.word_embed_dim);
      model = build_model(pipe.config, &pipe.vocab, &table);
    } else {
      model = build_model(pipe.config, &pipe.vocab, nullptr);
    }
  }

  auto train_inputs = pipe.make_inputs(train_tok);
  auto val_inputs = pipe.make_inputs(val_tok);

  TrainOptions opts;
  opts.max_epochs = args.epochs;
  opts.patience = args.patience;
  opts.initial_lr = args.lr;
  opts.lr_decay = args.lr_decay;
  opts.seed = common.seed;
  auto result = train(model, train_inputs, val_inputs, opts);

  auto val_metrics = evaluate(model, val_inputs);
  Metrics test_metrics;
  bool have_test = !test_tok.empty();
  if (have_test) test_metrics = evaluate(model, pipe.make_inputs(test_tok));

  std::string config_hash = hash_config(pipe.config);
  ensure_dir(common.out);

  Checkpoint ckpt;
  ckpt.seed = common.seed;
  ckpt.config_hash = config_hash;
  ckpt.model = std::move(model);
  ckpt.vocab = pipe.vocab;
  ckpt.feature_names = pipe.feature_names;
  ckpt.feature_families = pipe.feature_families;
  ckpt.paragraph_scaler = pipe.para_scaler;
  ckpt.document_scaler = pipe.doc_scaler;
  ckpt.lexicon = pipe.lexicon;
  ckpt.tagger = pipe.tagger;
  save_checkpoint(ckpt, common.out + "/checkpoint.bin");

  json metrics{{"variant", args.variant},
               {"split",
                {{"validation", metrics_json(val_metrics)},
                 {"test", have_test ? metrics_json(test_metrics) : json()}}},
               {"best_epoch", result.best_epoch},
               {"epochs_run", result.history.size()},
               {"early_stopped", result.early_stopped}};
  stamp(metrics, common.seed, config_hash);
  write_json(common.out + "/metrics.json", metrics);

  std::string history = stamp_comment(common.seed, config_hash);
  history += "epoch,lr,train_loss,val_f1\n";
  for (const auto& e : result.history) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%.6g,%.9g,%.9g\n", e.epoch, e.lr,
                  e.train_loss, e.val_f1);
    history += buf;
  }
  write_text(common.out + "/history.csv", history);

  std::printf("train: %s seed=%llu best_epoch=%d val_f1=%.2f -> %s\n",
              args.variant.c_str(),
              static_cast<unsigned long long>(common.seed), result.best_epoch,
              pct(val_metrics.f1), common.out.c_str());
  std::puts(table_row("validation", val_metrics).c_str());
  if (have_test) std::puts(table_row("test", test_metrics).c_str());
  return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& corpus_path,
                 const std::string& pretagged, const CommonArgs& common) {
  auto ckpt = load_checkpoint(ckpt_path);
  auto pipe = pipeline_from_checkpoint(ckpt, pretagged);
  auto corpus = load_and_tokenize(corpus_path);
  auto metrics = evaluate(ckpt.model, pipe.make_inputs(corpus.tokens));
  json j{{"variant", variant_name(pipe.config.variant)},
         {"corpus", corpus_path},
         {"metrics", metrics_json(metrics)}};
  stamp(j, ckpt.seed, ckpt.config_hash);
  ensure_dir(common.out);
  write_json(common.out + "/evaluate_metrics.json", j);
  std::printf("evaluate: %s on %zu documents seed=%llu\n",
              variant_name(pipe.config.variant), corpus.raw.size(),
              static_cast<unsigned long long>(ckpt.seed));
  std::puts(table_row(variant_name(pipe.config.variant), metrics).c_str());
  return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& corpus_path,
                const std::string& pretagged, const CommonArgs& common) {
  auto ckpt = load_checkpoint(ckpt_path);
  auto pipe = pipeline_from_checkpoint(ckpt, pretagged);
  auto corpus = load_and_tokenize(corpus_path);
  std::string csv = stamp_comment(ckpt.seed, ckpt.config_hash);
  csv += "doc_id,probability,predicted,label\n";
  for (std::size_t i = 0; i < corpus.tokens.size(); ++i) {
    double p =
        predict_probability(ckpt.model, pipe.make_input(corpus.tokens[i]));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", p);
    csv += corpus.raw[i].id + "," + buf + "," +
           (p > 0.5 ? "satire" : "true") + "," +
           label_name(corpus.raw[i].label) + "\n";
  }
  ensure_dir(common.out);
  write_text(common.out + "/predictions.csv", csv);
  std::printf("predict: %zu documents seed=%llu -> %s/predictions.csv\n",
              corpus.raw.size(), static_cast<unsigned long long>(ckpt.seed),
              common.out.c_str());
  return 0;
}

int cmd_attention(const std::string& ckpt_path, const std::string& corpus_path,
                  const std::vector<std::string>& doc_ids,
                  const std::string& pretagged, const CommonArgs& common) {
  auto ckpt = load_checkpoint(ckpt_path);
  auto pipe = pipeline_from_checkpoint(ckpt, pretagged);
  auto corpus = load_and_tokenize(corpus_path);
  ensure_dir(common.out);
  std::size_t written = 0;
  for (const auto& want : doc_ids) {
    bool found = false;
    for (std::size_t i = 0; i < corpus.raw.size(); ++i) {
      if (corpus.raw[i].id != want) continue;
      auto rec =
          attention_record(ckpt.model, pipe.make_input(corpus.tokens[i]));
      write_text(common.out + "/" + want + ".attention.html",
                 attention_report_html(rec, corpus.raw[i]));
      ++written;
      found = true;
      break;
    }
    if (!found) throw DataError("doc id '" + want + "' not in " + corpus_path);
  }
  std::printf("attention: %zu reports seed=%llu -> %s\n", written,
              static_cast<unsigned long long>(ckpt.seed), common.out.c_str());
  return 0;
}

int cmd_importance(const std::string& ckpt_path, const CommonArgs& common) {
  auto ckpt = load_checkpoint(ckpt_path);
  auto report =
      importance_report(ckpt.model, ckpt.feature_names, ckpt.feature_families);
  std::string csv = stamp_comment(ckpt.seed, ckpt.config_hash);
  csv += "name,family,level,importance\n";
  for (const auto& f : report.features) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", f.importance);
    csv += f.name + "," + family_name(f.family) + "," +
           (f.level == FeatureLevel::paragraph ? "paragraph" : "document") +
           "," + buf + "\n";
  }
  ensure_dir(common.out);
  write_text(common.out + "/importance.csv", csv);

  std::string fam = stamp_comment(ckpt.seed, ckpt.config_hash);
  fam += "family,level,mean_importance,scaled\n";
  for (const auto& f : report.families) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g,%.9g", f.mean_importance, f.scaled);
    fam += std::string(family_name(f.family)) + "," +
           (f.level == FeatureLevel::paragraph ? "paragraph" : "document") +
           "," + buf + "\n";
  }
  write_text(common.out + "/family_importance.csv", fam);
  std::printf("importance: %zu features seed=%llu -> %s\n",
              report.features.size(),
              static_cast<unsigned long long>(ckpt.seed), common.out.c_str());
  return 0;
}

int cmd_stats(const std::string& ckpt_path, const std::string& corpus_path,
              const std::string& pretagged, std::size_t top_k,
              const CommonArgs& common) {
  auto ckpt = load_checkpoint(ckpt_path);
  auto pipe = pipeline_from_checkpoint(ckpt, pretagged);
  if (pipe.feature_names.empty())
    throw DataError("checkpoint has no feature inventory; train a variant "
                    "with linguistic features");
  auto corpus = load_and_tokenize(corpus_path);

  std::vector<DocumentInput> inputs;
  std::vector<std::vector<std::vector<double>>> raw_para;
  std::vector<std::vector<double>> raw_doc;
  std::vector<Label> labels;
  for (const auto& doc : corpus.tokens) {
    auto df = pipe.features_of(doc);
    std::vector<std::vector<double>> paras;
    for (const auto& fv : df.paragraphs) paras.push_back(fv.raw());
    raw_para.push_back(std::move(paras));
    raw_doc.push_back(df.document.raw());
    inputs.push_back(pipe.make_input(doc));
    labels.push_back(doc.label);
  }

  auto para_samples =
      top_k_paragraph_samples(ckpt.model, inputs, raw_para, top_k);
  auto doc_samples = document_samples(labels, raw_doc);
  auto para_stats =
      feature_stats(para_samples, pipe.feature_names, pipe.feature_families,
                    "paragraph_top" + std::to_string(top_k));
  auto doc_stats = feature_stats(doc_samples, pipe.feature_names,
                                 pipe.feature_families, "document");

  std::string csv = stamp_comment(ckpt.seed, ckpt.config_hash);
  csv += "name,family,level,satire_mean,satire_std,true_mean,true_std,t,p\n";
  auto emit = [&csv](const std::vector<FeatureStat>& stats) {
    for (const auto& s : stats) {
      char buf[256];
      if (s.test_ok)
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.6g,%.6g",
                      s.satire_mean, s.satire_std, s.true_mean, s.true_std,
                      s.test.t, s.test.p);
      else
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,,", s.satire_mean,
                      s.satire_std, s.true_mean, s.true_std);
      csv += s.name + "," + family_name(s.family) + "," + s.level + "," + buf +
             "\n";
    }
  };
  emit(para_stats);
  emit(doc_stats);
  ensure_dir(common.out);
  write_text(common.out + "/feature_stats.csv", csv);
  std::printf(
      "stats: %zu features x 2 levels seed=%llu -> %s/feature_stats.csv\n",
      pipe.feature_names.size(), static_cast<unsigned long long>(ckpt.seed),
      common.out.c_str());
  return 0;
}

struct BaselineArgs {
  std::string corpus, split, lexicon;
  bool word_ngrams = true;
  bool char_ngrams = false;
  bool lf = false;
  std::size_t min_doc_freq = 2;
  std::string c_grid = "0.1,0.01,0.001,0.0001";
  int epochs = 100;
  std::size_t top_k = 10;
};

int cmd_baseline(BaselineArgs& args, TagSource& tags,
                 const CommonArgs& common) {
  auto docs = load_corpus(args.corpus);
  auto spec = load_split_spec(args.split);
  auto split = split_by_source(docs, spec);
  if (split.train.empty() || split.validation.empty())
    throw DataError("baseline needs non-empty train and validation partitions");

  auto tokenize_all = [](const std::vector<RawDocument>& ds) {
    std::vector<TokenizedDocument> out;
    for (const auto& d : ds) out.push_back(tokenize(d));
    return out;
  };
  auto train_tok = tokenize_all(split.train);
  auto val_tok = tokenize_all(split.validation);
  auto test_tok = tokenize_all(split.test);

  BaselineOptions opts;
  opts.word_ngrams = args.word_ngrams;
  opts.char_ngrams = args.char_ngrams;
  opts.linguistic = args.lf;
  opts.min_doc_freq = args.min_doc_freq;

  Lexicon lexicon;
  std::vector<FeatureVector> train_lf;
  std::unordered_map<std::string, FeatureVector> lf_by_id;
  if (args.lf) {
    if (args.lexicon.empty()) throw UsageError("--lf needs --lexicon");
    lexicon = load_lexicon(args.lexicon);
    tags.seed = common.seed;
    tags.prepare();
    auto lf_of = [&](const TokenizedDocument& d) {
      return extract_all(d, tags.tags_for(d), lexicon).document;
    };
    for (const auto& d : train_tok) {
      auto fv = lf_of(d);
      lf_by_id[d.id] = fv;
      train_lf.push_back(std::move(fv));
    }
    for (const auto& d : val_tok) lf_by_id[d.id] = lf_of(d);
    for (const auto& d : test_tok) lf_by_id[d.id] = lf_of(d);
  }

  auto featurizer = build_featurizer(train_tok, opts, train_lf);
  auto vecs = [&](const std::vector<TokenizedDocument>& ds) {
    std::vector<SparseVector> out;
    for (const auto& d : ds)
      out.push_back(
          featurize(d, featurizer, args.lf ? &lf_by_id.at(d.id) : nullptr));
    return out;
  };
  auto labels_of = [](const std::vector<RawDocument>& ds) {
    std::vector<Label> out;
    for (const auto& d : ds) out.push_back(d.label);
    return out;
  };
  auto train_xs = vecs(train_tok);
  auto val_xs = vecs(val_tok);
  auto train_labels = labels_of(split.train);
  auto val_labels = labels_of(split.validation);

  std::vector<double> grid;
  {
    std::stringstream ss(args.c_grid);
    std::string part;
    while (std::getline(ss, part, ',')) grid.push_back(std::stod(part));
  }
  auto model =
      select_C(train_xs, train_labels, val_xs, val_labels, grid, args.epochs);

  auto to_metrics = [](const BaselineMetrics& m) {
    Metrics mm;
    mm.accuracy = m.accuracy;
    mm.precision = m.precision;
    mm.recall = m.recall;
    mm.f1 = m.f1;
    return mm;
  };
  auto val_m = evaluate_linear(model, val_xs, val_labels);
  json opts_json{{"command", "baseline"},
                 {"corpus", args.corpus},
                 {"word_ngrams", args.word_ngrams},
                 {"char_ngrams", args.char_ngrams},
                 {"lf", args.lf},
                 {"C", model.C},
                 {"epochs", args.epochs}};
  std::string hash = fnv1a_hex(opts_json.dump());
  json metrics{{"C", model.C},
               {"features", featurizer.dim()},
               {"split", {{"validation", baseline_metrics_json(val_m)}}}};
  std::string name = std::string("word") + (args.char_ngrams ? "+char" : "") +
                     (args.lf ? "+lf" : "");
  std::printf("baseline(%s): C=%g features=%zu seed=%llu\n", name.c_str(),
              model.C, featurizer.dim(),
              static_cast<unsigned long long>(common.seed));
  std::puts(table_row("validation", to_metrics(val_m)).c_str());
  if (!test_tok.empty()) {
    auto test_m = evaluate_linear(model, vecs(test_tok), labels_of(split.test));
    metrics["split"]["test"] = baseline_metrics_json(test_m);
    std::puts(table_row("test", to_metrics(test_m)).c_str());
  }
  stamp(metrics, common.seed, hash);
  ensure_dir(common.out);
  write_json(common.out + "/baseline_metrics.json", metrics);
  write_text(common.out + "/baseline_model.json",
             export_model_json(model, featurizer) + "\n");

  auto top = top_weighted(model, featurizer, args.top_k);
  std::string csv = stamp_comment(common.seed, hash);
  csv += "class,rank,gram,weight\n";
  for (std::size_t i = 0; i < top.satire.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", top.satire[i].weight);
    csv += "satire," + std::to_string(i) + ",\"" + top.satire[i].gram + "\"," +
           buf + "\n";
  }
  for (std::size_t i = 0; i < top.truth.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", top.truth[i].weight);
    csv += "true," + std::to_string(i) + ",\"" + top.truth[i].gram + "\"," +
           buf + "\n";
  }
  write_text(common.out + "/top_features.csv", csv);
  return 0;
}

// ---------------------------------------------------------------------------
// config-file merging: JSON with flat keys mirroring the long flag names

std::vector<std::string> merge_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") config_path = args[i + 1];
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw UsageError("cannot open config file: " + config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed config file: ") + e.what());
  }
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    std::string flag = "--" + it.key();
    bool present = false;
    for (const auto& a : args)
      if (a == flag) present = true;
    if (present) continue;
    if (it.value().is_boolean()) {
      if (it.value().get<bool>()) args.push_back(flag);
    } else if (it.value().is_string()) {
      args.push_back(flag);
      args.push_back(it.value().get<std::string>());
    } else {
      args.push_back(flag);
      args.push_back(it.value().dump());
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"satirical-news detection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonArgs common;
  TagSource tags;
  std::string corpus, split_path, lexicon_path, checkpoint_path;
  std::vector<std::string> doc_ids;
  int heldout = 0;
  std::size_t top_k = 3;
  TrainArgs train_args;
  BaselineArgs baseline_args;

  auto* ingest =
      app.add_subcommand("ingest", "validate and summarize a corpus");
  ingest->add_option("--corpus", corpus, "JSON-Lines corpus")->required();
  register_common(ingest, common);

  auto* split_cmd =
      app.add_subcommand("split", "partition a corpus by source");
  split_cmd->add_option("--corpus", corpus)->required();
  split_cmd->add_option("--split", split_path, "source->partition JSON")
      ->required();
  register_common(split_cmd, common);

  auto* tag_cmd =
      app.add_subcommand("tag", "train the tagger and tag a corpus");
  tag_cmd->add_option("--corpus", corpus)->required();
  register_tag_source(tag_cmd, tags);
  tag_cmd->add_option("--heldout", heldout,
                      "sentences held out for an accuracy report");
  register_common(tag_cmd, common);

  auto* feat_cmd =
      app.add_subcommand("features", "export linguistic features");
  feat_cmd->add_option("--corpus", corpus)->required();
  feat_cmd->add_option("--lexicon", lexicon_path)->required();
  register_tag_source(feat_cmd, tags);
  register_common(feat_cmd, common);

  auto* train_cmd = app.add_subcommand("train", "train a detector end to end");
  train_cmd->add_option("--corpus", train_args.corpus)->required();
  train_cmd->add_option("--split", train_args.split)->required();
  train_cmd->add_option("--variant", train_args.variant,
                        "4LHN, 4LHNP, 4LHND, or 4LHNPD");
  train_cmd->add_option("--embeddings", train_args.embeddings,
                        "pretrained word embeddings (token + numbers per line)");
  train_cmd->add_option("--lexicon", train_args.lexicon);
  train_cmd->add_option("--resume", train_args.resume,
                        "checkpoint to continue training from");
  train_cmd->add_option("--min-count", train_args.min_count);
  train_cmd->add_option("--epochs", train_args.epochs);
  train_cmd->add_option("--patience", train_args.patience);
  train_cmd->add_option("--lr", train_args.lr);
  train_cmd->add_option("--lr-decay", train_args.lr_decay);
  train_cmd->add_option("--dropout", train_args.dropout);
  train_cmd->add_option("--hidden", train_args.hidden);
  train_cmd->add_option("--filters", train_args.filters);
  train_cmd->add_option("--window", train_args.window);
  train_cmd->add_option("--char-embed-dim", train_args.char_embed_dim);
  train_cmd->add_option("--word-embed-dim", train_args.word_embed_dim);
  train_cmd->add_option("--max-paragraphs", train_args.max_paragraphs);
  train_cmd->add_option("--max-words", train_args.max_words);
  train_cmd->add_option("--max-chars", train_args.max_chars);
  register_tag_source(train_cmd, tags);
  register_common(train_cmd, common);

  auto* eval_cmd =
      app.add_subcommand("evaluate", "score a corpus with a checkpoint");
  eval_cmd->add_option("--checkpoint", checkpoint_path)->required();
  eval_cmd->add_option("--corpus", corpus)->required();
  eval_cmd->add_option("--pretagged", tags.pretagged_dir);
  register_common(eval_cmd, common);

  auto* pred_cmd = app.add_subcommand("predict", "per-document probabilities");
  pred_cmd->add_option("--checkpoint", checkpoint_path)->required();
  pred_cmd->add_option("--corpus", corpus)->required();
  pred_cmd->add_option("--pretagged", tags.pretagged_dir);
  register_common(pred_cmd, common);

  auto* attn_cmd =
      app.add_subcommand("attention", "paragraph attention heatmaps");
  attn_cmd->add_option("--checkpoint", checkpoint_path)->required();
  attn_cmd->add_option("--corpus", corpus)->required();
  attn_cmd->add_option("--doc-id", doc_ids, "document id (repeatable)")
      ->required();
  attn_cmd->add_option("--pretagged", tags.pretagged_dir);
  register_common(attn_cmd, common);

  auto* imp_cmd =
      app.add_subcommand("importance", "feature importance tables");
  imp_cmd->add_option("--checkpoint", checkpoint_path)->required();
  register_common(imp_cmd, common);

  auto* stats_cmd = app.add_subcommand(
      "stats", "satire-vs-true feature statistics with t-tests");
  stats_cmd->add_option("--checkpoint", checkpoint_path)->required();
  stats_cmd->add_option("--corpus", corpus)->required();
  stats_cmd->add_option("--top-k", top_k, "attended paragraphs per document");
  stats_cmd->add_option("--pretagged", tags.pretagged_dir);
  register_common(stats_cmd, common);

  auto* base_cmd = app.add_subcommand("baseline", "linear n-gram baselines");
  base_cmd->add_option("--corpus", baseline_args.corpus)->required();
  base_cmd->add_option("--split", baseline_args.split)->required();
  base_cmd->add_flag("--word-ngrams,!--no-word-ngrams",
                     baseline_args.word_ngrams);
  base_cmd->add_flag("--char-ngrams", baseline_args.char_ngrams);
  base_cmd->add_flag("--lf", baseline_args.lf);
  base_cmd->add_option("--lexicon", baseline_args.lexicon);
  base_cmd->add_option("--min-doc-freq", baseline_args.min_doc_freq);
  base_cmd->add_option("--c-grid", baseline_args.c_grid);
  base_cmd->add_option("--epochs", baseline_args.epochs);
  base_cmd->add_option("--top-k", baseline_args.top_k);
  register_tag_source(base_cmd, tags);
  register_common(base_cmd, common);

  try {
    auto args = merge_config_args(argc, argv);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (*ingest) return cmd_ingest(corpus, common);
    if (*split_cmd) return cmd_split(corpus, split_path, common);
    if (*tag_cmd) return cmd_tag(corpus, tags, heldout, common);
    if (*feat_cmd) return cmd_features(corpus, lexicon_path, tags, common);
    if (*train_cmd) return cmd_train(train_args, tags, common);
    if (*eval_cmd)
      return cmd_evaluate(checkpoint_path, corpus, tags.pretagged_dir, common);
    if (*pred_cmd)
      return cmd_predict(checkpoint_path, corpus, tags.pretagged_dir, common);
    if (*attn_cmd)
      return cmd_attention(checkpoint_path, corpus, doc_ids,
                           tags.pretagged_dir, common);
    if (*imp_cmd) return cmd_importance(checkpoint_path, common);
    if (*stats_cmd)
      return cmd_stats(checkpoint_path, corpus, tags.pretagged_dir, top_k,
                       common);
    if (*base_cmd) return cmd_baseline(baseline_args, tags, common);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
