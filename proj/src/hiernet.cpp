#include "satire/hiernet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace satire {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::v4LHN: return "4LHN";
    case Variant::v4LHNP: return "4LHNP";
    case Variant::v4LHND: return "4LHND";
    case Variant::v4LHNPD: return "4LHNPD";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "4LHN") return Variant::v4LHN;
  if (name == "4LHNP") return Variant::v4LHNP;
  if (name == "4LHND") return Variant::v4LHND;
  if (name == "4LHNPD") return Variant::v4LHNPD;
  throw UsageError("unknown variant '" + name +
                   "' (expected 4LHN, 4LHNP, 4LHND, or 4LHNPD)");
}

bool has_paragraph_features(Variant v) {
  return v == Variant::v4LHNP || v == Variant::v4LHNPD;
}

bool has_document_features(Variant v) {
  return v == Variant::v4LHND || v == Variant::v4LHNPD;
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw DataError(std::string("model config: ") + what +
                                " must be positive");
  };
  positive(char_embed_dim, "char_embed_dim");
  positive(word_embed_dim, "word_embed_dim");
  positive(filters, "filters");
  positive(window, "window");
  positive(hidden, "hidden");
  positive(dims.paragraphs, "dims.paragraphs");
  positive(dims.words, "dims.words");
  positive(dims.chars, "dims.chars");
  if (dims.chars < window)
    throw DataError("model config: chars per word (" +
                    std::to_string(dims.chars) + ") below window (" +
                    std::to_string(window) + ")");
  if (dropout < 0.0 || dropout >= 1.0)
    throw DataError("model config: dropout must lie in [0,1)");
  if (char_vocab < 2 || word_vocab < 2)
    throw DataError("model config: vocabulary tables need padding + unknown");
  if (has_paragraph_features(variant) && paragraph_feature_dim == 0)
    throw DataError(std::string(variant_name(variant)) +
                    " needs paragraph_feature_dim");
  if (has_document_features(variant) && document_feature_dim == 0)
    throw DataError(std::string(variant_name(variant)) +
                    " needs document_feature_dim");
}

std::vector<Parameter*> GruCellParams::params() {
  return {&Wz, &Uz, &bz, &Wr, &Ur, &br, &Wh, &Uh, &bh};
}

std::vector<Parameter*> MlpParams::params() {
  return {&W1, &b1, &W2, &b2};
}

std::vector<Parameter*> HierNetModel::params() {
  std::vector<Parameter*> ps = {&char_embed, &word_embed, &conv_w, &conv_b};
  for (auto* cell : {&wgru_fwd, &wgru_bwd, &pgru_fwd, &pgru_bwd})
    for (Parameter* p : cell->params()) ps.push_back(p);
  for (Parameter* p : {&attn_W, &attn_b, &attn_v, &cls_W, &cls_b})
    ps.push_back(p);
  if (attn_U) ps.push_back(&*attn_U);
  if (pmlp)
    for (Parameter* p : pmlp->params()) ps.push_back(p);
  if (dmlp)
    for (Parameter* p : dmlp->params()) ps.push_back(p);
  if (cls_U) ps.push_back(&*cls_U);
  return ps;
}

std::vector<NDArray> HierNetModel::snapshot() const {
  std::vector<NDArray> snap;
  for (Parameter* p : const_cast<HierNetModel*>(this)->params())
    snap.push_back(p->value);
  return snap;
}

void HierNetModel::restore(const std::vector<NDArray>& snap) {
  auto ps = params();
  if (snap.size() != ps.size())
    throw DataError("restore: snapshot has " + std::to_string(snap.size()) +
                    " arrays, model has " + std::to_string(ps.size()));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!snap[i].same_shape(ps[i]->value))
      throw DataError("restore: shape mismatch for " + ps[i]->name);
    ps[i]->value = snap[i];
  }
}

EmbeddingTable load_embeddings(const std::string& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open embeddings file: " + path);
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> vec;
    vec.reserve(dim);
    double v;
    while (ss >> v) vec.push_back(v);
    if (vec.size() != dim)
      throw DataError(path + ": line " + std::to_string(line_no) + " has " +
                      std::to_string(vec.size()) + " values, expected " +
                      std::to_string(dim));
    table[token] = std::move(vec);
  }
  return table;
}

namespace {

NDArray glorot(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  std::size_t fan_out = shape.size() == 2 ? shape[0] : 1;
  std::size_t fan_in = shape.size() == 2 ? shape[1] : shape[0];
  double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  NDArray a = NDArray::zeros(std::move(shape));
  for (double& v : a.data) v = u(rng);
  return a;
}

NDArray uniform_embed(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  NDArray a = NDArray::zeros(std::move(shape));
  for (double& v : a.data) v = u(rng);
  return a;
}

GruCellParams make_gru(const std::string& prefix, std::size_t input,
                       std::size_t hidden, std::mt19937_64& rng) {
  GruCellParams c;
  c.Wz = Parameter(prefix + ".Wz", glorot({hidden, input}, rng));
  c.Uz = Parameter(prefix + ".Uz", glorot({hidden, hidden}, rng));
  c.bz = Parameter(prefix + ".bz", NDArray::zeros({hidden}));
  c.Wr = Parameter(prefix + ".Wr", glorot({hidden, input}, rng));
  c.Ur = Parameter(prefix + ".Ur", glorot({hidden, hidden}, rng));
  c.br = Parameter(prefix + ".br", NDArray::zeros({hidden}));
  c.Wh = Parameter(prefix + ".Wh", glorot({hidden, input}, rng));
  c.Uh = Parameter(prefix + ".Uh", glorot({hidden, hidden}, rng));
  c.bh = Parameter(prefix + ".bh", NDArray::zeros({hidden}));
  return c;
}

MlpParams make_mlp(const std::string& prefix, std::size_t input,
                   std::size_t hidden, std::mt19937_64& rng) {
  MlpParams m;
  m.W1 = Parameter(prefix + ".W1", glorot({hidden, input}, rng));
  m.b1 = Parameter(prefix + ".b1", NDArray::zeros({hidden}));
  m.W2 = Parameter(prefix + ".W2", glorot({hidden, hidden}, rng));
  m.b2 = Parameter(prefix + ".b2", NDArray::zeros({hidden}));
  return m;
}

Var mlp_forward(Tape& t, MlpParams& m, Var x) {
  Var h = t.tanh(t.add(t.matvec(t.param(m.W1), x), t.param(m.b1)));
  return t.add(t.matvec(t.param(m.W2), h), t.param(m.b2));
}

// (slot, effective word length) for every paragraph that still has content.
// Effective lengths come from the index arrays themselves: a slot stops at
// its first padding index, so all-padding suffixes are invisible to the
// network.
std::vector<std::pair<std::size_t, std::size_t>> effective_paragraphs(
    const ShapedDocument& doc) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t p = 0; p < doc.paragraph_count; ++p) {
    std::size_t limit = std::min(doc.word_counts[p], doc.dims.words);
    std::size_t len = 0;
    while (len < limit && doc.word_at(p, len) != Vocabulary::kPad) ++len;
    if (len > 0) out.emplace_back(p, len);
  }
  return out;
}

}  // namespace

HierNetModel build_model(const ModelConfig& config, const Vocabulary* vocab,
                         const EmbeddingTable* pretrained) {
  config.validate();
  HierNetModel m;
  m.config = config;
  std::mt19937_64 rng(config.seed);
  std::size_t h = config.hidden;

  m.char_embed = Parameter(
      "embed.char", uniform_embed({config.char_vocab, config.char_embed_dim}, rng));
  m.word_embed = Parameter(
      "embed.word", uniform_embed({config.word_vocab, config.word_embed_dim}, rng));
  m.conv_w = Parameter(
      "conv.w", glorot({config.window * config.char_embed_dim, config.filters}, rng));
  m.conv_b = Parameter("conv.b", NDArray::zeros({config.filters}));
  m.wgru_fwd = make_gru("wgru.fwd", config.word_rep_dim(), h, rng);
  m.wgru_bwd = make_gru("wgru.bwd", config.word_rep_dim(), h, rng);
  m.pgru_fwd = make_gru("pgru.fwd", config.paragraph_rep_dim(), h, rng);
  m.pgru_bwd = make_gru("pgru.bwd", config.paragraph_rep_dim(), h, rng);
  m.attn_W = Parameter("attn.W", glorot({h, config.paragraph_rep_dim()}, rng));
  m.attn_b = Parameter("attn.b", NDArray::zeros({h}));
  m.attn_v = Parameter("attn.v", glorot({h}, rng));
  m.cls_W = Parameter("cls.W", glorot({1, config.paragraph_rep_dim()}, rng));
  m.cls_b = Parameter("cls.b", NDArray::zeros({1}));
  if (has_paragraph_features(config.variant)) {
    m.attn_U = Parameter("attn.U", glorot({h, h}, rng));
    m.pmlp = make_mlp("pmlp", config.paragraph_feature_dim, h, rng);
  }
  if (has_document_features(config.variant)) {
    m.dmlp = make_mlp("dmlp", config.document_feature_dim, h, rng);
    m.cls_U = Parameter("cls.U", glorot({1, h}, rng));
  }

  if (vocab && pretrained) {
    for (std::size_t i = 0; i < vocab->words.size(); ++i) {
      auto it = pretrained->find(vocab->words[i]);
      if (it == pretrained->end()) continue;
      std::size_t r = i + 2;
      for (std::size_t j = 0; j < config.word_embed_dim; ++j)
        m.word_embed.value.at(r, j) = it->second[j];
    }
  }
  return m;
}

Var gru_step(Tape& t, GruCellParams& c, Var x_t, Var h_prev) {
  Var z = t.sigmoid(t.add(t.add(t.matvec(t.param(c.Wz), x_t),
                                t.matvec(t.param(c.Uz), h_prev)),
                          t.param(c.bz)));
  Var r = t.sigmoid(t.add(t.add(t.matvec(t.param(c.Wr), x_t),
                                t.matvec(t.param(c.Ur), h_prev)),
                          t.param(c.br)));
  Var cand = t.tanh(t.add(
      t.matvec(t.param(c.Wh), x_t),
      t.mul(r, t.add(t.matvec(t.param(c.Uh), h_prev), t.param(c.bh)))));
  return t.add(t.mul(t.affine(-1.0, z, 1.0), h_prev), t.mul(z, cand));
}

namespace {

Var encode_word_chars(Tape& t, HierNetModel& m, const int* chars) {
  std::vector<int> idx(chars, chars + m.config.dims.chars);
  Var emb = t.embedding_lookup(t.param(m.char_embed), idx);
  Var windows = t.unfold(emb, m.config.window);
  Var conv = t.tanh(t.add(t.matmul(windows, t.param(m.conv_w)),
                          t.param(m.conv_b)));
  return t.max_over_time(conv);
}

Var encode_paragraph(Tape& t, HierNetModel& m, const ShapedDocument& doc,
                     std::size_t slot, std::size_t len) {
  std::vector<Var> xs;
  xs.reserve(len);
  for (std::size_t w = 0; w < len; ++w) {
    Var xc = encode_word_chars(t, m, doc.chars_at(slot, w));
    Var xe = t.row(t.embedding_lookup(t.param(m.word_embed),
                                      {doc.word_at(slot, w)}),
                   0);
    xs.push_back(t.concat({xc, xe}));
  }
  Var h_fwd = t.leaf(NDArray::zeros({m.config.hidden}));
  for (std::size_t w = 0; w < len; ++w)
    h_fwd = gru_step(t, m.wgru_fwd, xs[w], h_fwd);
  Var h_bwd = t.leaf(NDArray::zeros({m.config.hidden}));
  for (std::size_t w = len; w-- > 0;)
    h_bwd = gru_step(t, m.wgru_bwd, xs[w], h_bwd);
  return t.concat({h_fwd, h_bwd});
}

}  // namespace

AttendResult attend(Tape& t, HierNetModel& m, const std::vector<Var>& states,
                    const std::vector<std::vector<double>>* paragraph_features) {
  bool pf = has_paragraph_features(m.config.variant);
  if (pf && (!paragraph_features || paragraph_features->size() != states.size()))
    throw DataError(std::string(variant_name(m.config.variant)) +
                    ": attention needs one feature vector per paragraph");
  if (!pf && paragraph_features)
    throw DataError(std::string(variant_name(m.config.variant)) +
                    " does not take paragraph features");
  if (states.empty()) throw DataError("attend: no paragraph states");

  std::vector<Var> scores(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    Var pre = t.matvec(t.param(m.attn_W), states[i]);
    if (pf) {
      Var lp = mlp_forward(
          t, *m.pmlp, t.leaf(NDArray::vector((*paragraph_features)[i])));
      pre = t.add(pre, t.matvec(t.param(*m.attn_U), lp));
    }
    Var u = t.tanh(t.add(pre, t.param(m.attn_b)));
    scores[i] = t.dot(u, t.param(m.attn_v));
  }
  AttendResult out;
  out.alpha = t.softmax(t.concat(scores));
  out.document = t.smul(t.index(out.alpha, 0), states[0]);
  for (std::size_t i = 1; i < states.size(); ++i)
    out.document =
        t.add(out.document, t.smul(t.index(out.alpha, i), states[i]));
  return out;
}

Var classify(Tape& t, HierNetModel& m, Var document,
             const std::vector<double>* document_features, bool training) {
  bool df = has_document_features(m.config.variant);
  if (df && (!document_features ||
             document_features->size() != m.config.document_feature_dim))
    throw DataError(std::string(variant_name(m.config.variant)) +
                    ": classifier needs the document feature vector");
  if (!df && document_features)
    throw DataError(std::string(variant_name(m.config.variant)) +
                    " does not take document features");
  Var dd = t.dropout(document, m.config.dropout, training);
  Var logit = t.matvec(t.param(m.cls_W), dd);
  if (df) {
    Var ld =
        mlp_forward(t, *m.dmlp, t.leaf(NDArray::vector(*document_features)));
    Var ldd = t.dropout(ld, m.config.dropout, training);
    logit = t.add(logit, t.matvec(t.param(*m.cls_U), ldd));
  }
  logit = t.add(logit, t.param(m.cls_b));
  return t.sigmoid(logit);
}

ForwardResult forward(Tape& t, HierNetModel& m, const DocumentInput& doc,
                      bool training) {
  const ModelConfig& cfg = m.config;
  auto paras = effective_paragraphs(doc.shaped);
  if (paras.empty())
    throw DataError("document '" + doc.shaped.id + "' has no content");
  bool pf = has_paragraph_features(cfg.variant);
  bool df = has_document_features(cfg.variant);
  if (pf && doc.paragraph_features.size() < doc.shaped.paragraph_count)
    throw DataError(std::string(variant_name(cfg.variant)) +
                    ": document '" + doc.shaped.id +
                    "' is missing paragraph features");
  if (!pf && !doc.paragraph_features.empty())
    throw DataError(std::string(variant_name(cfg.variant)) +
                    " does not take paragraph features");
  if (df && doc.document_features.size() != cfg.document_feature_dim)
    throw DataError(std::string(variant_name(cfg.variant)) + ": document '" +
                    doc.shaped.id + "' is missing document features");
  if (!df && !doc.document_features.empty())
    throw DataError(std::string(variant_name(cfg.variant)) +
                    " does not take document features");

  std::size_t k = paras.size();
  std::vector<Var> reps;
  reps.reserve(k);
  for (auto [slot, len] : paras)
    reps.push_back(encode_paragraph(t, m, doc.shaped, slot, len));

  // paragraph-level Bi-GRU: per-position states feed the attention
  std::vector<Var> fwd(k), bwd(k);
  Var hf = t.leaf(NDArray::zeros({cfg.hidden}));
  for (std::size_t i = 0; i < k; ++i)
    fwd[i] = hf = gru_step(t, m.pgru_fwd, reps[i], hf);
  Var hb = t.leaf(NDArray::zeros({cfg.hidden}));
  for (std::size_t i = k; i-- > 0;)
    bwd[i] = hb = gru_step(t, m.pgru_bwd, reps[i], hb);

  std::vector<Var> p(k);
  std::vector<std::vector<double>> feats(k);
  for (std::size_t i = 0; i < k; ++i) {
    p[i] = t.dropout(t.concat({fwd[i], bwd[i]}), cfg.dropout, training);
    if (pf) {
      std::size_t slot = paras[i].first;
      if (slot >= doc.paragraph_features.size() ||
          doc.paragraph_features[slot].size() != cfg.paragraph_feature_dim)
        throw DataError("document '" + doc.shaped.id +
                        "': bad paragraph feature vector at slot " +
                        std::to_string(slot));
      feats[i] = doc.paragraph_features[slot];
    }
  }
  AttendResult att = attend(t, m, p, pf ? &feats : nullptr);
  Var prediction = classify(t, m, att.document,
                            df ? &doc.document_features : nullptr, training);

  ForwardResult out;
  out.prediction = prediction;
  out.alpha = t.value(att.alpha).data;
  out.slots.reserve(k);
  for (auto [slot, len] : paras) out.slots.push_back(slot);
  return out;
}

Metrics metrics_from_predictions(const std::vector<double>& probs,
                                 const std::vector<Label>& labels) {
  if (probs.empty() || probs.size() != labels.size())
    throw DataError("metrics: empty or mismatched predictions");
  Metrics m;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    bool pred_satire = probs[i] > 0.5;
    bool is_satire = labels[i] == Label::satire;
    if (pred_satire && is_satire) ++m.tp;
    else if (pred_satire && !is_satire) ++m.fp;
    else if (!pred_satire && is_satire) ++m.fn;
    else ++m.tn;
  }
  double n = static_cast<double>(probs.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / n;
  m.precision = (m.tp + m.fp) > 0
                    ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp)
                    : 0.0;
  m.recall = (m.tp + m.fn) > 0
                 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn)
                 : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

double predict_probability(HierNetModel& model, const DocumentInput& doc) {
  Tape t;
  auto fr = forward(t, model, doc, /*training=*/false);
  return t.scalar_value(fr.prediction);
}

Metrics evaluate(HierNetModel& model, const std::vector<DocumentInput>& docs) {
  if (docs.empty()) throw DataError("evaluate: empty document list");
  std::vector<double> probs;
  std::vector<Label> labels;
  probs.reserve(docs.size());
  for (const auto& d : docs) {
    probs.push_back(predict_probability(model, d));
    labels.push_back(d.shaped.label);
  }
  return metrics_from_predictions(probs, labels);
}

bool EarlyStopper::feed(double f1) {
  ++epoch_;
  if (f1 > best_) {
    best_ = f1;
    best_epoch_ = epoch_;
  }
  if (epoch_ > 0 && f1 < prev_) ++drops_;
  else drops_ = 0;
  prev_ = f1;
  return drops_ >= patience_;
}

TrainResult train(HierNetModel& model,
                  const std::vector<DocumentInput>& train_docs,
                  const std::vector<DocumentInput>& validation_docs,
                  const TrainOptions& opts) {
  if (train_docs.empty()) throw DataError("empty training set");
  if (validation_docs.empty()) throw DataError("empty validation set");
  auto params = model.params();
  std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  EarlyStopper stopper(opts.patience);
  std::vector<NDArray> best_snapshot = model.snapshot();
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    double lr = lr_schedule(epoch, opts.initial_lr, opts.lr_decay);
    std::shuffle(order.begin(), order.end(), rng);
    double total_loss = 0.0;
    for (std::size_t i : order) {
      Tape tape(rng());
      auto fr = forward(tape, model, train_docs[i], /*training=*/true);
      Var loss = tape.binary_cross_entropy(fr.prediction,
                                           {train_docs[i].label01()});
      total_loss += tape.scalar_value(loss);
      tape.backward(loss);
      sgd_step(params, lr);
    }
    double val_f1 = evaluate(model, validation_docs).f1;
    result.history.push_back({epoch, lr,
                              total_loss / static_cast<double>(train_docs.size()),
                              val_f1});
    bool improved = val_f1 > stopper.best_value();
    bool stop = stopper.feed(val_f1);
    if (improved) best_snapshot = model.snapshot();
    if (stop) {
      result.early_stopped = true;
      break;
    }
  }
  result.best_epoch = stopper.best_epoch();
  result.best_f1 = stopper.best_value();
  model.restore(best_snapshot);
  return result;
}

AttentionRecord attention_record(HierNetModel& model,
                                 const DocumentInput& doc) {
  Tape t;
  auto fr = forward(t, model, doc, /*training=*/false);
  AttentionRecord rec;
  rec.doc_id = doc.shaped.id;
  rec.alpha = fr.alpha;
  rec.slots = fr.slots;
  double mx = 0.0;
  for (double a : rec.alpha) mx = std::max(mx, a);
  rec.scaled.reserve(rec.alpha.size());
  for (double a : rec.alpha) rec.scaled.push_back(mx > 0.0 ? a / mx : 0.0);
  return rec;
}

}  // namespace satire
