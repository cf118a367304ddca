#include "truecase/model.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "truecase/error.hpp"
#include "truecase/features.hpp"
#include "truecase/text.hpp"

namespace truecase {
namespace {

constexpr float kInitScale = 0.08f;

std::uint32_t u32(size_t v) { return static_cast<std::uint32_t>(v); }

const char* cell_name(nn::CellKind kind) { return kind == nn::CellKind::kGru ? "gru" : "lstm"; }

nn::CellKind parse_cell(const std::string& s) {
  if (s == "gru" || s == "GRU") return nn::CellKind::kGru;
  if (s == "lstm" || s == "LSTM") return nn::CellKind::kLstm;
  throw std::invalid_argument("unknown cell kind: " + s);
}

void add_into(std::vector<float>& dst, const float* src, size_t n) {
  for (size_t k = 0; k < n; ++k) dst[k] += src[k];
}

void add_into(std::span<float> dst, const std::vector<float>& src) {
  for (size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
}

std::span<float> table_row(nn::Tensor& table, std::uint32_t id) {
  return {table.row(id), table.cols()};
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelConfig

ModelConfig ModelConfig::teacher() {
  ModelConfig c;
  c.input_embedding_size = 512;
  c.output_embedding_size = 512;
  c.fwd_encoder_layers = 2;
  c.bwd_encoder_layers = 2;
  c.decoder_layers = 2;
  c.encoder_cells_per_layer = 512;
  c.decoder_cells_per_layer = 512;
  c.max_ngram_order = 3;
  c.ngram_buckets = 5000;
  c.beam_size = 2;
  return c;
}

ModelConfig ModelConfig::student() {
  ModelConfig c;
  c.input_embedding_size = 128;
  c.output_embedding_size = 128;
  c.fwd_encoder_layers = 1;
  c.bwd_encoder_layers = 1;
  c.decoder_layers = 1;
  c.encoder_cells_per_layer = 128;
  c.decoder_cells_per_layer = 128;
  c.max_ngram_order = 3;
  c.ngram_buckets = 5000;
  c.beam_size = 2;
  return c;
}

ModelConfig ModelConfig::preset(const std::string& name) {
  if (name == "teacher") return teacher();
  if (name == "student") return student();
  throw std::invalid_argument("unknown preset: " + name);
}

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid model config: ") + what);
  };
  require(input_embedding_size >= 1, "input_embedding_size");
  require(output_embedding_size >= 1, "output_embedding_size");
  require(fwd_encoder_layers >= 1, "fwd_encoder_layers");
  require(bwd_encoder_layers >= 1, "bwd_encoder_layers");
  require(decoder_layers >= 1, "decoder_layers");
  require(encoder_cells_per_layer >= 1, "encoder_cells_per_layer");
  require(decoder_cells_per_layer >= 1, "decoder_cells_per_layer");
  require(max_ngram_order >= 1, "max_ngram_order");
  require(ngram_buckets >= 1, "ngram_buckets");
  require(beam_size >= 1, "beam_size");
  require(dropout_rate >= 0.0f && dropout_rate < 1.0f, "dropout_rate");
  require(char_vocab_size == char_vocab.size() + 1, "char_vocab_size must equal vocabulary + 1");
  require(char_vocab_cap >= 1, "char_vocab_cap");
}

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["input_embedding_size"] = input_embedding_size;
  j["output_embedding_size"] = output_embedding_size;
  j["fwd_encoder_layers"] = fwd_encoder_layers;
  j["bwd_encoder_layers"] = bwd_encoder_layers;
  j["decoder_layers"] = decoder_layers;
  j["encoder_cells_per_layer"] = encoder_cells_per_layer;
  j["decoder_cells_per_layer"] = decoder_cells_per_layer;
  j["max_ngram_order"] = max_ngram_order;
  j["ngram_buckets"] = ngram_buckets;
  j["beam_size"] = beam_size;
  j["cell_kind"] = cell_name(cell_kind);
  j["dropout_rate"] = dropout_rate;
  j["char_vocab_size"] = char_vocab_size;
  j["char_vocab_cap"] = char_vocab_cap;
  auto vocab = nlohmann::ordered_json::array();
  for (char32_t c : char_vocab) vocab.push_back(static_cast<std::uint32_t>(c));
  j["char_vocab"] = vocab;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("config is not valid JSON: ") + e.what());
  }
  ModelConfig c;
  try {
    c.input_embedding_size = j.at("input_embedding_size").get<size_t>();
    c.output_embedding_size = j.at("output_embedding_size").get<size_t>();
    c.fwd_encoder_layers = j.at("fwd_encoder_layers").get<size_t>();
    c.bwd_encoder_layers = j.at("bwd_encoder_layers").get<size_t>();
    c.decoder_layers = j.at("decoder_layers").get<size_t>();
    c.encoder_cells_per_layer = j.at("encoder_cells_per_layer").get<size_t>();
    c.decoder_cells_per_layer = j.at("decoder_cells_per_layer").get<size_t>();
    c.max_ngram_order = j.at("max_ngram_order").get<int>();
    c.ngram_buckets = j.at("ngram_buckets").get<std::uint32_t>();
    c.beam_size = j.at("beam_size").get<size_t>();
    c.cell_kind = parse_cell(j.at("cell_kind").get<std::string>());
    c.dropout_rate = j.at("dropout_rate").get<float>();
    c.char_vocab_size = j.at("char_vocab_size").get<size_t>();
    c.char_vocab_cap = j.value("char_vocab_cap", size_t{512});
    for (const auto& v : j.at("char_vocab")) c.char_vocab.push_back(v.get<std::uint32_t>());
    c.validate();
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("bad model config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(e.what());
  }
  return c;
}

std::u32string build_char_vocab(const std::vector<Sentence>& corpus, size_t cap) {
  std::map<char32_t, size_t> counts;
  for (const auto& s : corpus) {
    for (const auto& t : s.tokens) {
      for (char32_t c : fold(decode_utf8(t))) ++counts[c];
    }
  }
  std::vector<std::pair<char32_t, size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const size_t keep = cap == 0 ? 0 : std::min(ranked.size(), cap - 1);
  std::u32string vocab;
  for (size_t k = 0; k < keep; ++k) vocab.push_back(ranked[k].first);
  return vocab;
}

// ---------------------------------------------------------------------------
// Model

struct Model::SentenceTrace {
  std::vector<std::vector<float>> embeddings;
  std::vector<nn::StackTrace> fwd;
  std::vector<nn::StackTrace> bwd;
};

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto& c = config_;
  const size_t ctx = 2 * c.encoder_cells_per_layer;
  ngram_table_ = params_.add("ngram_embedding", {c.ngram_buckets, u32(c.input_embedding_size)});
  fwd_encoder_ = nn::RnnStack(params_, "encoder.fwd", c.cell_kind, c.input_embedding_size,
                              c.encoder_cells_per_layer, c.fwd_encoder_layers);
  bwd_encoder_ = nn::RnnStack(params_, "encoder.bwd", c.cell_kind, c.input_embedding_size,
                              c.encoder_cells_per_layer, c.bwd_encoder_layers);
  label_embedding_ = params_.add("word_decoder.label_embedding", {3, u32(c.output_embedding_size)});
  word_decoder_ = nn::RnnStack(params_, "word_decoder", c.cell_kind,
                               ctx + c.output_embedding_size, c.decoder_cells_per_layer,
                               c.decoder_layers);
  word_output_ = nn::Dense(params_, "word_decoder.output", c.decoder_cells_per_layer, 2);
  char_embedding_ = params_.add("char_decoder.char_embedding",
                                {u32(c.char_vocab_size), u32(c.output_embedding_size)});
  case_embedding_ = params_.add("char_decoder.case_embedding", {3, u32(c.output_embedding_size)});
  char_decoder_ = nn::RnnStack(params_, "char_decoder", c.cell_kind,
                               ctx + 2 * c.output_embedding_size, c.decoder_cells_per_layer,
                               c.decoder_layers);
  char_output_ = nn::Dense(params_, "char_decoder.output", c.decoder_cells_per_layer, 2);
  for (size_t k = 0; k < c.char_vocab.size(); ++k) {
    char_rows_.emplace(c.char_vocab[k], static_cast<int>(k + 1));
  }
}

void Model::initialize(std::uint64_t seed) {
  nn::Rng rng(seed);
  for (size_t idx : {ngram_table_, label_embedding_, char_embedding_, case_embedding_}) {
    for (float& v : params_[idx].data) v = rng.uniform(-kInitScale, kInitScale);
  }
  fwd_encoder_.initialize(params_, rng, kInitScale);
  bwd_encoder_.initialize(params_, rng, kInitScale);
  word_decoder_.initialize(params_, rng, kInitScale);
  word_output_.initialize(params_, rng, kInitScale);
  char_decoder_.initialize(params_, rng, kInitScale);
  char_output_.initialize(params_, rng, kInitScale);
}

int Model::char_id(char32_t c) const {
  auto it = char_rows_.find(c);
  return it == char_rows_.end() ? 0 : it->second;
}

PreparedSentence Model::prepare(const Sentence& input) const {
  PreparedSentence p;
  for (const auto& token : input.tokens) {
    const std::u32string folded = fold(decode_utf8(token));
    const std::string bytes = encode_utf8(folded);
    p.feature_ids.push_back(feature_ids(bytes, config_.max_ngram_order, config_.ngram_buckets));
    std::vector<int> rows;
    rows.reserve(folded.size());
    for (char32_t c : folded) rows.push_back(char_id(c));
    p.chars.push_back(folded);
    p.char_ids.push_back(std::move(rows));
  }
  return p;
}

PreparedExample Model::prepare(const TrainingExample& example) const {
  return PreparedExample{prepare(example.input), example.word_labels, example.char_labels};
}

std::vector<float> Model::embed_word(const std::vector<std::uint32_t>& ids) const {
  const auto& table = params_[ngram_table_];
  return truecase::embed_word(ids, table.data, config_.ngram_buckets,
                              config_.input_embedding_size);
}

void Model::run_encoder(const PreparedSentence& input, const nn::DropoutContext& drop,
                        SentenceTrace* trace, ContextEncoding& ctx) const {
  const size_t n = input.feature_ids.size();
  if (n == 0) throw DimensionMismatch("cannot encode an empty sentence");
  const size_t hid = config_.encoder_cells_per_layer;
  std::vector<std::vector<float>> emb(n);
  for (size_t t = 0; t < n; ++t) emb[t] = embed_word(input.feature_ids[t]);
  ctx.vectors.assign(n, std::vector<float>(2 * hid, 0.0f));
  if (trace) {
    trace->fwd.resize(n);
    trace->bwd.resize(n);
  }
  auto state = fwd_encoder_.initial_state();
  for (size_t t = 0; t < n; ++t) {
    fwd_encoder_.step(params_, emb[t], state, trace ? &trace->fwd[t] : nullptr, drop);
    std::copy(state.top().begin(), state.top().end(), ctx.vectors[t].begin());
  }
  state = bwd_encoder_.initial_state();
  for (size_t k = 0; k < n; ++k) {
    const size_t t = n - 1 - k;
    bwd_encoder_.step(params_, emb[t], state, trace ? &trace->bwd[k] : nullptr, drop);
    std::copy(state.top().begin(), state.top().end(), ctx.vectors[t].begin() + hid);
  }
  if (trace) trace->embeddings = std::move(emb);
}

ContextEncoding Model::encode_context(const PreparedSentence& input) const {
  ContextEncoding ctx;
  run_encoder(input, {}, nullptr, ctx);
  return ctx;
}

ContextEncoding Model::encode_context(const Sentence& input) const {
  return encode_context(prepare(input));
}

std::vector<float> Model::word_input(const std::vector<float>& ctx_vector, int prev_label) const {
  const size_t e = config_.output_embedding_size;
  std::vector<float> in(ctx_vector);
  const float* row = params_[label_embedding_].row(static_cast<size_t>(prev_label));
  in.insert(in.end(), row, row + e);
  return in;
}

std::vector<float> Model::char_input(const std::vector<float>& ctx_vector, int char_row,
                                     int prev_case) const {
  const size_t e = config_.output_embedding_size;
  std::vector<float> in(ctx_vector);
  const float* c = params_[char_embedding_].row(static_cast<size_t>(char_row));
  const float* p = params_[case_embedding_].row(static_cast<size_t>(prev_case));
  in.insert(in.end(), c, c + e);
  in.insert(in.end(), p, p + e);
  return in;
}

LogProbs Model::word_step(const std::vector<float>& ctx_vector, int prev_label,
                          nn::StackState& state) const {
  word_decoder_.step(params_, word_input(ctx_vector, prev_label), state);
  const auto lp = nn::log_softmax(word_output_.forward(params_, state.top()));
  return {lp[0], lp[1]};
}

LogProbs Model::char_step(const std::vector<float>& ctx_vector, int char_row, int prev_case,
                          nn::StackState& state) const {
  char_decoder_.step(params_, char_input(ctx_vector, char_row, prev_case), state);
  const auto lp = nn::log_softmax(char_output_.forward(params_, state.top()));
  return {lp[0], lp[1]};
}

std::vector<LogProbs> Model::word_label_log_probs(const ContextEncoding& ctx,
                                                  const std::vector<WordLabel>& labels) const {
  if (labels.size() != ctx.size()) throw DimensionMismatch("one word label per token");
  std::vector<LogProbs> out;
  auto state = word_decoder_start();
  int prev = kStartLabel;
  for (size_t i = 0; i < ctx.size(); ++i) {
    out.push_back(word_step(ctx.vectors[i], prev, state));
    prev = static_cast<int>(labels[i]);
  }
  return out;
}

std::vector<LogProbs> Model::char_case_log_probs(const std::vector<float>& ctx_vector,
                                                 const std::u32string& folded_word,
                                                 const std::vector<CaseLabel>& cases) const {
  if (cases.size() != folded_word.size()) throw DimensionMismatch("one case per character");
  std::vector<LogProbs> out;
  auto state = char_decoder_start();
  int prev = kStartLabel;
  for (size_t j = 0; j < folded_word.size(); ++j) {
    out.push_back(char_step(ctx_vector, char_id(folded_word[j]), prev, state));
    prev = static_cast<int>(cases[j]);
  }
  return out;
}

double Model::sentence_log_likelihood(const PreparedExample& ex) const {
  const ContextEncoding ctx = encode_context(ex.input);
  double ll = 0.0;
  const auto word_lp = word_label_log_probs(ctx, ex.word_labels);
  for (size_t i = 0; i < word_lp.size(); ++i) {
    ll += word_lp[i][static_cast<int>(ex.word_labels[i])];
    if (ex.word_labels[i] != WordLabel::kOther) continue;
    const auto char_lp = char_case_log_probs(ctx.vectors[i], ex.input.chars[i], ex.char_labels[i]);
    for (size_t j = 0; j < char_lp.size(); ++j) {
      ll += char_lp[j][static_cast<int>(ex.char_labels[i][j])];
    }
  }
  return ll;
}

double Model::sentence_log_likelihood(const TrainingExample& example) const {
  return sentence_log_likelihood(prepare(example));
}

double Model::accumulate_gradients(const PreparedExample& example, nn::ParameterSet& grads,
                                   float weight, const nn::DropoutContext& drop) const {
  params_.check_same_layout(grads);
  return forward_backward(example, &grads, weight, drop);
}

namespace {

// One teacher-forced decoder run, kept for the backward pass.
struct DecoderRun {
  std::vector<std::vector<float>> inputs;
  std::vector<nn::StackTrace> traces;
  std::vector<std::vector<float>> tops;
  std::vector<std::vector<float>> probs;
  std::vector<int> targets;
  std::vector<int> prev;
};

}  // namespace

double Model::forward_backward(const PreparedExample& ex, nn::ParameterSet* grads, float weight,
                               const nn::DropoutContext& drop) const {
  const size_t n = ex.input.feature_ids.size();
  if (ex.word_labels.size() != n || ex.char_labels.size() != n) {
    throw DimensionMismatch("labels do not match the sentence length");
  }
  SentenceTrace trace;
  ContextEncoding ctx;
  run_encoder(ex.input, drop, grads ? &trace : nullptr, ctx);

  double loss = 0.0;
  auto run_decoder = [&](const nn::RnnStack& stack, const nn::Dense& output,
                         const std::vector<std::vector<float>>& inputs,
                         const std::vector<int>& targets, DecoderRun& run) {
    auto state = stack.initial_state();
    run.traces.resize(inputs.size());
    for (size_t t = 0; t < inputs.size(); ++t) {
      stack.step(params_, inputs[t], state, grads ? &run.traces[t] : nullptr, drop);
      const auto sm = nn::softmax_cross_entropy(output.forward(params_, state.top()),
                                                static_cast<size_t>(targets[t]));
      loss += sm.loss;
      run.tops.push_back(state.top());
      run.probs.push_back(sm.probabilities);
    }
  };

  DecoderRun word_run;
  {
    int prev = kStartLabel;
    for (size_t i = 0; i < n; ++i) {
      word_run.inputs.push_back(word_input(ctx.vectors[i], prev));
      word_run.prev.push_back(prev);
      word_run.targets.push_back(static_cast<int>(ex.word_labels[i]));
      prev = word_run.targets.back();
    }
    run_decoder(word_decoder_, word_output_, word_run.inputs, word_run.targets, word_run);
  }

  std::vector<std::pair<size_t, DecoderRun>> char_runs;
  for (size_t i = 0; i < n; ++i) {
    if (ex.word_labels[i] != WordLabel::kOther) continue;
    const auto& rows = ex.input.char_ids[i];
    const auto& cases = ex.char_labels[i];
    if (cases.size() != rows.size()) throw DimensionMismatch("char labels do not match word");
    DecoderRun run;
    int prev = kStartLabel;
    for (size_t j = 0; j < rows.size(); ++j) {
      run.inputs.push_back(char_input(ctx.vectors[i], rows[j], prev));
      run.prev.push_back(prev);
      run.targets.push_back(static_cast<int>(cases[j]));
      prev = run.targets.back();
    }
    run_decoder(char_decoder_, char_output_, run.inputs, run.targets, run);
    char_runs.emplace_back(i, std::move(run));
  }

  if (!grads) return loss;

  // Backward. dL/dlogits = p - onehot(target), scaled by weight.
  const size_t ctx_width = 2 * config_.encoder_cells_per_layer;
  const size_t e = config_.output_embedding_size;
  std::vector<std::vector<float>> d_ctx(n, std::vector<float>(ctx_width, 0.0f));

  auto backprop_decoder = [&](const nn::RnnStack& stack, const nn::Dense& output,
                              const DecoderRun& run, auto&& scatter_input) {
    auto carry = stack.zero_grad();
    for (size_t t = run.inputs.size(); t-- > 0;) {
      std::vector<float> d_logits(run.probs[t]);
      d_logits[static_cast<size_t>(run.targets[t])] -= 1.0f;
      for (float& v : d_logits) v *= weight;
      std::vector<float> d_top(stack.output_size(), 0.0f);
      output.backward(params_, run.tops[t], d_logits, *grads, d_top);
      std::vector<float> d_in(stack.input_size(), 0.0f);
      stack.step_backward(params_, run.traces[t], d_top, carry, *grads, d_in);
      scatter_input(t, d_in);
    }
  };

  backprop_decoder(word_decoder_, word_output_, word_run,
                   [&](size_t t, const std::vector<float>& d_in) {
                     add_into(d_ctx[t], d_in.data(), ctx_width);
                     float* row = (*grads)[label_embedding_].row(static_cast<size_t>(word_run.prev[t]));
                     for (size_t k = 0; k < e; ++k) row[k] += d_in[ctx_width + k];
                   });

  for (const auto& [i, run] : char_runs) {
    const auto& rows = ex.input.char_ids[i];
    backprop_decoder(char_decoder_, char_output_, run,
                     [&, i = i](size_t t, const std::vector<float>& d_in) {
                       add_into(d_ctx[i], d_in.data(), ctx_width);
                       float* crow = (*grads)[char_embedding_].row(static_cast<size_t>(rows[t]));
                       float* prow = (*grads)[case_embedding_].row(static_cast<size_t>(run.prev[t]));
                       for (size_t k = 0; k < e; ++k) {
                         crow[k] += d_in[ctx_width + k];
                         prow[k] += d_in[ctx_width + e + k];
                       }
                     });
  }

  const size_t hid = config_.encoder_cells_per_layer;
  const size_t emb_width = config_.input_embedding_size;
  std::vector<std::vector<float>> d_emb(n, std::vector<float>(emb_width, 0.0f));
  {
    auto carry = fwd_encoder_.zero_grad();
    for (size_t t = n; t-- > 0;) {
      std::span<const float> d_top(d_ctx[t].data(), hid);
      fwd_encoder_.step_backward(params_, trace.fwd[t], d_top, carry, *grads, d_emb[t]);
    }
  }
  {
    auto carry = bwd_encoder_.zero_grad();
    for (size_t k = n; k-- > 0;) {
      const size_t t = n - 1 - k;
      std::span<const float> d_top(d_ctx[t].data() + hid, hid);
      bwd_encoder_.step_backward(params_, trace.bwd[k], d_top, carry, *grads, d_emb[t]);
    }
  }
  auto& table = (*grads)[ngram_table_];
  for (size_t t = 0; t < n; ++t) {
    for (std::uint32_t id : ex.input.feature_ids[t]) add_into(table_row(table, id), d_emb[t]);
  }
  return loss;
}

}  // namespace truecase
