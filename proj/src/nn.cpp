#include "truecase/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "truecase/error.hpp"

namespace truecase::nn {

size_t element_count(const std::vector<std::uint32_t>& dims) {
  size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::uint32_t> d) : dims(std::move(d)), data(element_count(dims)) {}

size_t ParameterSet::add(std::string name, std::vector<std::uint32_t> dims) {
  names_.push_back(std::move(name));
  tensors_.emplace_back(std::move(dims));
  return tensors_.size() - 1;
}

std::optional<size_t> ParameterSet::find(const std::string& name) const {
  for (size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out = *this;
  out.set_zero();
  return out;
}

void ParameterSet::set_zero() {
  for (auto& t : tensors_) std::fill(t.data.begin(), t.data.end(), 0.0f);
}

double ParameterSet::squared_norm() const {
  double s = 0.0;
  for (const auto& t : tensors_) {
    for (float v : t.data) s += static_cast<double>(v) * v;
  }
  return s;
}

size_t ParameterSet::parameter_count() const {
  size_t n = 0;
  for (const auto& t : tensors_) n += t.data.size();
  return n;
}

bool ParameterSet::all_finite() const {
  for (const auto& t : tensors_) {
    for (float v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void ParameterSet::check_same_layout(const ParameterSet& other) const {
  if (other.size() != size()) throw DimensionMismatch("parameter sets differ in size");
  for (size_t i = 0; i < size(); ++i) {
    if (names_[i] != other.names_[i] || tensors_[i].dims != other.tensors_[i].dims) {
      throw DimensionMismatch("parameter layout differs at " + names_[i]);
    }
  }
}

void matvec_acc(const float* w, size_t rows, size_t cols, const float* x, float* y) {
  for (size_t r = 0; r < rows; ++r) {
    const float* wr = w + r * cols;
    float acc = 0.0f;
    for (size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] += acc;
  }
}

void matvec_backward(const float* w, float* dw, size_t rows, size_t cols, const float* x,
                     const float* dy, float* dx) {
  for (size_t r = 0; r < rows; ++r) {
    const float g = dy[r];
    if (g == 0.0f) continue;
    const float* wr = w + r * cols;
    float* dwr = dw + r * cols;
    for (size_t c = 0; c < cols; ++c) {
      dx[c] += g * wr[c];
      dwr[c] += g * x[c];
    }
  }
}

std::vector<float> log_softmax(std::span<const float> logits) {
  const float m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (float v : logits) sum += std::exp(static_cast<double>(v - m));
  const double log_sum = std::log(sum);
  std::vector<float> out(logits.size());
  for (size_t k = 0; k < logits.size(); ++k) {
    out[k] = static_cast<float>(static_cast<double>(logits[k] - m) - log_sum);
  }
  return out;
}

SoftmaxResult softmax_cross_entropy(std::span<const float> logits, size_t target) {
  if (target >= logits.size()) throw DimensionMismatch("target index out of range");
  const std::vector<float> lp = log_softmax(logits);
  const float m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (float v : logits) sum += std::exp(static_cast<double>(v - m));
  SoftmaxResult r;
  r.loss = -lp[target];
  r.probabilities.resize(lp.size());
  for (size_t k = 0; k < lp.size(); ++k) {
    r.probabilities[k] = static_cast<float>(std::exp(static_cast<double>(logits[k] - m)) / sum);
  }
  return r;
}

std::vector<float> dropout(std::span<float> x, float rate, bool training, Rng& rng) {
  if (rate < 0.0f || rate >= 1.0f) throw std::invalid_argument("dropout rate must be in [0, 1)");
  if (!training || rate == 0.0f) return {};
  const float keep_scale = 1.0f / (1.0f - rate);
  std::vector<float> mask(x.size());
  for (size_t k = 0; k < x.size(); ++k) {
    mask[k] = rng.uniform() < rate ? 0.0f : keep_scale;
    x[k] *= mask[k];
  }
  return mask;
}

// ---------------------------------------------------------------------------

RnnCell::RnnCell(ParameterSet& params, const std::string& prefix, RnnCellSpec spec)
    : spec_(spec) {
  if (spec.input_size == 0 || spec.hidden_size == 0) {
    throw std::invalid_argument("RNN sizes must be >= 1");
  }
  const auto in = static_cast<std::uint32_t>(spec.input_size);
  const auto hid = static_cast<std::uint32_t>(spec.hidden_size);
  const std::uint32_t gates = spec.kind == CellKind::kGru ? 3 * hid : 4 * hid;
  w_x_ = params.add(prefix + ".w_x", {gates, in});
  w_h_ = params.add(prefix + ".w_h", {gates, hid});
  b_x_ = params.add(prefix + ".b_x", {gates});
  if (spec.kind == CellKind::kGru) b_h_ = params.add(prefix + ".b_h", {gates});
}

CellState RnnCell::initial_state() const {
  CellState s;
  s.h.assign(spec_.hidden_size, 0.0f);
  if (spec_.kind == CellKind::kLstm) s.c.assign(spec_.hidden_size, 0.0f);
  return s;
}

void RnnCell::initialize(ParameterSet& params, Rng& rng, float scale) const {
  for (size_t idx : {w_x_, w_h_}) {
    for (float& v : params[idx].data) v = rng.uniform(-scale, scale);
  }
  std::fill(params[b_x_].data.begin(), params[b_x_].data.end(), 0.0f);
  if (spec_.kind == CellKind::kGru) {
    std::fill(params[b_h_].data.begin(), params[b_h_].data.end(), 0.0f);
  } else {
    const size_t hid = spec_.hidden_size;
    std::fill(params[b_x_].data.begin() + hid, params[b_x_].data.begin() + 2 * hid, 1.0f);
  }
}

void RnnCell::forward(const ParameterSet& params, std::span<const float> x, const CellState& prev,
                      CellState& next, CellTrace* trace) const {
  const size_t hid = spec_.hidden_size;
  if (x.size() != spec_.input_size || prev.h.size() != hid) {
    throw DimensionMismatch("cell input or state has the wrong size");
  }
  const Tensor& wx = params[w_x_];
  const Tensor& wh = params[w_h_];
  const Tensor& bx = params[b_x_];

  if (spec_.kind == CellKind::kGru) {
    const Tensor& bh = params[b_h_];
    std::vector<float> gx(bx.data);
    std::vector<float> gh(bh.data);
    matvec_acc(wx.data.data(), 3 * hid, spec_.input_size, x.data(), gx.data());
    matvec_acc(wh.data.data(), 3 * hid, hid, prev.h.data(), gh.data());
    std::vector<float> gates(3 * hid);
    next.h.resize(hid);
    for (size_t k = 0; k < hid; ++k) {
      const float r = sigmoid(gx[k] + gh[k]);
      const float z = sigmoid(gx[hid + k] + gh[hid + k]);
      const float n = std::tanh(gx[2 * hid + k] + r * gh[2 * hid + k]);
      gates[k] = r;
      gates[hid + k] = z;
      gates[2 * hid + k] = n;
      next.h[k] = (1.0f - z) * n + z * prev.h[k];
    }
    next.c.clear();
    if (trace) {
      trace->x.assign(x.begin(), x.end());
      trace->h_prev = prev.h;
      trace->c_prev.clear();
      trace->gates = std::move(gates);
      trace->aux.assign(gh.begin() + 2 * hid, gh.end());
    }
    return;
  }

  if (prev.c.size() != hid) throw DimensionMismatch("LSTM cell state has the wrong size");
  std::vector<float> pre(bx.data);
  matvec_acc(wx.data.data(), 4 * hid, spec_.input_size, x.data(), pre.data());
  matvec_acc(wh.data.data(), 4 * hid, hid, prev.h.data(), pre.data());
  std::vector<float> gates(4 * hid);
  std::vector<float> tanh_c(hid);
  next.h.resize(hid);
  next.c.resize(hid);
  for (size_t k = 0; k < hid; ++k) {
    const float i = sigmoid(pre[k]);
    const float f = sigmoid(pre[hid + k]);
    const float g = std::tanh(pre[2 * hid + k]);
    const float o = sigmoid(pre[3 * hid + k]);
    gates[k] = i;
    gates[hid + k] = f;
    gates[2 * hid + k] = g;
    gates[3 * hid + k] = o;
    next.c[k] = f * prev.c[k] + i * g;
    tanh_c[k] = std::tanh(next.c[k]);
    next.h[k] = o * tanh_c[k];
  }
  if (trace) {
    trace->x.assign(x.begin(), x.end());
    trace->h_prev = prev.h;
    trace->c_prev = prev.c;
    trace->gates = std::move(gates);
    trace->aux = std::move(tanh_c);
  }
}

void RnnCell::backward(const ParameterSet& params, const CellTrace& trace, const CellState& next,
                       std::span<const float> dh, std::span<const float> dc,
                       ParameterSet& grads, std::span<float> dx, std::vector<float>& dh_prev,
                       std::vector<float>& dc_prev) const {
  const size_t hid = spec_.hidden_size;
  const size_t in = spec_.input_size;
  const Tensor& wx = params[w_x_];
  const Tensor& wh = params[w_h_];
  dh_prev.assign(hid, 0.0f);

  if (spec_.kind == CellKind::kGru) {
    (void)next;
    std::vector<float> dgx(3 * hid);
    std::vector<float> dgh(3 * hid);
    for (size_t k = 0; k < hid; ++k) {
      const float r = trace.gates[k];
      const float z = trace.gates[hid + k];
      const float n = trace.gates[2 * hid + k];
      const float dn = dh[k] * (1.0f - z);
      const float dz = dh[k] * (trace.h_prev[k] - n);
      dh_prev[k] = dh[k] * z;
      const float dn_pre = dn * (1.0f - n * n);
      const float dr = dn_pre * trace.aux[k];
      const float dr_pre = dr * r * (1.0f - r);
      const float dz_pre = dz * z * (1.0f - z);
      dgx[k] = dr_pre;
      dgx[hid + k] = dz_pre;
      dgx[2 * hid + k] = dn_pre;
      dgh[k] = dr_pre;
      dgh[hid + k] = dz_pre;
      dgh[2 * hid + k] = dn_pre * r;
    }
    matvec_backward(wx.data.data(), grads[w_x_].data.data(), 3 * hid, in, trace.x.data(),
                    dgx.data(), dx.data());
    matvec_backward(wh.data.data(), grads[w_h_].data.data(), 3 * hid, hid, trace.h_prev.data(),
                    dgh.data(), dh_prev.data());
    for (size_t k = 0; k < 3 * hid; ++k) {
      grads[b_x_].data[k] += dgx[k];
      grads[b_h_].data[k] += dgh[k];
    }
    dc_prev.clear();
    return;
  }

  std::vector<float> dpre(4 * hid);
  dc_prev.assign(hid, 0.0f);
  for (size_t k = 0; k < hid; ++k) {
    const float i = trace.gates[k];
    const float f = trace.gates[hid + k];
    const float g = trace.gates[2 * hid + k];
    const float o = trace.gates[3 * hid + k];
    const float tc = trace.aux[k];
    const float d_o = dh[k] * tc;
    const float dct = (dc.empty() ? 0.0f : dc[k]) + dh[k] * o * (1.0f - tc * tc);
    const float di = dct * g;
    const float dg = dct * i;
    const float df = dct * trace.c_prev[k];
    dc_prev[k] = dct * f;
    dpre[k] = di * i * (1.0f - i);
    dpre[hid + k] = df * f * (1.0f - f);
    dpre[2 * hid + k] = dg * (1.0f - g * g);
    dpre[3 * hid + k] = d_o * o * (1.0f - o);
  }
  matvec_backward(wx.data.data(), grads[w_x_].data.data(), 4 * hid, in, trace.x.data(),
                  dpre.data(), dx.data());
  matvec_backward(wh.data.data(), grads[w_h_].data.data(), 4 * hid, hid, trace.h_prev.data(),
                  dpre.data(), dh_prev.data());
  for (size_t k = 0; k < 4 * hid; ++k) grads[b_x_].data[k] += dpre[k];
}

// ---------------------------------------------------------------------------

RnnStack::RnnStack(ParameterSet& params, const std::string& prefix, CellKind kind,
                   size_t input_size, size_t hidden_size, size_t layers) {
  if (layers == 0) throw std::invalid_argument("RNN stack needs at least one layer");
  for (size_t l = 0; l < layers; ++l) {
    RnnCellSpec spec{kind, l == 0 ? input_size : hidden_size, hidden_size};
    cells_.emplace_back(params, prefix + ".l" + std::to_string(l), spec);
  }
}

StackState RnnStack::initial_state() const {
  StackState s;
  for (const auto& c : cells_) s.layers.push_back(c.initial_state());
  return s;
}

StackGrad RnnStack::zero_grad() const {
  StackGrad g;
  for (const auto& c : cells_) {
    g.dh.emplace_back(c.spec().hidden_size, 0.0f);
    g.dc.emplace_back(c.spec().kind == CellKind::kLstm ? c.spec().hidden_size : 0, 0.0f);
  }
  return g;
}

void RnnStack::initialize(ParameterSet& params, Rng& rng, float scale) const {
  for (const auto& c : cells_) c.initialize(params, rng, scale);
}

void RnnStack::step(const ParameterSet& params, std::span<const float> x, StackState& state,
                    StackTrace* trace, const DropoutContext& drop) const {
  if (trace) {
    trace->layers.resize(cells_.size());
    trace->outputs.resize(cells_.size());
    trace->masks.assign(cells_.size(), {});
  }
  std::vector<float> input(x.begin(), x.end());
  for (size_t l = 0; l < cells_.size(); ++l) {
    if (drop.training && drop.rate > 0.0f) {
      auto mask = dropout(input, drop.rate, true, *drop.rng);
      if (trace) trace->masks[l] = std::move(mask);
    }
    CellState next;
    cells_[l].forward(params, input, state.layers[l], next, trace ? &trace->layers[l] : nullptr);
    input = next.h;
    state.layers[l] = std::move(next);
    if (trace) trace->outputs[l] = state.layers[l];
  }
}

void RnnStack::step_backward(const ParameterSet& params, const StackTrace& trace,
                             std::span<const float> d_top, StackGrad& carry, ParameterSet& grads,
                             std::span<float> dx) const {
  std::vector<float> d_out(d_top.begin(), d_top.end());
  std::vector<float> dh_prev;
  std::vector<float> dc_prev;
  for (size_t l = cells_.size(); l-- > 0;) {
    const auto& cell = cells_[l];
    for (size_t k = 0; k < d_out.size(); ++k) d_out[k] += carry.dh[l][k];
    std::vector<float> d_in(cell.spec().input_size, 0.0f);
    cell.backward(params, trace.layers[l], trace.outputs[l], d_out, carry.dc[l], grads, d_in,
                  dh_prev, dc_prev);
    carry.dh[l] = dh_prev;
    if (cell.spec().kind == CellKind::kLstm) carry.dc[l] = dc_prev;
    const auto& mask = trace.masks[l];
    if (!mask.empty()) {
      for (size_t k = 0; k < d_in.size(); ++k) d_in[k] *= mask[k];
    }
    d_out = std::move(d_in);
  }
  for (size_t k = 0; k < dx.size(); ++k) dx[k] += d_out[k];
}

// ---------------------------------------------------------------------------

Dense::Dense(ParameterSet& params, const std::string& prefix, size_t in, size_t out)
    : in_(in), out_(out) {
  w_ = params.add(prefix + ".w", {static_cast<std::uint32_t>(out), static_cast<std::uint32_t>(in)});
  b_ = params.add(prefix + ".b", {static_cast<std::uint32_t>(out)});
}

void Dense::initialize(ParameterSet& params, Rng& rng, float scale) const {
  for (float& v : params[w_].data) v = rng.uniform(-scale, scale);
  std::fill(params[b_].data.begin(), params[b_].data.end(), 0.0f);
}

std::vector<float> Dense::forward(const ParameterSet& params, std::span<const float> x) const {
  if (x.size() != in_) throw DimensionMismatch("dense input has the wrong size");
  std::vector<float> y(params[b_].data);
  matvec_acc(params[w_].data.data(), out_, in_, x.data(), y.data());
  return y;
}

void Dense::backward(const ParameterSet& params, std::span<const float> x,
                     std::span<const float> dy, ParameterSet& grads, std::span<float> dx) const {
  matvec_backward(params[w_].data.data(), grads[w_].data.data(), out_, in_, x.data(), dy.data(),
                  dx.data());
  for (size_t k = 0; k < out_; ++k) grads[b_].data[k] += dy[k];
}

SgdResult sgd_step(ParameterSet& params, const ParameterSet& grads, float lr, float clip) {
  params.check_same_layout(grads);
  SgdResult r;
  r.gradient_norm = std::sqrt(grads.squared_norm());
  float scale = 1.0f;
  if (clip > 0.0f && r.gradient_norm > clip) {
    scale = static_cast<float>(clip / r.gradient_norm);
    r.clipped = true;
  }
  const float step = lr * scale;
  if (step == 0.0f) return r;
  for (size_t t = 0; t < params.size(); ++t) {
    auto& p = params[t].data;
    const auto& g = grads[t].data;
    for (size_t k = 0; k < p.size(); ++k) p[k] -= step * g[k];
  }
  return r;
}

}  // namespace truecase::nn
