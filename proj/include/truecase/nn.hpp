#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace truecase::nn {

// Dense row-major float tensor.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::uint32_t> d);

  size_t rows() const { return dims.empty() ? 0 : dims[0]; }
  size_t cols() const { return dims.size() < 2 ? 1 : dims[1]; }
  float* row(size_t r) { return data.data() + r * cols(); }
  const float* row(size_t r) const { return data.data() + r * cols(); }
  bool operator==(const Tensor&) const = default;
};

size_t element_count(const std::vector<std::uint32_t>& dims);

// Ordered collection of named tensors. Layers keep indices into it so that a
// gradient accumulator can share the exact same layout.
class ParameterSet {
 public:
  size_t add(std::string name, std::vector<std::uint32_t> dims);

  size_t size() const { return tensors_.size(); }
  Tensor& operator[](size_t i) { return tensors_[i]; }
  const Tensor& operator[](size_t i) const { return tensors_[i]; }
  const std::string& name(size_t i) const { return names_[i]; }
  std::optional<size_t> find(const std::string& name) const;

  ParameterSet zeros_like() const;
  void set_zero();
  double squared_norm() const;
  size_t parameter_count() const;
  bool all_finite() const;
  // Throws DimensionMismatch unless names and shapes agree.
  void check_same_layout(const ParameterSet& other) const;

  bool operator==(const ParameterSet&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

// Deterministic across standard libraries: only the raw mt19937_64 stream is
// used, never the <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  float uniform(float lo, float hi) { return lo + static_cast<float>(uniform()) * (hi - lo); }
  size_t below(size_t n) { return static_cast<size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

// y += W x for row-major W [rows x cols].
void matvec_acc(const float* w, size_t rows, size_t cols, const float* x, float* y);
// dx += W^T dy and dW += dy x^T.
void matvec_backward(const float* w, float* dw, size_t rows, size_t cols, const float* x,
                     const float* dy, float* dx);

inline float sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

struct SoftmaxResult {
  float loss;
  std::vector<float> probabilities;
};

// Max-shifted softmax; loss = -log p[target].
SoftmaxResult softmax_cross_entropy(std::span<const float> logits, size_t target);
std::vector<float> log_softmax(std::span<const float> logits);

// Inverted dropout. Returns the per-element scale (0 or 1/(1-rate)); empty when
// the call is an identity (inference, or rate 0).
std::vector<float> dropout(std::span<float> x, float rate, bool training, Rng& rng);

enum class CellKind { kGru, kLstm };

struct RnnCellSpec {
  CellKind kind = CellKind::kGru;
  size_t input_size = 1;
  size_t hidden_size = 1;
};

struct CellState {
  std::vector<float> h;
  std::vector<float> c;  // LSTM only
};

// Everything a cell step needs for its backward pass.
struct CellTrace {
  std::vector<float> x;
  std::vector<float> h_prev;
  std::vector<float> c_prev;
  std::vector<float> gates;   // post-activation, [r z n] or [i f g o]
  std::vector<float> aux;     // GRU: W_hn h + b_hn; LSTM: tanh(c)
};

// One recurrent layer. GRU: r, z, n gates with separate input/hidden biases.
// LSTM: i, f, g, o gates with a single bias.
class RnnCell {
 public:
  RnnCell() = default;
  RnnCell(ParameterSet& params, const std::string& prefix, RnnCellSpec spec);

  const RnnCellSpec& spec() const { return spec_; }
  CellState initial_state() const;

  void initialize(ParameterSet& params, Rng& rng, float scale) const;

  void forward(const ParameterSet& params, std::span<const float> x, const CellState& prev,
               CellState& next, CellTrace* trace) const;

  // dh (and dc for LSTM) are gradients w.r.t. the step outputs; on return
  // dh_prev/dc_prev hold gradients w.r.t. the previous state and dx is
  // accumulated into.
  void backward(const ParameterSet& params, const CellTrace& trace, const CellState& next,
                std::span<const float> dh, std::span<const float> dc, ParameterSet& grads,
                std::span<float> dx, std::vector<float>& dh_prev,
                std::vector<float>& dc_prev) const;

 private:
  RnnCellSpec spec_;
  size_t w_x_ = 0, w_h_ = 0, b_x_ = 0, b_h_ = 0;
};

struct StackState {
  std::vector<CellState> layers;
  const std::vector<float>& top() const { return layers.back().h; }
};

struct StackTrace {
  std::vector<CellTrace> layers;
  std::vector<CellState> outputs;
  std::vector<std::vector<float>> masks;  // input dropout scale per layer
};

// Carries gradients w.r.t. the recurrent state between backward steps.
struct StackGrad {
  std::vector<std::vector<float>> dh;
  std::vector<std::vector<float>> dc;
};

struct DropoutContext {
  float rate = 0.0f;
  bool training = false;
  Rng* rng = nullptr;
};

// Stacked cells; the external input enters only the bottom layer.
class RnnStack {
 public:
  RnnStack() = default;
  RnnStack(ParameterSet& params, const std::string& prefix, CellKind kind, size_t input_size,
           size_t hidden_size, size_t layers);

  size_t input_size() const { return cells_.front().spec().input_size; }
  size_t output_size() const { return cells_.back().spec().hidden_size; }
  size_t depth() const { return cells_.size(); }

  StackState initial_state() const;
  StackGrad zero_grad() const;
  void initialize(ParameterSet& params, Rng& rng, float scale) const;

  void step(const ParameterSet& params, std::span<const float> x, StackState& state,
            StackTrace* trace = nullptr, const DropoutContext& drop = {}) const;

  // Backward through one step. d_top is the gradient w.r.t. the top output at
  // this step; carry holds (and receives) the recurrent gradients; dx is
  // accumulated into.
  void step_backward(const ParameterSet& params, const StackTrace& trace,
                     std::span<const float> d_top, StackGrad& carry, ParameterSet& grads,
                     std::span<float> dx) const;

 private:
  std::vector<RnnCell> cells_;
};

// y = W x + b.
class Dense {
 public:
  Dense() = default;
  Dense(ParameterSet& params, const std::string& prefix, size_t in, size_t out);

  size_t in() const { return in_; }
  size_t out() const { return out_; }
  void initialize(ParameterSet& params, Rng& rng, float scale) const;
  std::vector<float> forward(const ParameterSet& params, std::span<const float> x) const;
  void backward(const ParameterSet& params, std::span<const float> x, std::span<const float> dy,
                ParameterSet& grads, std::span<float> dx) const;

 private:
  size_t in_ = 0, out_ = 0, w_ = 0, b_ = 0;
};

struct SgdResult {
  double gradient_norm = 0.0;
  bool clipped = false;
};

// p -= lr * g, after rescaling g to global norm `clip` when clip > 0 and the
// norm exceeds it.
SgdResult sgd_step(ParameterSet& params, const ParameterSet& grads, float lr, float clip);

}  // namespace truecase::nn
