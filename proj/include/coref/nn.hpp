#pragma once
// Minimal double-precision neural network engine: valid 1-D convolution
// over embedding sequences with ReLU, max-over-time pooling, dense stacks,
// binary cross entropy, exact backpropagation, Adam, Glorot init, a binary
// parameter container, and a finite-difference gradient checker.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coref/rng.hpp"

namespace coref::nn {

struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(size_t(r) * size_t(c), 0.0) {}

  double& operator()(int r, int c) { return data[size_t(r) * cols + c]; }
  double operator()(int r, int c) const { return data[size_t(r) * cols + c]; }
  double* row(int r) { return data.data() + size_t(r) * cols; }
  const double* row(int r) const { return data.data() + size_t(r) * cols; }
  size_t size() const { return data.size(); }
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline constexpr double kBceEpsilon = 1e-7;

inline double bce_loss(double p, int label) {
  p = std::min(1.0 - kBceEpsilon, std::max(kBceEpsilon, p));
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

enum class Activation { relu, sigmoid, identity };

// ---------------------------------------------------------------------------
// Convolution + pooling.
// ---------------------------------------------------------------------------

struct ConvLayer {
  int filter_width = 0;
  int in_dim = 0;
  int num_filters = 0;
  Matrix weights;                    // num_filters x (filter_width * in_dim)
  std::vector<double> biases;        // num_filters
  Matrix grad_weights;
  std::vector<double> grad_biases;

  ConvLayer() = default;
  ConvLayer(int width, int dim, int filters)
      : filter_width(width),
        in_dim(dim),
        num_filters(filters),
        weights(filters, width * dim),
        biases(size_t(filters), 0.0),
        grad_weights(filters, width * dim),
        grad_biases(size_t(filters), 0.0) {}
};

// Preactivations: out[t][f] = bias_f + w_f . window(t), no ReLU.
inline Matrix conv_preactivation(const ConvLayer& layer, const Matrix& input) {
  if (input.cols != layer.in_dim)
    throw std::invalid_argument("conv: input dim " + std::to_string(input.cols) +
                                " != layer in_dim " + std::to_string(layer.in_dim));
  if (input.rows < layer.filter_width)
    throw std::invalid_argument("conv: input length " + std::to_string(input.rows) +
                                " shorter than filter width " +
                                std::to_string(layer.filter_width));
  const int out_len = input.rows - layer.filter_width + 1;
  const int window = layer.filter_width * layer.in_dim;
  Matrix out(out_len, layer.num_filters);
  for (int t = 0; t < out_len; ++t) {
    // Row-major input makes the window one contiguous run.
    const double* x = input.row(t);
    for (int f = 0; f < layer.num_filters; ++f) {
      const double* w = layer.weights.row(f);
      double acc = layer.biases[f];
      for (int k = 0; k < window; ++k) acc += w[k] * x[k];
      out(t, f) = acc;
    }
  }
  return out;
}

inline Matrix conv_forward(const ConvLayer& layer, const Matrix& input) {
  Matrix out = conv_preactivation(layer, input);
  for (double& v : out.data) v = v > 0 ? v : 0.0;
  return out;
}

// Accumulates weight/bias gradients and returns the input gradient.
// `pre` is the cached preactivation, `dout` the gradient of the ReLU output.
inline Matrix conv_backward(ConvLayer& layer, const Matrix& input, const Matrix& pre,
                            const Matrix& dout) {
  const int out_len = pre.rows;
  const int window = layer.filter_width * layer.in_dim;
  Matrix dinput(input.rows, input.cols);
  for (int t = 0; t < out_len; ++t) {
    const double* x = input.row(t);
    double* dx = dinput.row(t);
    for (int f = 0; f < layer.num_filters; ++f) {
      if (pre(t, f) <= 0) continue;  // ReLU subgradient 0 at 0
      const double g = dout(t, f);
      if (g == 0) continue;
      layer.grad_biases[f] += g;
      double* dw = layer.grad_weights.row(f);
      const double* w = layer.weights.row(f);
      for (int k = 0; k < window; ++k) {
        dw[k] += g * x[k];
        dx[k] += g * w[k];
      }
    }
  }
  return dinput;
}

// Component f = max over rows of input[.][f].
inline std::vector<double> max_pool(const Matrix& input) {
  if (input.rows < 1) throw std::invalid_argument("max_pool: empty input");
  std::vector<double> out(input.row(0), input.row(0) + input.cols);
  for (int t = 1; t < input.rows; ++t) {
    const double* r = input.row(t);
    for (int f = 0; f < input.cols; ++f)
      if (r[f] > out[f]) out[f] = r[f];
  }
  return out;
}

// Row index of the first maximal entry per column.
inline std::vector<int> max_pool_argmax(const Matrix& input) {
  if (input.rows < 1) throw std::invalid_argument("max_pool: empty input");
  std::vector<int> arg(size_t(input.cols), 0);
  for (int t = 1; t < input.rows; ++t) {
    const double* r = input.row(t);
    for (int f = 0; f < input.cols; ++f)
      if (r[f] > input(arg[f], f)) arg[f] = t;
  }
  return arg;
}

inline Matrix max_pool_backward(int rows, const std::vector<int>& argmax,
                                const std::vector<double>& dout) {
  Matrix din(rows, int(argmax.size()));
  for (size_t f = 0; f < argmax.size(); ++f) din(argmax[f], int(f)) = dout[f];
  return din;
}

// ---------------------------------------------------------------------------
// Dense layers.
// ---------------------------------------------------------------------------

struct DenseLayer {
  int in_dim = 0, out_dim = 0;
  Matrix weights;  // out_dim x in_dim
  std::vector<double> biases;
  Activation activation = Activation::relu;
  Matrix grad_weights;
  std::vector<double> grad_biases;

  DenseLayer() = default;
  DenseLayer(int in, int out, Activation act)
      : in_dim(in),
        out_dim(out),
        weights(out, in),
        biases(size_t(out), 0.0),
        activation(act),
        grad_weights(out, in),
        grad_biases(size_t(out), 0.0) {}
};

inline std::vector<double> dense_preactivation(const DenseLayer& layer,
                                               const std::vector<double>& x) {
  if (int(x.size()) != layer.in_dim)
    throw std::invalid_argument("dense: input size " + std::to_string(x.size()) +
                                " != in_dim " + std::to_string(layer.in_dim));
  std::vector<double> out(size_t(layer.out_dim));
  for (int o = 0; o < layer.out_dim; ++o) {
    const double* w = layer.weights.row(o);
    double acc = layer.biases[o];
    for (int i = 0; i < layer.in_dim; ++i) acc += w[i] * x[i];
    out[o] = acc;
  }
  return out;
}

inline double apply_activation(Activation act, double z) {
  switch (act) {
    case Activation::relu: return z > 0 ? z : 0.0;
    case Activation::sigmoid: return sigmoid(z);
    case Activation::identity: return z;
  }
  return z;
}

inline std::vector<double> dense_forward(const DenseLayer& layer, const std::vector<double>& x) {
  std::vector<double> out = dense_preactivation(layer, x);
  for (double& v : out) v = apply_activation(layer.activation, v);
  return out;
}

// `pre` is the cached preactivation, `dout` the gradient of the activation
// output. Returns the input gradient.
inline std::vector<double> dense_backward(DenseLayer& layer, const std::vector<double>& x,
                                          const std::vector<double>& pre,
                                          const std::vector<double>& dout) {
  std::vector<double> dx(size_t(layer.in_dim), 0.0);
  for (int o = 0; o < layer.out_dim; ++o) {
    double dpre = dout[o];
    switch (layer.activation) {
      case Activation::relu:
        if (pre[o] <= 0) dpre = 0;
        break;
      case Activation::sigmoid: {
        const double s = sigmoid(pre[o]);
        dpre *= s * (1.0 - s);
        break;
      }
      case Activation::identity:
        break;
    }
    if (dpre == 0) continue;
    layer.grad_biases[o] += dpre;
    double* dw = layer.grad_weights.row(o);
    const double* w = layer.weights.row(o);
    for (int i = 0; i < layer.in_dim; ++i) {
      dw[i] += dpre * x[i];
      dx[i] += dpre * w[i];
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Composites: a tower of stacked convolutions ending in one max-over-time
// pool, a block of parallel towers over the same input, and a dense stack.
// ---------------------------------------------------------------------------

struct ConvTower {
  std::vector<ConvLayer> convs;

  int out_dim() const { return convs.back().num_filters; }
  int min_input_len() const {
    int len = 1;
    for (const ConvLayer& c : convs) len += c.filter_width - 1;
    return len;
  }
};

struct ConvTowerCache {
  std::vector<Matrix> inputs;  // input of each conv stage
  std::vector<Matrix> pres;    // preactivation of each conv stage
  Matrix last_out;             // ReLU output feeding the pool
  std::vector<int> argmax;
};

inline std::vector<double> tower_forward(const ConvTower& tower, const Matrix& input,
                                         ConvTowerCache* cache) {
  Matrix x = input;
  if (cache) {
    cache->inputs.clear();
    cache->pres.clear();
  }
  for (const ConvLayer& conv : tower.convs) {
    Matrix pre = conv_preactivation(conv, x);
    Matrix out = pre;
    for (double& v : out.data) v = v > 0 ? v : 0.0;
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->pres.push_back(std::move(pre));
    }
    x = std::move(out);
  }
  std::vector<double> pooled = max_pool(x);
  if (cache) {
    cache->argmax = max_pool_argmax(x);
    cache->last_out = std::move(x);
  }
  return pooled;
}

inline Matrix tower_backward(ConvTower& tower, const ConvTowerCache& cache,
                             const std::vector<double>& dpooled) {
  Matrix dx = max_pool_backward(cache.last_out.rows, cache.argmax, dpooled);
  for (int i = int(tower.convs.size()) - 1; i >= 0; --i)
    dx = conv_backward(tower.convs[i], cache.inputs[i], cache.pres[i], dx);
  return dx;
}

struct CnnBlock {
  std::vector<ConvTower> towers;

  int out_dim() const {
    int d = 0;
    for (const ConvTower& t : towers) d += t.out_dim();
    return d;
  }
  int min_input_len() const {
    int len = 1;
    for (const ConvTower& t : towers) len = std::max(len, t.min_input_len());
    return len;
  }
};

struct CnnBlockCache {
  std::vector<ConvTowerCache> towers;
};

// Concatenation of all tower outputs, in tower order.
inline std::vector<double> block_forward(const CnnBlock& block, const Matrix& input,
                                         CnnBlockCache* cache) {
  if (cache) cache->towers.resize(block.towers.size());
  std::vector<double> out;
  out.reserve(size_t(block.out_dim()));
  for (size_t i = 0; i < block.towers.size(); ++i) {
    std::vector<double> pooled =
        tower_forward(block.towers[i], input, cache ? &cache->towers[i] : nullptr);
    out.insert(out.end(), pooled.begin(), pooled.end());
  }
  return out;
}

inline void block_backward(CnnBlock& block, const CnnBlockCache& cache,
                           const std::vector<double>& dout) {
  size_t off = 0;
  for (size_t i = 0; i < block.towers.size(); ++i) {
    const size_t d = size_t(block.towers[i].out_dim());
    std::vector<double> slice(dout.begin() + off, dout.begin() + off + d);
    tower_backward(block.towers[i], cache.towers[i], slice);
    off += d;
  }
}

struct DenseStack {
  std::vector<DenseLayer> layers;

  int out_dim() const { return layers.back().out_dim; }
};

struct DenseStackCache {
  std::vector<std::vector<double>> xs;    // input of each layer
  std::vector<std::vector<double>> pres;  // preactivation of each layer
};

inline std::vector<double> stack_forward(const DenseStack& stack, std::vector<double> x,
                                         DenseStackCache* cache) {
  if (cache) {
    cache->xs.clear();
    cache->pres.clear();
  }
  for (const DenseLayer& layer : stack.layers) {
    std::vector<double> pre = dense_preactivation(layer, x);
    std::vector<double> out(pre.size());
    for (size_t i = 0; i < pre.size(); ++i) out[i] = apply_activation(layer.activation, pre[i]);
    if (cache) {
      cache->xs.push_back(std::move(x));
      cache->pres.push_back(std::move(pre));
    }
    x = std::move(out);
  }
  return x;
}

inline std::vector<double> stack_backward(DenseStack& stack, const DenseStackCache& cache,
                                          std::vector<double> dout) {
  for (int i = int(stack.layers.size()) - 1; i >= 0; --i)
    dout = dense_backward(stack.layers[i], cache.xs[i], cache.pres[i], dout);
  return dout;
}

// ---------------------------------------------------------------------------
// Parameters: named tensors, serialization, init, Adam.
// ---------------------------------------------------------------------------

struct TensorRef {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  int rows = 0, cols = 0;

  size_t size() const { return size_t(rows) * size_t(cols); }
};

inline void append_conv_refs(std::vector<TensorRef>& refs, ConvLayer& c, const std::string& name) {
  refs.push_back({name + ".w", c.weights.data.data(), c.grad_weights.data.data(),
                  c.weights.rows, c.weights.cols});
  refs.push_back({name + ".b", c.biases.data(), c.grad_biases.data(), 1, int(c.biases.size())});
}

inline void append_dense_refs(std::vector<TensorRef>& refs, DenseLayer& d, const std::string& name) {
  refs.push_back({name + ".w", d.weights.data.data(), d.grad_weights.data.data(),
                  d.weights.rows, d.weights.cols});
  refs.push_back({name + ".b", d.biases.data(), d.grad_biases.data(), 1, int(d.biases.size())});
}

inline void zero_grads(std::vector<TensorRef>& refs) {
  for (TensorRef& r : refs) std::memset(r.grad, 0, r.size() * sizeof(double));
}

struct ParamBlock {
  std::string name;
  int rows = 0, cols = 0;
  std::vector<double> data;
};

struct ModelParams {
  std::vector<ParamBlock> blocks;
};

inline ModelParams snapshot_params(const std::vector<TensorRef>& refs) {
  ModelParams p;
  for (const TensorRef& r : refs) {
    ParamBlock b;
    b.name = r.name;
    b.rows = r.rows;
    b.cols = r.cols;
    b.data.assign(r.value, r.value + r.size());
    p.blocks.push_back(std::move(b));
  }
  return p;
}

inline void restore_params(std::vector<TensorRef>& refs, const ModelParams& params) {
  if (params.blocks.size() != refs.size())
    throw std::runtime_error("model parameters: block count mismatch");
  for (size_t i = 0; i < refs.size(); ++i) {
    const ParamBlock& b = params.blocks[i];
    TensorRef& r = refs[i];
    if (b.name != r.name || b.rows != r.rows || b.cols != r.cols)
      throw std::runtime_error("model parameters: block '" + b.name +
                               "' does not match expected '" + r.name + "'");
    std::memcpy(r.value, b.data.data(), r.size() * sizeof(double));
  }
}

namespace detail {

inline void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error("model file: truncated");
  return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}

inline void write_f64(std::ostream& out, double d) {
  uint64_t v;
  std::memcpy(&v, &d, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline double read_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    throw std::runtime_error("model file: truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

}  // namespace detail

inline constexpr char kParamsMagic[4] = {'K', 'N', 'N', '1'};

inline void save_params(const ModelParams& params, std::ostream& out) {
  out.write(kParamsMagic, 4);
  detail::write_u32(out, uint32_t(params.blocks.size()));
  for (const ParamBlock& b : params.blocks) {
    detail::write_u32(out, uint32_t(b.name.size()));
    out.write(b.name.data(), std::streamsize(b.name.size()));
    detail::write_u32(out, uint32_t(b.rows));
    detail::write_u32(out, uint32_t(b.cols));
    for (double d : b.data) detail::write_f64(out, d);
  }
}

inline ModelParams load_params(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kParamsMagic, 4) != 0)
    throw std::runtime_error("model file: bad magic");
  ModelParams params;
  const uint32_t count = detail::read_u32(in);
  for (uint32_t i = 0; i < count; ++i) {
    ParamBlock b;
    const uint32_t name_len = detail::read_u32(in);
    b.name.resize(name_len);
    if (!in.read(b.name.data(), name_len)) throw std::runtime_error("model file: truncated");
    b.rows = int(detail::read_u32(in));
    b.cols = int(detail::read_u32(in));
    b.data.resize(size_t(b.rows) * size_t(b.cols));
    for (double& d : b.data) d = detail::read_f64(in);
    params.blocks.push_back(std::move(b));
  }
  return params;
}

// Glorot-uniform weights, zero biases.
inline void init_dense(DenseLayer& layer, SplitMix64& rng) {
  const double bound = std::sqrt(6.0 / (layer.in_dim + layer.out_dim));
  for (double& w : layer.weights.data) w = rng.next_range(-bound, bound);
  for (double& b : layer.biases) b = 0.0;
}

inline void init_conv(ConvLayer& layer, SplitMix64& rng) {
  const int fan_in = layer.filter_width * layer.in_dim;
  const double bound = std::sqrt(6.0 / (fan_in + layer.num_filters));
  for (double& w : layer.weights.data) w = rng.next_range(-bound, bound);
  for (double& b : layer.biases) b = 0.0;
}

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

inline AdamState adam_init(const std::vector<TensorRef>& refs) {
  size_t total = 0;
  for (const TensorRef& r : refs) total += r.size();
  AdamState s;
  s.m.assign(total, 0.0);
  s.v.assign(total, 0.0);
  return s;
}

// One update over every tensor, reading gradients from the refs.
inline void adam_step(std::vector<TensorRef>& refs, AdamState& state, double lr) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, double(state.t));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, double(state.t));
  size_t off = 0;
  for (TensorRef& r : refs) {
    for (size_t i = 0; i < r.size(); ++i, ++off) {
      const double g = r.grad[i];
      state.m[off] = kAdamBeta1 * state.m[off] + (1.0 - kAdamBeta1) * g;
      state.v[off] = kAdamBeta2 * state.v[off] + (1.0 - kAdamBeta2) * g * g;
      const double mhat = state.m[off] / bc1;
      const double vhat = state.v[off] / bc2;
      r.value[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEpsilon);
    }
  }
}

// Raw-array flavor used by unit tests and simple loops.
inline void adam_step(std::vector<double>& params, const std::vector<double>& grads,
                      AdamState& state, double lr) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, double(state.t));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, double(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * g;
    state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEpsilon);
  }
}

// ---------------------------------------------------------------------------
// Gradient checking: central finite differences against analytic gradients.
// ---------------------------------------------------------------------------

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  size_t worst_index = 0;
};

// `loss` recomputes the scalar objective from current parameter values;
// `compute_grads` fills the refs' grad buffers analytically. Entries where
// both gradients are below `zero_floor` count as exact.
inline GradCheckResult gradient_check(std::vector<TensorRef>& refs,
                                      const std::function<double()>& loss,
                                      const std::function<void()>& compute_grads,
                                      double h = 1e-4, double zero_floor = 1e-7) {
  compute_grads();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(refs.size());
  for (const TensorRef& r : refs) analytic.emplace_back(r.grad, r.grad + r.size());

  GradCheckResult result;
  for (size_t t = 0; t < refs.size(); ++t) {
    TensorRef& r = refs[t];
    for (size_t i = 0; i < r.size(); ++i) {
      const double saved = r.value[i];
      r.value[i] = saved + h;
      const double lp = loss();
      r.value[i] = saved - h;
      const double lm = loss();
      r.value[i] = saved;
      const double fd = (lp - lm) / (2.0 * h);
      const double an = analytic[t][i];
      const double denom = std::max(std::fabs(fd), std::fabs(an));
      double rel = 0.0;
      if (denom >= zero_floor) rel = std::fabs(fd - an) / denom;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_tensor = r.name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace coref::nn
