/*
 * Copyright 2026 The gairlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "gair/model.hpp"

#include <cmath>
#include <limits>

#include "gair/errors.hpp"

namespace gair {
namespace {

constexpr std::size_t kNoParams = std::numeric_limits<std::size_t>::max();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void dense_forward(const Dense& d, const Tensor& w, const Tensor& b, const Tensor& x, Tensor& y) {
  const std::size_t batch = x.rows();
  for (std::size_t n = 0; n < batch; ++n) {
    auto in = x.row(n);
    auto out = y.row(n);
    for (std::size_t o = 0; o < d.out; ++o) {
      double acc = b[o];
      const double* wrow = &w[o * d.in];
      for (std::size_t i = 0; i < d.in; ++i) acc += wrow[i] * in[i];
      out[o] = acc;
    }
  }
}

void dense_backward(const Dense& d, const Tensor& w, const Tensor& x, const Tensor& g, Tensor* dw, Tensor* db,
                    Tensor& dx) {
  const std::size_t batch = x.rows();
  for (std::size_t n = 0; n < batch; ++n) {
    auto in = x.row(n);
    auto gout = g.row(n);
    auto gin = dx.row(n);
    for (std::size_t o = 0; o < d.out; ++o) {
      const double go = gout[o];
      if (dw != nullptr) {
        double* dwrow = &(*dw)[o * d.in];
        for (std::size_t i = 0; i < d.in; ++i) dwrow[i] += go * in[i];
        (*db)[o] += go;
      }
      const double* wrow = &w[o * d.in];
      for (std::size_t i = 0; i < d.in; ++i) gin[i] += wrow[i] * go;
    }
  }
}

void conv_forward(const Conv2D& c, const Tensor& w, const Tensor& b, const Tensor& x, Tensor& y) {
  const auto pad = static_cast<std::ptrdiff_t>(c.kernel / 2);
  const auto h = static_cast<std::ptrdiff_t>(c.height);
  const auto wd = static_cast<std::ptrdiff_t>(c.width);
  const auto k = static_cast<std::ptrdiff_t>(c.kernel);
  const std::size_t plane = c.height * c.width;
  for (std::size_t n = 0; n < x.rows(); ++n) {
    auto in = x.row(n);
    auto out = y.row(n);
    for (std::size_t co = 0; co < c.out_channels; ++co) {
      for (std::ptrdiff_t r = 0; r < h; ++r) {
        for (std::ptrdiff_t s = 0; s < wd; ++s) {
          double acc = b[co];
          for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
            const double* kern = &w[(co * c.in_channels + ci) * c.kernel * c.kernel];
            for (std::ptrdiff_t kr = 0; kr < k; ++kr) {
              const std::ptrdiff_t rr = r + kr - pad;
              if (rr < 0 || rr >= h) continue;
              for (std::ptrdiff_t ks = 0; ks < k; ++ks) {
                const std::ptrdiff_t ss = s + ks - pad;
                if (ss < 0 || ss >= wd) continue;
                acc += kern[kr * k + ks] * in[ci * plane + static_cast<std::size_t>(rr * wd + ss)];
              }
            }
          }
          out[co * plane + static_cast<std::size_t>(r * wd + s)] = acc;
        }
      }
    }
  }
}

void conv_backward(const Conv2D& c, const Tensor& w, const Tensor& x, const Tensor& g, Tensor* dw, Tensor* db,
                   Tensor& dx) {
  const auto pad = static_cast<std::ptrdiff_t>(c.kernel / 2);
  const auto h = static_cast<std::ptrdiff_t>(c.height);
  const auto wd = static_cast<std::ptrdiff_t>(c.width);
  const auto k = static_cast<std::ptrdiff_t>(c.kernel);
  const std::size_t plane = c.height * c.width;
  for (std::size_t n = 0; n < x.rows(); ++n) {
    auto in = x.row(n);
    auto gout = g.row(n);
    auto gin = dx.row(n);
    for (std::size_t co = 0; co < c.out_channels; ++co) {
      for (std::ptrdiff_t r = 0; r < h; ++r) {
        for (std::ptrdiff_t s = 0; s < wd; ++s) {
          const double go = gout[co * plane + static_cast<std::size_t>(r * wd + s)];
          if (db != nullptr) (*db)[co] += go;
          for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
            const std::size_t kbase = (co * c.in_channels + ci) * c.kernel * c.kernel;
            for (std::ptrdiff_t kr = 0; kr < k; ++kr) {
              const std::ptrdiff_t rr = r + kr - pad;
              if (rr < 0 || rr >= h) continue;
              for (std::ptrdiff_t ks = 0; ks < k; ++ks) {
                const std::ptrdiff_t ss = s + ks - pad;
                if (ss < 0 || ss >= wd) continue;
                const std::size_t xi = ci * plane + static_cast<std::size_t>(rr * wd + ss);
                const std::size_t ki = kbase + static_cast<std::size_t>(kr * k + ks);
                if (dw != nullptr) (*dw)[ki] += go * in[xi];
                gin[xi] += w[ki] * go;
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace

std::size_t layer_output_size(const LayerSpec& layer, std::size_t input_size) {
  return std::visit(Overloaded{
                        [&](const Dense& d) {
                          if (d.in == 0 || d.out == 0) throw ConfigError("dense layer extents must be positive");
                          if (d.in != input_size) {
                            throw ConfigError("dense layer expects " + std::to_string(d.in) + " inputs but receives " +
                                              std::to_string(input_size));
                          }
                          return d.out;
                        },
                        [&](const Relu&) { return input_size; },
                        [&](const Conv2D& c) {
                          if (c.in_channels == 0 || c.out_channels == 0 || c.height == 0 || c.width == 0) {
                            throw ConfigError("conv2d extents must be positive");
                          }
                          if (c.kernel % 2 == 0) throw ConfigError("conv2d kernel extent must be odd");
                          if (c.in_channels * c.height * c.width != input_size) {
                            throw ConfigError("conv2d input extent mismatch");
                          }
                          return c.out_channels * c.height * c.width;
                        },
                    },
                    layer);
}

Model::Model(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("model needs at least one layer");
  std::size_t width = 0;
  if (const auto* d = std::get_if<Dense>(&layers_.front())) {
    width = d->in;
  } else if (const auto* c = std::get_if<Conv2D>(&layers_.front())) {
    width = c->in_channels * c->height * c->width;
  } else {
    throw ConfigError("first layer must be Dense or Conv2D");
  }
  input_size_ = width;
  for (const auto& layer : layers_) {
    widths_.push_back(width);
    width = layer_output_size(layer, width);
    if (const auto* d = std::get_if<Dense>(&layer)) {
      param_offset_.push_back(params_.size());
      params_.emplace_back(std::vector<std::size_t>{d->out, d->in});
      params_.emplace_back(std::vector<std::size_t>{d->out});
    } else if (const auto* c = std::get_if<Conv2D>(&layer)) {
      param_offset_.push_back(params_.size());
      params_.emplace_back(std::vector<std::size_t>{c->out_channels, c->in_channels, c->kernel, c->kernel});
      params_.emplace_back(std::vector<std::size_t>{c->out_channels});
    } else {
      param_offset_.push_back(kNoParams);
    }
  }
  widths_.push_back(width);
  class_count_ = width;
  if (class_count_ < 2) throw ConfigError("model must emit at least two class scores");
}

Model Model::initialized(std::vector<LayerSpec> layers, Rng& rng) {
  Model model(std::move(layers));
  for (std::size_t i = 0; i < model.layers_.size(); ++i) {
    if (model.param_offset_[i] == kNoParams) continue;
    Tensor& w = model.params_[model.param_offset_[i]];
    const double fan_in = static_cast<double>(w.size() / w.shape().front());
    const double scale = std::sqrt(2.0 / fan_in);
    for (double& v : w.data()) v = scale * rng.normal();
  }
  return model;
}

std::vector<std::string> Model::param_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (param_offset_[i] == kNoParams) continue;
    names.push_back("layer" + std::to_string(i) + ".weight");
    names.push_back("layer" + std::to_string(i) + ".bias");
  }
  return names;
}

void Model::check_input(const Tensor& inputs) const {
  if (inputs.rank() < 2) throw ConfigError("model input must be [batch, features...]");
  if (inputs.cols() != input_size_) {
    throw ConfigError("model expects " + std::to_string(input_size_) + " features per example, got " +
                      std::to_string(inputs.cols()));
  }
}

Tensor Model::forward(const Tensor& inputs) const { return forward_trace(inputs).values.back(); }

Model::Trace Model::forward_trace(const Tensor& inputs) const {
  check_input(inputs);
  const std::size_t batch = inputs.rows();
  Trace trace;
  trace.values.reserve(layers_.size() + 1);
  trace.values.push_back(inputs);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Tensor& x = trace.values.back();
    Tensor y(std::vector<std::size_t>{batch, widths_[i + 1]});
    std::visit(Overloaded{
                   [&](const Dense& d) { dense_forward(d, params_[param_offset_[i]], params_[param_offset_[i] + 1], x, y); },
                   [&](const Relu&) {
                     for (std::size_t j = 0; j < x.size(); ++j) y[j] = x[j] > 0.0 ? x[j] : 0.0;
                   },
                   [&](const Conv2D& c) { conv_forward(c, params_[param_offset_[i]], params_[param_offset_[i] + 1], x, y); },
               },
               layers_[i]);
    trace.values.push_back(std::move(y));
  }
  return trace;
}

Tensor Model::backward(const Trace& trace, const Tensor& logit_grad, std::vector<Tensor>* param_grads) const {
  if (trace.values.size() != layers_.size() + 1) throw ConfigError("trace does not belong to this model");
  if (!logit_grad.same_shape(trace.logits())) throw ConfigError("logit gradient shape mismatch");
  if (param_grads != nullptr && param_grads->size() != params_.size()) {
    throw ConfigError("parameter gradient set has the wrong length");
  }
  const std::size_t batch = logit_grad.rows();
  Tensor g = logit_grad;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Tensor& x = trace.values[i];
    Tensor dx(std::vector<std::size_t>{batch, widths_[i]});
    Tensor* dw = nullptr;
    Tensor* db = nullptr;
    if (param_grads != nullptr && param_offset_[i] != kNoParams) {
      dw = &(*param_grads)[param_offset_[i]];
      db = &(*param_grads)[param_offset_[i] + 1];
    }
    std::visit(Overloaded{
                   [&](const Dense& d) { dense_backward(d, params_[param_offset_[i]], x, g, dw, db, dx); },
                   [&](const Relu&) {
                     for (std::size_t j = 0; j < x.size(); ++j) dx[j] = x[j] > 0.0 ? g[j] : 0.0;
                   },
                   [&](const Conv2D& c) { conv_backward(c, params_[param_offset_[i]], x, g, dw, db, dx); },
               },
               layers_[i]);
    g = std::move(dx);
  }
  return Tensor(trace.values.front().shape(), std::vector<double>(g.data().begin(), g.data().end()));
}

std::vector<Tensor> Model::zero_like_params() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.emplace_back(p.shape());
  return out;
}

}  // namespace gair
