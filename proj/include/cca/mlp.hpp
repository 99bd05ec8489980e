#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cca/rng.hpp"

namespace cca {

enum class Activation { kRelu, kTanh };

// Plain fully-connected network, linear output layer. Weights are (out x in);
// batches are stored column-wise so a whole batch runs as one matrix product.
struct Mlp {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
  Activation hidden = Activation::kRelu;

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  static Mlp make(const std::vector<int>& sizes, Activation hidden, RngStream& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("mlp: need at least two layer sizes");
    Mlp net;
    net.hidden = hidden;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const int fan_in = sizes[l];
      const int fan_out = sizes[l + 1];
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      Eigen::MatrixXd wl(fan_out, fan_in);
      for (Eigen::Index i = 0; i < wl.rows(); ++i) {
        for (Eigen::Index j = 0; j < wl.cols(); ++j) {
          wl(i, j) = rng.uniform(-bound, bound);
        }
      }
      net.w.push_back(std::move(wl));
      net.b.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
  }

  int input_dim() const { return static_cast<int>(w.front().cols()); }
  int output_dim() const { return static_cast<int>(w.back().rows()); }
  std::size_t num_layers() const { return w.size(); }
};

// Pre-activations and activations of one forward pass; act[0] is the input.
struct MlpCache {
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> act;
  bool valid() const { return !act.empty(); }
};

namespace detail {
inline Eigen::ArrayXXd apply_hidden(Activation act, const Eigen::MatrixXd& pre) {
  if (act == Activation::kRelu) return pre.array().max(0.0);
  return pre.array().tanh();
}
inline Eigen::ArrayXXd hidden_derivative(Activation act, const Eigen::MatrixXd& pre) {
  if (act == Activation::kRelu) {
    return (pre.array() > 0.0).cast<double>();
  }
  const Eigen::ArrayXXd t = pre.array().tanh();
  return 1.0 - t.square();
}
}  // namespace detail

// x is (input_dim x batch); returns (output_dim x batch).
inline Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& x,
                                   MlpCache* cache = nullptr) {
  if (x.rows() != net.input_dim()) throw std::invalid_argument("mlp: input dimension mismatch");
  if (cache) {
    cache->pre.assign(net.num_layers(), {});
    cache->act.assign(net.num_layers() + 1, {});
    cache->act[0] = x;
  }
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    Eigen::MatrixXd pre = (net.w[l] * h).colwise() + net.b[l];
    if (l + 1 < net.num_layers()) {
      h = detail::apply_hidden(net.hidden, pre).matrix();
    } else {
      h = pre;
    }
    if (cache) {
      cache->pre[l] = std::move(pre);
      cache->act[l + 1] = h;
    }
  }
  return h;
}

struct MlpGrads {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;

  static MlpGrads zeros_like(const Mlp& net) {
    MlpGrads g;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      g.dw.push_back(Eigen::MatrixXd::Zero(net.w[l].rows(), net.w[l].cols()));
      g.db.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
    }
    return g;
  }

  void scale(double c) {
    for (auto& m : dw) m *= c;
    for (auto& v : db) v *= c;
  }
};

// Reverse-mode pass. upstream is dLoss/dOutput (output_dim x batch); grads
// receive the parameter gradients summed over the batch columns. Returns
// dLoss/dInput (input_dim x batch). Requires the cache of the matching
// forward pass.
inline Eigen::MatrixXd mlp_backward(const Mlp& net, const MlpCache& cache,
                                    const Eigen::MatrixXd& upstream, MlpGrads& grads) {
  if (!cache.valid()) throw std::invalid_argument("mlp: backward without forward cache");
  if (upstream.rows() != net.output_dim() || upstream.cols() != cache.act[0].cols()) {
    throw std::invalid_argument("mlp: upstream gradient shape mismatch");
  }
  grads.dw.resize(net.num_layers());
  grads.db.resize(net.num_layers());
  Eigen::MatrixXd delta = upstream;
  for (std::size_t l = net.num_layers(); l-- > 0;) {
    grads.dw[l] = delta * cache.act[l].transpose();
    grads.db[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = (net.w[l].transpose() * delta).array() *
              detail::hidden_derivative(net.hidden, cache.pre[l - 1]);
    } else {
      delta = net.w[l].transpose() * delta;
    }
  }
  return delta;
}

// Flat views used by the finite-difference checks and the save format.
inline Eigen::VectorXd mlp_flatten(const Mlp& net) {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < net.num_layers(); ++l) total += net.w[l].size() + net.b[l].size();
  Eigen::VectorXd flat(total);
  Eigen::Index p = 0;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    flat.segment(p, net.w[l].size()) = Eigen::Map<const Eigen::VectorXd>(net.w[l].data(), net.w[l].size());
    p += net.w[l].size();
    flat.segment(p, net.b[l].size()) = net.b[l];
    p += net.b[l].size();
  }
  return flat;
}

inline void mlp_unflatten(Mlp& net, const Eigen::VectorXd& flat) {
  Eigen::Index p = 0;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    Eigen::Map<Eigen::VectorXd>(net.w[l].data(), net.w[l].size()) =
        flat.segment(p, net.w[l].size());
    p += net.w[l].size();
    net.b[l] = flat.segment(p, net.b[l].size());
    p += net.b[l].size();
  }
}

// Text checkpoint: a one-line shape header (activation, layer sizes) followed
// by the flattened parameters, one 64-bit real per line at 17 significant digits.
inline void mlp_save(const Mlp& net, std::ostream& os) {
  os << "mlp " << (net.hidden == Activation::kRelu ? "relu" : "tanh");
  os << " " << net.input_dim();
  for (std::size_t l = 0; l < net.num_layers(); ++l) os << " " << net.w[l].rows();
  os << "\n";
  const Eigen::VectorXd flat = mlp_flatten(net);
  char buf[64];
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", flat[i]);
    os << buf;
  }
}

inline Mlp mlp_load(std::istream& is) {
  std::string tag, act;
  if (!(is >> tag >> act) || tag != "mlp") {
    throw std::runtime_error("mlp_load: bad header");
  }
  std::string rest;
  std::getline(is, rest);
  std::vector<int> sizes;
  {
    std::istringstream ls(rest);
    int v;
    while (ls >> v) sizes.push_back(v);
  }
  if (sizes.size() < 2) throw std::runtime_error("mlp_load: bad shape header");
  Mlp net;
  net.hidden = act == "tanh" ? Activation::kTanh : Activation::kRelu;
  Eigen::Index total = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    net.w.push_back(Eigen::MatrixXd::Zero(sizes[l + 1], sizes[l]));
    net.b.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
    total += net.w.back().size() + net.b.back().size();
  }
  Eigen::VectorXd flat(total);
  for (Eigen::Index i = 0; i < total; ++i) {
    if (!(is >> flat[i])) throw std::runtime_error("mlp_load: truncated parameters");
  }
  mlp_unflatten(net, flat);
  return net;
}

inline Eigen::VectorXd mlp_flatten_grads(const MlpGrads& g) {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < g.dw.size(); ++l) total += g.dw[l].size() + g.db[l].size();
  Eigen::VectorXd flat(total);
  Eigen::Index p = 0;
  for (std::size_t l = 0; l < g.dw.size(); ++l) {
    flat.segment(p, g.dw[l].size()) = Eigen::Map<const Eigen::VectorXd>(g.dw[l].data(), g.dw[l].size());
    p += g.dw[l].size();
    flat.segment(p, g.db[l].size()) = g.db[l];
    p += g.db[l].size();
  }
  return flat;
}

}  // namespace cca
