#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cca/mlp.hpp"

namespace cca {

// Adam with the standard bias correction; defaults beta1=0.9, beta2=0.999,
// eps=1e-8. Moment buffers mirror the network's parameter shapes.
struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;

  static AdamState for_net(const Mlp& net, double lr) {
    AdamState s;
    s.lr = lr;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      s.mw.push_back(Eigen::MatrixXd::Zero(net.w[l].rows(), net.w[l].cols()));
      s.vw.push_back(Eigen::MatrixXd::Zero(net.w[l].rows(), net.w[l].cols()));
      s.mb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
      s.vb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
    }
    return s;
  }

  void apply(Mlp& net, const MlpGrads& grads) {
    if (grads.dw.size() != net.num_layers()) {
      throw std::invalid_argument("adam: gradient/parameter shape mismatch");
    }
    ++step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      if (grads.dw[l].rows() != net.w[l].rows() || grads.dw[l].cols() != net.w[l].cols()) {
        throw std::invalid_argument("adam: gradient/parameter shape mismatch");
      }
      mw[l] = beta1 * mw[l] + (1.0 - beta1) * grads.dw[l];
      vw[l] = beta2 * vw[l].array().matrix() + (1.0 - beta2) * grads.dw[l].array().square().matrix();
      net.w[l].array() -=
          lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);
      mb[l] = beta1 * mb[l] + (1.0 - beta1) * grads.db[l];
      vb[l] = beta2 * vb[l].array().matrix() + (1.0 - beta2) * grads.db[l].array().square().matrix();
      net.b[l].array() -=
          lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
    }
  }
};

}  // namespace cca
