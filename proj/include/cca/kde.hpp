#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cca/types.hpp"

namespace cca {

// Gaussian kernel density estimate with a product-isotropic kernel in
// per-dimension standardized coordinates. Densities are reported in the
// original coordinates (standardization Jacobian included) and evaluated via
// log-sum-exp, so queries far from every center stay finite.
class GaussianKde {
 public:
  // centers are rows (n x d), given in original coordinates; shift/scale is
  // the per-dimension affine standardization z = (x - shift) / scale;
  // bandwidth applies in standardized coordinates.
  GaussianKde(Eigen::MatrixXd centers, double bandwidth, Eigen::VectorXd shift,
              Eigen::VectorXd scale)
      : shift_(std::move(shift)), scale_(std::move(scale)), h_(bandwidth) {
    if (centers.rows() < 1) throw std::invalid_argument("kde: needs at least one center");
    if (!(h_ > 0.0)) throw std::invalid_argument("kde: bandwidth must be > 0");
    const Eigen::Index n = centers.rows();
    const Eigen::Index d = centers.cols();
    centers_std_.resize(n, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      centers_std_.col(j) = (centers.col(j).array() - shift_[j]) / scale_[j];
    }
    center_sq_norms_ = centers_std_.rowwise().squaredNorm();
    log_norm_ = -std::log(static_cast<double>(n)) - d * std::log(h_) -
                0.5 * d * std::log(2.0 * kPi) - scale_.array().log().sum();
  }

  // Standardizes each dimension by its sample mean/std (std floored at 1e-6)
  // and sets the bandwidth by Scott's rule h = n^(-1/(d+4)) unless a fixed
  // value is given.
  static GaussianKde fit(const std::vector<ContinuousState>& points,
                         double fixed_bandwidth = 0.0) {
    if (points.size() < 2) throw std::invalid_argument("kde: needs at least two points");
    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    const Eigen::Index d = points.front().size();
    Eigen::MatrixXd centers(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (points[i].size() != d) throw std::invalid_argument("kde: mixed dimensions");
      centers.row(i) = points[i].transpose();
    }
    const Eigen::VectorXd mean = centers.colwise().mean();
    Eigen::VectorXd scale(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double var =
          (centers.col(j).array() - mean[j]).square().sum() / static_cast<double>(n - 1);
      scale[j] = std::max(std::sqrt(var), 1e-6);
    }
    const double h = fixed_bandwidth > 0.0
                         ? fixed_bandwidth
                         : std::pow(static_cast<double>(n), -1.0 / (d + 4.0));
    return GaussianKde(std::move(centers), h, mean, std::move(scale));
  }

  double log_density(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd q(1, x.size());
    q.row(0) = x.transpose();
    return log_density_batch(q)[0];
  }

  // Queries are rows (m x d). The pairwise squared distances are formed as
  // |z|^2 + |c|^2 - 2 z.c so the inner loop is a single matrix product.
  Eigen::VectorXd log_density_batch(const Eigen::MatrixXd& queries) const {
    const Eigen::Index m = queries.rows();
    const Eigen::Index d = centers_std_.cols();
    if (queries.cols() != d) throw std::invalid_argument("kde: query dimension mismatch");
    Eigen::MatrixXd z(m, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      z.col(j) = (queries.col(j).array() - shift_[j]) / scale_[j];
    }
    const Eigen::VectorXd z_sq = z.rowwise().squaredNorm();
    // exponents(i, k) = -|z_i - c_k|^2 / (2 h^2)
    Eigen::MatrixXd exponents = z * centers_std_.transpose();
    exponents *= 2.0;
    exponents.colwise() -= z_sq;
    exponents.rowwise() -= center_sq_norms_.transpose();
    exponents /= (2.0 * h_ * h_);
    Eigen::VectorXd out(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double mx = exponents.row(i).maxCoeff();
      const double sum = (exponents.row(i).array() - mx).exp().sum();
      out[i] = mx + std::log(sum) + log_norm_;
    }
    return out;
  }

  double bandwidth() const { return h_; }
  Eigen::Index dim() const { return centers_std_.cols(); }
  Eigen::Index num_centers() const { return centers_std_.rows(); }
  const Eigen::VectorXd& shift() const { return shift_; }
  const Eigen::VectorXd& scale() const { return scale_; }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  Eigen::MatrixXd centers_std_;
  Eigen::VectorXd center_sq_norms_;
  Eigen::VectorXd shift_, scale_;
  double h_;
  double log_norm_;
};

}  // namespace cca
