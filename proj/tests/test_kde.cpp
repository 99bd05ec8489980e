#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cca/kde.hpp"
#include "cca/selftest.hpp"

using namespace cca;

namespace {
GaussianKde raw_kde(const Eigen::MatrixXd& centers, double h) {
  const Eigen::Index d = centers.cols();
  return GaussianKde(centers, h, Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
}
}  // namespace

TEST_CASE("kde: scott bandwidth for 1000 points in 2d", "[kde]") {
  RngStream rng(3);
  std::vector<ContinuousState> pts;
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd p(2);
    p << rng.normal(), rng.normal();
    pts.push_back(p);
  }
  const auto kde = GaussianKde::fit(pts);
  REQUIRE(kde.bandwidth() == Catch::Approx(0.31622776601683794).epsilon(1e-12));
  REQUIRE(kde.num_centers() == 1000);
}

TEST_CASE("kde: fixed bandwidth override", "[kde]") {
  RngStream rng(4);
  std::vector<ContinuousState> pts;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd p(1);
    p << rng.normal();
    pts.push_back(p);
  }
  REQUIRE(GaussianKde::fit(pts, 0.5).bandwidth() == 0.5);
}

TEST_CASE("kde: too few points rejected", "[kde]") {
  std::vector<ContinuousState> pts{Eigen::VectorXd::Zero(1)};
  REQUIRE_THROWS(GaussianKde::fit(pts));
}

TEST_CASE("kde: identical points engage the std floor", "[kde]") {
  std::vector<ContinuousState> pts(5, Eigen::VectorXd::Constant(2, 1.5));
  const auto kde = GaussianKde::fit(pts);
  REQUIRE(std::isfinite(kde.log_density(Eigen::VectorXd::Constant(2, 1.5))));
  REQUIRE(std::isfinite(kde.log_density(Eigen::VectorXd::Constant(2, 2.0))));
}

TEST_CASE("kde: two distinct points give a symmetric density", "[kde]") {
  std::vector<ContinuousState> pts{Eigen::VectorXd::Constant(1, -1.0),
                                   Eigen::VectorXd::Constant(1, 1.0)};
  const auto kde = GaussianKde::fit(pts);
  const double left = kde.log_density(Eigen::VectorXd::Constant(1, -0.3));
  const double right = kde.log_density(Eigen::VectorXd::Constant(1, 0.3));
  REQUIRE(left == Catch::Approx(right).margin(1e-12));
}

TEST_CASE("kde: single center at its mode", "[kde]") {
  Eigen::MatrixXd centers(1, 1);
  centers << 2.0;
  const auto kde = raw_kde(centers, 1.0);
  REQUIRE(kde.log_density(Eigen::VectorXd::Constant(1, 2.0)) ==
          Catch::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("kde: hand-evaluated two-center mixture", "[kde]") {
  Eigen::MatrixXd centers(2, 1);
  centers << -1.0, 1.0;
  const auto kde = raw_kde(centers, 1.0);
  REQUIRE(kde.log_density(Eigen::VectorXd::Zero(1)) ==
          Catch::Approx(-1.4189385332046727).epsilon(1e-10));
}

TEST_CASE("kde: far queries stay finite", "[kde]") {
  Eigen::MatrixXd centers(3, 2);
  centers << 0, 0, 1, 1, -1, 0.5;
  const auto kde = raw_kde(centers, 0.3);
  const double far = kde.log_density(Eigen::VectorXd::Constant(2, 500.0));
  REQUIRE(std::isfinite(far));
  REQUIRE(far < -1000.0);
}

TEST_CASE("kde: batch evaluation matches single-point evaluation", "[kde]") {
  RngStream rng(8);
  std::vector<ContinuousState> pts;
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd p(2);
    p << rng.normal(), 2.0 * rng.normal() + 1.0;
    pts.push_back(p);
  }
  const auto kde = GaussianKde::fit(pts);
  Eigen::MatrixXd queries(7, 2);
  for (int i = 0; i < 7; ++i) queries.row(i) << rng.normal(), rng.normal();
  const Eigen::VectorXd batch = kde.log_density_batch(queries);
  for (int i = 0; i < 7; ++i) {
    REQUIRE(batch[i] ==
            Catch::Approx(kde.log_density(queries.row(i).transpose())).margin(1e-12));
  }
}

TEST_CASE("kde: density integrates to one in 1d and 2d", "[kde][oracle]") {
  RngStream rng(123);
  for (int d = 1; d <= 2; ++d) {
    std::vector<ContinuousState> pts;
    for (int i = 0; i < 500; ++i) {
      Eigen::VectorXd p(d);
      for (int j = 0; j < d; ++j) {
        p[j] = rng.uniform() < 0.5 ? rng.normal(-2.0, 0.7) : rng.normal(1.5, 1.2);
      }
      pts.push_back(p);
    }
    const auto kde = GaussianKde::fit(pts);
    Eigen::VectorXd lo(d), hi(d);
    for (int j = 0; j < d; ++j) {
      lo[j] = kde.shift()[j] - 10.0 * kde.scale()[j];
      hi[j] = kde.shift()[j] + 10.0 * kde.scale()[j];
    }
    const double z = kde_grid_integral(kde, lo, hi, d == 1 ? 4000 : 400);
    REQUIRE(z == Catch::Approx(1.0).margin(1e-2));
  }
}
