// Copyright 2026 The acnfa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "acnfa/background.hpp"
#include "acnfa/error.hpp"

namespace acnfa {
namespace {

ImageTensor random_image(int h, int w, int k, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> data(static_cast<std::size_t>(h * w * k));
  // correlated channels: channel c mixes the first c+1 draws
  for (std::size_t p = 0; p < static_cast<std::size_t>(h * w); ++p) {
    double acc = 0.0;
    for (int c = 0; c < k; ++c) {
      acc = 0.6 * acc + nd(gen);
      data[p * k + c] = acc + 3.0 * c;
    }
  }
  return ImageTensor(h, w, k, std::move(data));
}

// Cofactor inverse of a 3x3 matrix; independent of the Cholesky path.
std::array<std::array<double, 3>, 3> inverse3(const Eigen::MatrixXd& m) {
  const double a = m(0, 0), b = m(0, 1), c = m(0, 2);
  const double d = m(1, 0), e = m(1, 1), f = m(1, 2);
  const double g = m(2, 0), h = m(2, 1), i = m(2, 2);
  const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  return {{{(e * i - f * h) / det, (c * h - b * i) / det, (b * f - c * e) / det},
           {(f * g - d * i) / det, (a * i - c * g) / det, (c * d - a * f) / det},
           {(d * h - e * g) / det, (b * g - a * h) / det, (a * e - b * d) / det}}};
}

TEST(Background, TwoPixelPopulationVariance) {
  const ImageTensor img(1, 2, 1, std::vector<double>{0.0, 2.0});
  const auto model = estimate_background(img, BackgroundMethod::empirical, 0.0);
  EXPECT_DOUBLE_EQ(model.mean()(0), 1.0);
  EXPECT_DOUBLE_EQ(model.covariance()(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(model.eta_test(), 2.0);
  EXPECT_FALSE(model.degenerate());
}

TEST(Background, ConstantImageIsDegenerate) {
  const ImageTensor img(8, 8, 1, 5.0);
  const auto model = estimate_background(img);
  EXPECT_TRUE(model.degenerate());
  const double px = 5.0;
  EXPECT_THROW(model.mahalanobis_sq({&px, 1}), DegenerateModelError);
}

TEST(Background, PerfectlyCorrelatedChannelsBecomePositiveDefinite) {
  const std::vector<double> data{0, 0, 1, 2, 2, 4, 3, 6};  // channel 1 = 2 * channel 0
  const ImageTensor img(2, 2, 2, data);
  const auto raw = estimate_background(img, BackgroundMethod::empirical, 0.0);
  EXPECT_TRUE(raw.degenerate());
  const auto model = estimate_background(img, BackgroundMethod::empirical, kDefaultRidge);
  ASSERT_FALSE(model.degenerate());
  const Eigen::MatrixXd& l = model.whitener();
  EXPECT_LE((l * l.transpose() - model.regularized_covariance()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(l.diagonal().minCoeff(), 0.0);
  const double lambda = kDefaultRidge * model.covariance().trace() / 2.0;
  EXPECT_NEAR(model.regularized_covariance()(0, 0), model.covariance()(0, 0) + lambda, 1e-15);
}

TEST(Background, MahalanobisExamples) {
  Eigen::VectorXd mu(1);
  mu << 0.0;
  Eigen::MatrixXd cov(1, 1);
  cov << 4.0;
  const auto model = BackgroundModel::from_parameters(mu, cov, 100.0);
  const double six = 6.0, zero = 0.0;
  EXPECT_DOUBLE_EQ(model.mahalanobis_sq({&six, 1}), 9.0);
  EXPECT_EQ(model.mahalanobis_sq({&zero, 1}), 0.0);
  const double two[2] = {1.0, 2.0};
  EXPECT_THROW(model.mahalanobis_sq({two, 2}), DimensionError);
}

TEST(Background, MahalanobisMatchesExplicitInverse) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd a(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = nd(gen);
    const Eigen::MatrixXd cov = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd mu(3);
    mu << nd(gen), nd(gen), nd(gen);
    const auto model = BackgroundModel::from_parameters(mu, cov, 10.0);
    const auto inv = inverse3(cov);
    const double x[3] = {nd(gen) * 3, nd(gen) * 3, nd(gen) * 3};
    double want = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) want += (x[i] - mu(i)) * inv[i][j] * (x[j] - mu(j));
    const double got = model.mahalanobis_sq({x, 3});
    EXPECT_LE(std::fabs(got - want), 1e-10 * std::max(1.0, want)) << "trial " << trial;
  }
}

TEST(Background, TraceIdentity) {
  for (int k : {1, 2, 3, 4}) {
    const ImageTensor img = random_image(40, 37, k, 100 + k);
    const auto model = estimate_background(img, BackgroundMethod::empirical, 0.0);
    double sum = 0.0;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) sum += model.mahalanobis_sq(img.pixel(p));
    EXPECT_NEAR(sum / static_cast<double>(img.pixel_count()) / k, 1.0, 1e-9) << "K=" << k;
  }
}

TEST(Background, WhitenedVarianceIsOne) {
  const int k = 3;
  const ImageTensor img = random_image(30, 30, k, 9);
  const auto model = estimate_background(img, BackgroundMethod::empirical, 0.0);
  std::vector<double> sum(k, 0.0), sum_sq(k, 0.0);
  std::vector<double> z(k);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    model.whiten(img.pixel(p), z);
    for (int c = 0; c < k; ++c) {
      sum[c] += z[c];
      sum_sq[c] += z[c] * z[c];
    }
  }
  const double n = static_cast<double>(img.pixel_count());
  for (int c = 0; c < k; ++c) {
    EXPECT_NEAR(sum[c] / n, 0.0, 1e-10);
    EXPECT_NEAR(sum_sq[c] / n, 1.0, 1e-9);
  }
}

TEST(Background, AffineInvariance) {
  const int k = 3;
  const ImageTensor img = random_image(25, 31, k, 21);
  Eigen::MatrixXd a(3, 3);
  a << 2.0, 0.5, -1.0, 0.1, -3.0, 0.2, 0.7, 0.0, 1.5;
  const Eigen::Vector3d b(100.0, -7.0, 0.25);
  std::vector<double> mapped(img.data().size());
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    const auto px = img.pixel(p);
    const Eigen::Vector3d y = a * Eigen::Vector3d(px[0], px[1], px[2]) + b;
    for (int c = 0; c < k; ++c) mapped[p * k + c] = y(c);
  }
  const ImageTensor img2(25, 31, k, mapped);
  const auto m1 = estimate_background(img, BackgroundMethod::empirical, 0.0);
  const auto m2 = estimate_background(img2, BackgroundMethod::empirical, 0.0);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    const double d1 = m1.mahalanobis_sq(img.pixel(p));
    const double d2 = m2.mahalanobis_sq(img2.pixel(p));
    EXPECT_LE(std::fabs(d1 - d2), 1e-8 * std::max(1.0, d1)) << "pixel " << p;
  }
}

TEST(Background, RobustModeIsDiagonalMedianMad) {
  // values 1..9 plus an outlier; median 5.5 over 10 values
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 1000};
  const ImageTensor img(2, 5, 1, v);
  const auto model = estimate_background(img, BackgroundMethod::robust, 0.0);
  EXPECT_DOUBLE_EQ(model.mean()(0), 5.5);
  // |v - 5.5| = 4.5 3.5 2.5 1.5 .5 .5 1.5 2.5 3.5 994.5 -> median 2.5
  EXPECT_NEAR(model.covariance()(0, 0), std::pow(1.4826 * 2.5, 2), 1e-12);
  EXPECT_EQ(model.method(), BackgroundMethod::robust);

  const ImageTensor img2 = random_image(20, 20, 2, 4);
  const auto m2 = estimate_background(img2, BackgroundMethod::robust);
  EXPECT_EQ(m2.covariance()(0, 1), 0.0);
  EXPECT_EQ(m2.covariance()(1, 0), 0.0);
}

TEST(Background, Preconditions) {
  EXPECT_THROW(estimate_background(ImageTensor(1, 2, 2, 0.0)), InvalidArgument);
  EXPECT_THROW(estimate_background(random_image(4, 4, 1, 1), BackgroundMethod::empirical, -1.0),
               InvalidArgument);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(BackgroundModel::from_parameters(mu, asym, 10.0), InvalidArgument);
  EXPECT_THROW(BackgroundModel::from_parameters(mu, Eigen::MatrixXd::Identity(3, 3), 10.0),
               DimensionError);
  EXPECT_THROW(BackgroundModel::from_parameters(mu, Eigen::MatrixXd::Identity(2, 2), 0.5),
               InvalidArgument);
}

TEST(Background, DerivedModels) {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(1);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(1, 1, 4.0);
  const auto model = BackgroundModel::from_parameters(mu, cov, 100.0);
  const auto scaled = model.with_scaled_covariance(0.25);
  const double x = 2.0;
  EXPECT_DOUBLE_EQ(model.mahalanobis_sq({&x, 1}), 1.0);
  EXPECT_DOUBLE_EQ(scaled.mahalanobis_sq({&x, 1}), 4.0);
  EXPECT_EQ(scaled.eta_test(), 100.0);
  EXPECT_EQ(model.with_eta_test(7.0).eta_test(), 7.0);
}

}  // namespace
}  // namespace acnfa
