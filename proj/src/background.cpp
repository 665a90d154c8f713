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

#include "acnfa/background.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "acnfa/error.hpp"

namespace acnfa {
namespace {

constexpr double kMadToSigma = 1.4826;

double median_of(std::vector<double>& values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

BackgroundModel BackgroundModel::from_parameters(const Eigen::VectorXd& mean,
                                                 const Eigen::MatrixXd& covariance,
                                                 double eta_test, double ridge,
                                                 BackgroundMethod method) {
  const auto k = mean.size();
  if (k < 1) throw InvalidArgument("background model needs at least one channel");
  if (covariance.rows() != k || covariance.cols() != k) {
    throw DimensionError("covariance must be " + std::to_string(k) + "x" + std::to_string(k));
  }
  if (!mean.allFinite() || !covariance.allFinite()) {
    throw InvalidArgument("background parameters must be finite");
  }
  const double magnitude = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10 * magnitude) {
    throw InvalidArgument("covariance must be symmetric");
  }
  if (!(eta_test >= 1.0) || !std::isfinite(eta_test)) {
    throw InvalidArgument("eta_test must be >= 1");
  }
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw InvalidArgument("ridge must be >= 0");

  BackgroundModel model;
  model.mean_ = mean;
  model.covariance_ = 0.5 * (covariance + covariance.transpose());
  model.eta_test_ = eta_test;
  model.ridge_ = ridge;
  model.method_ = method;
  model.factorize();
  return model;
}

void BackgroundModel::factorize() {
  const auto k = mean_.size();
  const double lambda = ridge_ * covariance_.trace() / static_cast<double>(k);
  regularized_ = covariance_;
  regularized_.diagonal().array() += lambda;
  degenerate_ = true;
  whitener_.resize(0, 0);
  if (!(covariance_.trace() > 0.0)) return;
  Eigen::LLT<Eigen::MatrixXd> llt(regularized_);
  if (llt.info() != Eigen::Success) return;
  Eigen::MatrixXd lower = llt.matrixL();
  // LLT only rejects non-positive pivots. A rank-deficient matrix usually
  // factorizes with pivots at rounding level (~1e-8 relative), so those count
  // as singular too: condition numbers above ~1e14 are treated as degenerate.
  const double scale = std::sqrt(regularized_.diagonal().maxCoeff());
  if (!(lower.diagonal().minCoeff() > scale * 1e-7)) return;
  whitener_ = std::move(lower);
  degenerate_ = false;
}

void BackgroundModel::require_usable(std::size_t dim) const {
  if (degenerate_) {
    throw DegenerateModelError("background covariance is singular (degenerate image?)");
  }
  if (dim != static_cast<std::size_t>(mean_.size())) {
    throw DimensionError("pixel has " + std::to_string(dim) + " channels, model has " +
                         std::to_string(mean_.size()));
  }
}

void BackgroundModel::whiten(std::span<const double> pixel, std::span<double> out) const {
  require_usable(pixel.size());
  if (out.size() < pixel.size()) throw DimensionError("whiten: output buffer too small");
  const int k = channels();
  for (int i = 0; i < k; ++i) {
    double v = pixel[static_cast<std::size_t>(i)] - mean_[i];
    for (int j = 0; j < i; ++j) v -= whitener_(i, j) * out[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = v / whitener_(i, i);
  }
}

double BackgroundModel::mahalanobis_sq(std::span<const double> pixel) const {
  require_usable(pixel.size());
  const int k = channels();
  if (k == 1) {
    const double z = (pixel[0] - mean_[0]) / whitener_(0, 0);
    return z * z;
  }
  double stack[8];
  std::vector<double> heap;
  std::span<double> z;
  if (k <= 8) {
    z = std::span<double>(stack, static_cast<std::size_t>(k));
  } else {
    heap.resize(static_cast<std::size_t>(k));
    z = heap;
  }
  whiten(pixel, z);
  double sum = 0.0;
  for (double v : z) sum += v * v;
  return sum;
}

BackgroundModel BackgroundModel::with_eta_test(double eta_test) const {
  if (!(eta_test >= 1.0) || !std::isfinite(eta_test)) {
    throw InvalidArgument("eta_test must be >= 1");
  }
  BackgroundModel copy = *this;
  copy.eta_test_ = eta_test;
  return copy;
}

BackgroundModel BackgroundModel::with_scaled_covariance(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw InvalidArgument("covariance scale factor must be positive");
  }
  BackgroundModel copy = *this;
  copy.covariance_ *= factor;
  copy.factorize();
  return copy;
}

BackgroundModel estimate_background(const ImageTensor& image, BackgroundMethod method,
                                    double ridge) {
  if (image.empty()) throw InvalidArgument("estimate_background: empty image");
  const int k = image.channels();
  const std::size_t n = image.pixel_count();
  if (n < static_cast<std::size_t>(k) + 1) {
    throw InvalidArgument("estimate_background: need at least K+1 pixels");
  }
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw InvalidArgument("ridge must be >= 0");

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(k, k);
  const auto values = image.data();

  if (method == BackgroundMethod::empirical) {
    for (std::size_t p = 0; p < n; ++p) {
      for (int c = 0; c < k; ++c) mean[c] += values[p * static_cast<std::size_t>(k) + c];
    }
    mean /= static_cast<double>(n);
    // Two-pass: centered products keep the estimate exact for large offsets.
    Eigen::VectorXd centered(k);
    for (std::size_t p = 0; p < n; ++p) {
      for (int c = 0; c < k; ++c) {
        centered[c] = values[p * static_cast<std::size_t>(k) + c] - mean[c];
      }
      cov.selfadjointView<Eigen::Lower>().rankUpdate(centered);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(n);
  } else {
    std::vector<double> channel(n);
    for (int c = 0; c < k; ++c) {
      for (std::size_t p = 0; p < n; ++p) channel[p] = values[p * static_cast<std::size_t>(k) + c];
      const double med = median_of(channel);
      for (double& v : channel) v = std::fabs(v - med);
      const double sigma = kMadToSigma * median_of(channel);
      mean[c] = med;
      cov(c, c) = sigma * sigma;
    }
  }
  return BackgroundModel::from_parameters(mean, cov, static_cast<double>(n), ridge, method);
}

}  // namespace acnfa
