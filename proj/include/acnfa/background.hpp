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

#pragma once

#include <span>

#include <Eigen/Core>

#include "acnfa/image.hpp"

namespace acnfa {

enum class BackgroundMethod {
  /// Sample mean and population (divisor N) covariance over all pixels.
  empirical,
  /// Per-channel median and squared 1.4826 * MAD on the diagonal. Off-diagonal
  /// terms are zero: MAD has no natural full-covariance counterpart.
  robust,
};

inline constexpr double kDefaultRidge = 1e-6;

/// Gaussian naive model of the background: mean, covariance and the number of
/// tests. Immutable once built, so one instance can serve any number of
/// concurrent map computations.
class BackgroundModel {
 public:
  /// Model with known parameters. The covariance is regularized with
  /// ridge * trace / K on the diagonal like an estimated one.
  static BackgroundModel from_parameters(const Eigen::VectorXd& mean,
                                         const Eigen::MatrixXd& covariance, double eta_test,
                                         double ridge = 0.0,
                                         BackgroundMethod method = BackgroundMethod::empirical);

  int channels() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  /// Covariance before regularization.
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& regularized_covariance() const { return regularized_; }
  /// Lower Cholesky factor L of the regularized covariance. Empty when degenerate.
  const Eigen::MatrixXd& whitener() const { return whitener_; }
  double eta_test() const { return eta_test_; }
  double ridge() const { return ridge_; }
  BackgroundMethod method() const { return method_; }
  bool degenerate() const { return degenerate_; }

  /// (x - mean)^T Sigma_reg^{-1} (x - mean), by forward substitution against L.
  double mahalanobis_sq(std::span<const double> pixel) const;

  /// z = L^{-1} (x - mean). `out` must hold channels() values.
  void whiten(std::span<const double> pixel, std::span<double> out) const;

  /// Same parameters, different number of tests.
  BackgroundModel with_eta_test(double eta_test) const;

  /// Covariance multiplied by `factor` (e.g. 1/4 per 2x2 block average of
  /// i.i.d. pixels); mean and eta_test unchanged.
  BackgroundModel with_scaled_covariance(double factor) const;

 private:
  BackgroundModel() = default;
  void factorize();
  void require_usable(std::size_t dim) const;

  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd regularized_;
  Eigen::MatrixXd whitener_;
  double eta_test_ = 1.0;
  double ridge_ = 0.0;
  BackgroundMethod method_ = BackgroundMethod::empirical;
  bool degenerate_ = false;
};

/// Estimates the per-image background model; eta_test is height * width.
/// A model that cannot be factorized (constant image, or rank deficient with
/// ridge 0) is returned flagged degenerate rather than throwing.
BackgroundModel estimate_background(const ImageTensor& image,
                                    BackgroundMethod method = BackgroundMethod::empirical,
                                    double ridge = kDefaultRidge);

}  // namespace acnfa
