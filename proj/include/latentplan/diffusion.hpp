// Copyright 2026 The latentplan Authors
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
//
// Cosine noise schedule, forward (noising) process, and the deterministic
// DDIM reverse process.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentplan/common.hpp"
#include "latentplan/rng.hpp"

namespace latentplan::diffusion {

/// Cumulative signal retention per step. alpha_bar[0] == 1 exactly; values
/// are strictly decreasing and stay in (0, 1].
struct NoiseSchedule {
  int T = 0;
  Eigen::VectorXd alpha_bar;  // length T + 1

  double at(int t) const {
    if (t < 0 || t > T) {
      throw ConfigError("schedule: step " + std::to_string(t) +
                        " out of range [0, " + std::to_string(T) + "]");
    }
    return alpha_bar(t);
  }
};

/// Squared-cosine schedule: alpha_bar(t) = f(t)/f(0) with
/// f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2). Per-step betas are clipped to
/// 0.999 and alpha_bar re-accumulated from the clipped values so it never
/// reaches exact zero.
inline NoiseSchedule cosine_schedule(int T, double s = 0.008) {
  if (T < 1) throw ConfigError("cosine_schedule: T must be >= 1");
  if (!(s > 0.0)) throw ConfigError("cosine_schedule: offset s must be > 0");

  auto f = [&](double t) {
    const double u = ((t / T + s) / (1.0 + s)) * M_PI / 2.0;
    const double c = std::cos(u);
    return c * c;
  };

  NoiseSchedule sched;
  sched.T = T;
  sched.alpha_bar.resize(T + 1);
  sched.alpha_bar(0) = 1.0;
  const double f0 = f(0.0);
  double prev_raw = 1.0;
  for (int t = 1; t <= T; ++t) {
    const double raw = f(static_cast<double>(t)) / f0;
    double beta = 1.0 - raw / prev_raw;
    beta = std::min(beta, 0.999);
    sched.alpha_bar(t) = sched.alpha_bar(t - 1) * (1.0 - beta);
    prev_raw = raw;
  }
  return sched;
}

/// Forward process: z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps. t = 0 is
/// the identity edge (abar = 1).
inline Eigen::VectorXd q_sample(const Eigen::VectorXd& z0, int t,
                                const Eigen::VectorXd& eps, const NoiseSchedule& sched) {
  if (z0.size() != eps.size()) {
    throw DataError("q_sample: z0 and eps dimension mismatch");
  }
  const double ab = sched.at(t);
  return std::sqrt(ab) * z0 + std::sqrt(1.0 - ab) * eps;
}

/// Closed-form inversion of the forward process given a noise estimate.
inline Eigen::VectorXd predict_z0(const Eigen::VectorXd& z_t, const Eigen::VectorXd& eps_hat,
                                  int t, const NoiseSchedule& sched) {
  if (z_t.size() != eps_hat.size()) {
    throw DataError("predict_z0: z_t and eps_hat dimension mismatch");
  }
  const double ab = sched.at(t);
  return (z_t - std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(ab);
}

/// One deterministic DDIM update from step t to t_prev < t.
inline Eigen::VectorXd ddim_step(const Eigen::VectorXd& z_t, const Eigen::VectorXd& eps_hat,
                                 int t, int t_prev, const NoiseSchedule& sched) {
  if (!(0 <= t_prev && t_prev < t && t <= sched.T)) {
    throw ConfigError("ddim_step: require 0 <= t_prev < t <= T, got t=" +
                      std::to_string(t) + ", t_prev=" + std::to_string(t_prev));
  }
  const Eigen::VectorXd z0_hat = predict_z0(z_t, eps_hat, t, sched);
  const double ab_prev = sched.at(t_prev);
  return std::sqrt(ab_prev) * z0_hat + std::sqrt(1.0 - ab_prev) * eps_hat;
}

/// Uniformly strided descending steps from the T end of {T, ..., 1}; the
/// sampler appends the final transition to step 0.
inline std::vector<int> timestep_subsequence(int T, int N) {
  if (N < 1 || N > T) {
    throw ConfigError("timestep_subsequence: need 1 <= N <= T, got N=" +
                      std::to_string(N) + ", T=" + std::to_string(T));
  }
  const int stride = T / N;
  std::vector<int> steps(N);
  for (int i = 0; i < N; ++i) steps[i] = T - i * stride;
  return steps;
}

/// Noise predictor for one chain; context is bound into the callable.
using DenoiserFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& z_t, int t)>;

/// Draws K independent chains, each from its own substream of `seed`, and
/// runs the deterministic reverse process for N steps. Returns d x K clean
/// latents. Chain i depends only on (seed, i), so changing K never changes
/// the output of an existing chain.
inline Eigen::MatrixXd ddim_sample(const DenoiserFn& denoiser, int latent_dim, int N,
                                   int K, std::uint64_t seed, const NoiseSchedule& sched) {
  if (K < 1) throw ConfigError("ddim_sample: K must be >= 1");
  const std::vector<int> steps = timestep_subsequence(sched.T, N);

  Eigen::MatrixXd out(latent_dim, K);
  for (int k = 0; k < K; ++k) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
    Eigen::VectorXd z = rng.normal_vector(latent_dim);
    for (size_t i = 0; i < steps.size(); ++i) {
      const int t = steps[i];
      const int t_prev = (i + 1 < steps.size()) ? steps[i + 1] : 0;
      Eigen::VectorXd eps_hat = denoiser(z, t);
      if (eps_hat.size() != latent_dim) {
        throw DataError("ddim_sample: denoiser returned dimension " +
                        std::to_string(eps_hat.size()) + ", expected " +
                        std::to_string(latent_dim));
      }
      z = ddim_step(z, eps_hat, t, t_prev, sched);
    }
    out.col(k) = z;
  }
  return out;
}

}  // namespace latentplan::diffusion
