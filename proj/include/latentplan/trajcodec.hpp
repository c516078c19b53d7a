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
// Two-stage trajectory codec: meters -> isotropically normalized trajectory
// -> PCA latent -> [-1, 1] normalized latent, plus the exact inverses.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <json.hpp>

#include "latentplan/common.hpp"
#include "latentplan/types.hpp"

namespace latentplan::codec {

/// Guard added under the whitening square root so near-zero component
/// variances cannot produce infinities.
inline constexpr double kWhitenEps = 1e-12;

/// Shared scalar min/max over both coordinate axes. One pair for x and y
/// keeps the normalization isotropic, preserving trajectory aspect ratio.
struct IsotropicStats {
  double min_xy = 0.0;
  double max_xy = 0.0;
};

inline IsotropicStats fit_isotropic_stats(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) {
    throw FitError("fit_isotropic_stats: empty trajectory collection");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& t : trajectories) {
    lo = std::min(lo, t.minCoeff());
    hi = std::max(hi, t.maxCoeff());
  }
  if (!(hi > lo)) {
    throw FitError("fit_isotropic_stats: degenerate range, max_xy == min_xy");
  }
  return {lo, hi};
}

inline double normalize_value(double x, const IsotropicStats& s) {
  return 2.0 * (x - s.min_xy) / (s.max_xy - s.min_xy) - 1.0;
}

inline double denormalize_value(double x, const IsotropicStats& s) {
  return (x + 1.0) * 0.5 * (s.max_xy - s.min_xy) + s.min_xy;
}

/// Affine map of every coordinate to roughly [-1, 1]. Out-of-range inputs are
/// passed through unclamped so the map stays exactly invertible.
inline Trajectory normalize_traj(const Trajectory& traj, const IsotropicStats& s) {
  const double scale = 2.0 / (s.max_xy - s.min_xy);
  return ((traj.array() - s.min_xy) * scale - 1.0).matrix();
}

inline Trajectory denormalize_traj(const Trajectory& traj, const IsotropicStats& s) {
  const double scale = 0.5 * (s.max_xy - s.min_xy);
  return ((traj.array() + 1.0) * scale + s.min_xy).matrix();
}

inline Eigen::VectorXd normalize_flat(const Eigen::VectorXd& v, const IsotropicStats& s) {
  const double scale = 2.0 / (s.max_xy - s.min_xy);
  return ((v.array() - s.min_xy) * scale - 1.0).matrix();
}

inline Eigen::VectorXd denormalize_flat(const Eigen::VectorXd& v, const IsotropicStats& s) {
  const double scale = 0.5 * (s.max_xy - s.min_xy);
  return ((v.array() + 1.0) * scale + s.min_xy).matrix();
}

/// PCA basis over flattened normalized trajectories. Columns of `components`
/// are orthonormal principal directions ordered by decreasing variance.
struct PcaBasis {
  Eigen::VectorXd mean;        // length 2H
  Eigen::MatrixXd components;  // 2H x d
  Eigen::VectorXd variances;   // d, non-increasing
  bool whiten = false;
  int d = 0;

  int input_dim() const { return static_cast<int>(mean.size()); }
};

/// Fit by thin SVD of the centered data matrix (rows are samples). The sign
/// of each component is fixed so its largest-magnitude entry is positive,
/// which makes the fit deterministic across runs.
inline PcaBasis fit_pca(const Eigen::MatrixXd& data, int d, bool whiten) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (d < 1 || d > p) {
    throw FitError("fit_pca: d=" + std::to_string(d) + " out of range [1, " +
                   std::to_string(p) + "]");
  }
  if (n <= d) {
    throw FitError("fit_pca: need more samples than components (N=" +
                   std::to_string(n) + ", d=" + std::to_string(d) + ")");
  }
  if (!data.allFinite()) {
    throw FitError("fit_pca: non-finite entries in data matrix");
  }

  PcaBasis basis;
  basis.d = d;
  basis.whiten = whiten;
  basis.mean = data.colwise().mean();
  Eigen::MatrixXd centered = data.rowwise() - basis.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double tol =
      static_cast<double>(std::max(n, p)) * std::numeric_limits<double>::epsilon() * sv(0);
  for (int i = 0; i < d; ++i) {
    if (!(sv(i) > tol)) {
      throw FitError("fit_pca: rank deficient below requested d, component " +
                     std::to_string(i) + " has negligible variance");
    }
  }

  basis.components = svd.matrixV().leftCols(d);
  basis.variances =
      sv.head(d).array().square() / static_cast<double>(n - 1);

  // Deterministic sign convention: largest |entry| of each component positive.
  for (int j = 0; j < d; ++j) {
    Eigen::Index argmax = 0;
    basis.components.col(j).cwiseAbs().maxCoeff(&argmax);
    if (basis.components(argmax, j) < 0.0) basis.components.col(j) *= -1.0;
  }
  return basis;
}

inline void check_dim(const PcaBasis& basis, Eigen::Index got, Eigen::Index want,
                      const char* what) {
  if (got != want) {
    throw DataError(std::string("pca ") + what + ": dimension mismatch, got " +
                    std::to_string(got) + ", expected " + std::to_string(want));
  }
  (void)basis;
}

/// Centered projection; with whitening each coordinate is scaled to unit
/// training variance.
inline Eigen::VectorXd project(const PcaBasis& basis, const Eigen::VectorXd& flat_norm) {
  check_dim(basis, flat_norm.size(), basis.mean.size(), "project");
  Eigen::VectorXd z = basis.components.transpose() * (flat_norm - basis.mean);
  if (basis.whiten) {
    z.array() /= (basis.variances.array() + kWhitenEps).sqrt();
  }
  return z;
}

inline Eigen::VectorXd reconstruct(const PcaBasis& basis, const Eigen::VectorXd& z) {
  check_dim(basis, z.size(), basis.d, "reconstruct");
  Eigen::VectorXd zu = z;
  if (basis.whiten) {
    zu.array() *= (basis.variances.array() + kWhitenEps).sqrt();
  }
  return basis.mean + basis.components * zu;
}

/// Column-per-sample batch projection.
inline Eigen::MatrixXd project_all(const PcaBasis& basis, const Eigen::MatrixXd& data) {
  check_dim(basis, data.cols(), basis.mean.size(), "project_all");
  Eigen::MatrixXd z =
      basis.components.transpose() *
      (data.transpose().colwise() - basis.mean).matrix();
  if (basis.whiten) {
    z.array().colwise() /= (basis.variances.array() + kWhitenEps).sqrt();
  }
  return z;  // d x N
}

/// Per-coordinate min/max over the training latents; maps them to [-1, 1].
struct LatentStats {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
};

inline LatentStats fit_latent_stats(const Eigen::MatrixXd& latents) {
  if (latents.cols() < 1) {
    throw FitError("fit_latent_stats: no latents");
  }
  LatentStats s;
  s.min = latents.rowwise().minCoeff();
  s.max = latents.rowwise().maxCoeff();
  for (Eigen::Index i = 0; i < s.min.size(); ++i) {
    if (!(s.max(i) > s.min(i))) {
      throw FitError("fit_latent_stats: degenerate latent coordinate " +
                     std::to_string(i) + " (max == min)");
    }
  }
  return s;
}

inline Eigen::VectorXd normalize_latent(const Eigen::VectorXd& z, const LatentStats& s) {
  if (z.size() != s.min.size()) {
    throw DataError("normalize_latent: dimension mismatch");
  }
  return (2.0 * (z - s.min).array() / (s.max - s.min).array() - 1.0).matrix();
}

inline Eigen::VectorXd denormalize_latent(const Eigen::VectorXd& z, const LatentStats& s) {
  if (z.size() != s.min.size()) {
    throw DataError("denormalize_latent: dimension mismatch");
  }
  return ((z.array() + 1.0) * 0.5 * (s.max - s.min).array() + s.min.array()).matrix();
}

/// The full fitted codec bundle.
struct TrajCodec {
  IsotropicStats iso;
  PcaBasis pca;
  LatentStats latent;
  int horizon = kDefaultHorizon;

  int latent_dim() const { return pca.d; }

  /// meters -> normalized latent in [-1, 1]^d.
  Eigen::VectorXd encode(const Trajectory& traj) const {
    return normalize_latent(project(pca, flatten_trajectory(normalize_traj(traj, iso))),
                            latent);
  }

  /// normalized latent -> meters; exact inverse of encode up to PCA truncation.
  Trajectory decode(const Eigen::VectorXd& z_norm) const {
    return denormalize_traj(
        unflatten_trajectory(reconstruct(pca, denormalize_latent(z_norm, latent))), iso);
  }
};

// ---------------------------------------------------------------------------
// Reports

struct VarianceReportRow {
  int k = 0;
  double cum_variance_ratio = 0.0;
  double mean_waypoint_error_m = 0.0;
};

/// Per-k explained variance and reconstruction fidelity. `basis` must be
/// fitted with the full range of components to report on; `data_norm` holds
/// flattened normalized trajectories (rows are samples).
inline std::vector<VarianceReportRow> variance_report(const PcaBasis& basis,
                                                      const Eigen::MatrixXd& data_norm,
                                                      const IsotropicStats& iso) {
  check_dim(basis, data_norm.cols(), basis.mean.size(), "variance_report");
  const Eigen::Index n = data_norm.rows();
  const int d = basis.d;
  const int horizon = basis.input_dim() / 2;
  const double meter_scale = 0.5 * (iso.max_xy - iso.min_xy);

  const Eigen::MatrixXd centered = data_norm.rowwise() - basis.mean.transpose();
  // Total variance is the trace of the sample covariance, independent of the
  // basis, so the ratio is exact even when d < 2H.
  const double total_var =
      centered.array().square().sum() / static_cast<double>(n - 1);
  const Eigen::MatrixXd coeffs = centered * basis.components;  // N x d

  std::vector<VarianceReportRow> rows(d);
  // residual starts as the centered data and loses one component per k.
  Eigen::MatrixXd residual = centered;
  double cum = 0.0;
  for (int k = 1; k <= d; ++k) {
    cum += basis.variances(k - 1);
    residual.noalias() -= coeffs.col(k - 1) * basis.components.col(k - 1).transpose();
    double err_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int w = 0; w < horizon; ++w) {
        const double ex = residual(i, 2 * w) * meter_scale;
        const double ey = residual(i, 2 * w + 1) * meter_scale;
        err_sum += std::sqrt(ex * ex + ey * ey);
      }
    }
    rows[k - 1].k = k;
    rows[k - 1].cum_variance_ratio = cum / total_var;
    rows[k - 1].mean_waypoint_error_m =
        err_sum / static_cast<double>(n * horizon);
  }
  return rows;
}

inline void write_variance_csv(const std::string& path,
                               const std::vector<VarianceReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "k,cum_variance_ratio,mean_waypoint_error_m\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.k << "," << r.cum_variance_ratio << "," << r.mean_waypoint_error_m
        << "\n";
  }
}

/// Latent weights paired with component indices (chart data for the
/// per-component decomposition plot). Weights equal project() exactly.
inline std::vector<std::pair<int, double>> component_weights(const PcaBasis& basis,
                                                             const Eigen::VectorXd& flat_norm) {
  const Eigen::VectorXd z = project(basis, flat_norm);
  std::vector<std::pair<int, double>> out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out[i] = {static_cast<int>(i), z(i)};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Codec file I/O. A single JSON document; numbers are fp64 decimal text.

inline nlohmann::ordered_json codec_to_json(const TrajCodec& c) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["horizon"] = c.horizon;
  j["isotropic"] = {{"min_xy", c.iso.min_xy}, {"max_xy", c.iso.max_xy}};
  nlohmann::ordered_json pca;
  pca["d"] = c.pca.d;
  pca["whiten"] = c.pca.whiten;
  pca["mean"] = std::vector<double>(c.pca.mean.data(), c.pca.mean.data() + c.pca.mean.size());
  std::vector<std::vector<double>> comps(c.pca.components.rows());
  for (Eigen::Index r = 0; r < c.pca.components.rows(); ++r) {
    comps[r].resize(c.pca.components.cols());
    for (Eigen::Index col = 0; col < c.pca.components.cols(); ++col) {
      comps[r][col] = c.pca.components(r, col);
    }
  }
  pca["components"] = comps;
  pca["variances"] = std::vector<double>(c.pca.variances.data(),
                                         c.pca.variances.data() + c.pca.variances.size());
  j["pca"] = pca;
  j["latent"] = {
      {"min", std::vector<double>(c.latent.min.data(), c.latent.min.data() + c.latent.min.size())},
      {"max", std::vector<double>(c.latent.max.data(), c.latent.max.data() + c.latent.max.size())}};
  return j;
}

inline TrajCodec codec_from_json(const nlohmann::json& j) {
  TrajCodec c;
  try {
    c.horizon = j.at("horizon").get<int>();
    c.iso.min_xy = j.at("isotropic").at("min_xy").get<double>();
    c.iso.max_xy = j.at("isotropic").at("max_xy").get<double>();
    const auto& pca = j.at("pca");
    c.pca.d = pca.at("d").get<int>();
    c.pca.whiten = pca.at("whiten").get<bool>();
    const auto mean = pca.at("mean").get<std::vector<double>>();
    c.pca.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
    const auto comps = pca.at("components").get<std::vector<std::vector<double>>>();
    c.pca.components.resize(comps.size(), c.pca.d);
    for (size_t r = 0; r < comps.size(); ++r) {
      if (static_cast<int>(comps[r].size()) != c.pca.d) {
        throw DataError("codec: components row " + std::to_string(r) + " has wrong width");
      }
      for (int col = 0; col < c.pca.d; ++col) c.pca.components(r, col) = comps[r][col];
    }
    const auto vars = pca.at("variances").get<std::vector<double>>();
    c.pca.variances = Eigen::Map<const Eigen::VectorXd>(vars.data(), vars.size());
    const auto lmin = j.at("latent").at("min").get<std::vector<double>>();
    const auto lmax = j.at("latent").at("max").get<std::vector<double>>();
    c.latent.min = Eigen::Map<const Eigen::VectorXd>(lmin.data(), lmin.size());
    c.latent.max = Eigen::Map<const Eigen::VectorXd>(lmax.data(), lmax.size());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("codec: malformed JSON document: ") + e.what());
  }
  return c;
}

inline void save_codec(const TrajCodec& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << codec_to_json(c).dump(2) << "\n";
}

inline TrajCodec load_codec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open codec file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("codec file '" + path + "': " + e.what());
  }
  return codec_from_json(j);
}

/// FNV-1a over the serialized codec; stored in checkpoints so evaluation can
/// refuse model/codec pairs that were not fitted together.
inline std::uint64_t codec_fingerprint(const TrajCodec& c) {
  const std::string s = codec_to_json(c).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace latentplan::codec
