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

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentplan/common.hpp"

namespace latentplan {

// Timing and shape constants shared across the pipeline. Recording rate is
// 10 Hz; the prediction horizon is 8 s (80 waypoints) given a 1 s history
// (11 waypoints including the prediction-time pose).
inline constexpr double kDt = 0.1;
inline constexpr int kDefaultHorizon = 80;
inline constexpr int kHistoryLen = 11;
inline constexpr int kMapPolylineLen = 10;
inline constexpr int kSparseRouteLen = 5;
inline constexpr int kAgentFeatureDim = 11;
inline constexpr int kDefaultEgoFeatureDim = 6;  // x, y, vx, vy, cos_yaw, sin_yaw

/// A planar trajectory: H rows of (x, y) in meters, ego frame.
using Trajectory = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// One map polyline: exactly kMapPolylineLen rows of (x, y) in meters.
using MapPolyline = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Flatten an H x 2 trajectory to a 2H vector laid out (x0, y0, x1, y1, ...).
/// This layout is the one stored in codec files.
inline Eigen::VectorXd flatten_trajectory(const Trajectory& traj) {
  Eigen::VectorXd v(traj.rows() * 2);
  for (Eigen::Index i = 0; i < traj.rows(); ++i) {
    v(2 * i) = traj(i, 0);
    v(2 * i + 1) = traj(i, 1);
  }
  return v;
}

inline Trajectory unflatten_trajectory(const Eigen::VectorXd& v) {
  if (v.size() % 2 != 0) {
    throw DataError("unflatten_trajectory: vector length " +
                    std::to_string(v.size()) + " is odd");
  }
  Trajectory traj(v.size() / 2, 2);
  for (Eigen::Index i = 0; i < traj.rows(); ++i) {
    traj(i, 0) = v(2 * i);
    traj(i, 1) = v(2 * i + 1);
  }
  return traj;
}

/// One surrounding agent at the prediction time, ego frame. Feature order is
/// fixed: [x, y, vx, vy, cos_yaw, sin_yaw, length, width, is_vehicle,
/// is_pedestrian, is_parked].
struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double cos_yaw = 1.0;
  double sin_yaw = 0.0;
  double length = 0.0;
  double width = 0.0;
  double is_vehicle = 0.0;
  double is_pedestrian = 0.0;
  double is_parked = 0.0;

  Eigen::VectorXd to_features() const {
    Eigen::VectorXd f(kAgentFeatureDim);
    f << x, y, vx, vy, cos_yaw, sin_yaw, length, width, is_vehicle,
        is_pedestrian, is_parked;
    return f;
  }

  static AgentState from_features(const Eigen::VectorXd& f) {
    if (f.size() != kAgentFeatureDim) {
      throw DataError("AgentState: expected " +
                      std::to_string(kAgentFeatureDim) + " features, got " +
                      std::to_string(f.size()));
    }
    AgentState a;
    a.x = f(0);
    a.y = f(1);
    a.vx = f(2);
    a.vy = f(3);
    a.cos_yaw = f(4);
    a.sin_yaw = f(5);
    a.length = f(6);
    a.width = f(7);
    a.is_vehicle = f(8);
    a.is_pedestrian = f(9);
    a.is_parked = f(10);
    return a;
  }
};

enum class GoalVariant { kNone, kEndpoint, kSparseRoute };

inline std::string to_string(GoalVariant v) {
  switch (v) {
    case GoalVariant::kNone: return "none";
    case GoalVariant::kEndpoint: return "endpoint";
    case GoalVariant::kSparseRoute: return "sparse";
  }
  throw ConfigError("unknown goal variant");
}

inline GoalVariant goal_variant_from_string(const std::string& s) {
  if (s == "none") return GoalVariant::kNone;
  if (s == "endpoint") return GoalVariant::kEndpoint;
  if (s == "sparse") return GoalVariant::kSparseRoute;
  throw ConfigError("unknown goal variant '" + s +
                    "' (expected none|endpoint|sparse)");
}

/// Strategic goal in the ego frame. None carries no waypoints, Endpoint one,
/// SparseRoute exactly kSparseRouteLen.
struct Goal {
  GoalVariant variant = GoalVariant::kNone;
  std::vector<Eigen::Vector2d> waypoints;
};

/// Kind of procedurally generated maneuver.
enum class ScenarioKind { kStraight, kLeftTurn, kRightTurn, kLaneChange, kStopAndGo };

inline const std::vector<std::pair<ScenarioKind, std::string>>& scenario_kind_names() {
  static const std::vector<std::pair<ScenarioKind, std::string>> names = {
      {ScenarioKind::kStraight, "straight"},
      {ScenarioKind::kLeftTurn, "left_turn"},
      {ScenarioKind::kRightTurn, "right_turn"},
      {ScenarioKind::kLaneChange, "lane_change"},
      {ScenarioKind::kStopAndGo, "stop_and_go"}};
  return names;
}

inline std::string to_string(ScenarioKind k) {
  for (const auto& [kind, name] : scenario_kind_names()) {
    if (kind == k) return name;
  }
  throw ConfigError("unknown scenario kind");
}

inline ScenarioKind scenario_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : scenario_kind_names()) {
    if (name == s) return kind;
  }
  throw ConfigError("unsupported scenario kind '" + s + "'");
}

/// One prediction instance: conditioning context plus the ground-truth
/// future, everything in the ego frame at the prediction time.
struct ScenarioSample {
  /// kHistoryLen x F feature rows, oldest first; the last row is the
  /// prediction-time state, whose position is the origin.
  Eigen::MatrixXd ego_history;
  std::vector<AgentState> agents;
  std::vector<MapPolyline> map;
  Goal goal;
  Trajectory future;
  /// Validity of each timestep over the full track (history then future).
  std::vector<bool> validity;
  std::string kind;
};

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

}  // namespace latentplan
