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
// Procedural driving scenarios over five maneuver families, plus the two
// scenario-level curation filters and JSONL dataset emission.
//
// Multi-modality exists by construction: all intersection kinds (straight,
// left_turn, right_turn) share an identical-looking constant-speed approach
// history and a map containing boundary pairs for all three exits, so the
// context alone never reveals which exit the expert takes. Maneuvers begin
// after the prediction time.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <json.hpp>

#include "latentplan/common.hpp"
#include "latentplan/rng.hpp"
#include "latentplan/types.hpp"

namespace latentplan::scenegen {

struct GeneratorParams {
  int horizon = kDefaultHorizon;
  int history_len = kHistoryLen;
  double dt = kDt;
  int ego_feature_dim = kDefaultEgoFeatureDim;

  // Approach speed range shared by the intersection kinds and lane_change.
  double v_min = 5.0;
  double v_max = 12.0;
  // stop_and_go approaches slower so a full stop fits in the horizon.
  double stop_v_min = 4.0;
  double stop_v_max = 8.0;

  // Turn geometry: total heading change range and speed held through the arc.
  double turn_angle_min_deg = 50.0;
  double turn_angle_max_deg = 100.0;
  double turn_speed_min = 3.0;
  double turn_speed_max = 6.0;

  double yaw_rate_limit = 0.8;  // rad/s, on the underlying heading profile
  double accel_limit = 3.0;     // m/s^2; profiles stay within 90% of this

  // Half-width of the uniform position jitter applied to emitted waypoints.
  double noise_scale = 0.02;

  double lane_half_width = 1.75;
  double lane_change_offset = 3.5;

  int min_agents = 2;
  int max_agents = 8;
  int max_map_polylines = 8;
};

namespace detail {

/// Velocity state per track index; positions come from trapezoidal
/// integration so per-step displacement never exceeds v_max * dt.
struct MotionProfile {
  std::vector<double> speed;    // m/s at each index
  std::vector<double> heading;  // rad at each index
};

inline Eigen::Vector2d velocity_at(const MotionProfile& prof, int i) {
  return {prof.speed[i] * std::cos(prof.heading[i]),
          prof.speed[i] * std::sin(prof.heading[i])};
}

/// Integrate positions with the prediction-time index pinned at the origin.
inline std::vector<Eigen::Vector2d> integrate_positions(const MotionProfile& prof,
                                                        int pred_index, double dt) {
  const int n = static_cast<int>(prof.speed.size());
  std::vector<Eigen::Vector2d> pos(n);
  pos[pred_index] = Eigen::Vector2d::Zero();
  for (int i = pred_index; i + 1 < n; ++i) {
    pos[i + 1] = pos[i] + dt * 0.5 * (velocity_at(prof, i) + velocity_at(prof, i + 1));
  }
  for (int i = pred_index; i > 0; --i) {
    pos[i - 1] = pos[i] - dt * 0.5 * (velocity_at(prof, i - 1) + velocity_at(prof, i));
  }
  return pos;
}

inline double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

inline double smoothstep_deriv(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 6.0 * u * (1.0 - u);
}

/// Arc-length uniform resampling of a polyline to n points.
inline MapPolyline resample_polyline(const std::vector<Eigen::Vector2d>& pts, int n) {
  std::vector<Eigen::Vector2d> clean;
  clean.reserve(pts.size());
  for (const auto& p : pts) {
    if (clean.empty() || (p - clean.back()).norm() > 1e-9) clean.push_back(p);
  }
  if (clean.size() == 1) clean.push_back(clean[0] + Eigen::Vector2d(1e-6, 0.0));

  std::vector<double> arc(clean.size(), 0.0);
  for (size_t i = 1; i < clean.size(); ++i) {
    arc[i] = arc[i - 1] + (clean[i] - clean[i - 1]).norm();
  }
  const double total = arc.back();
  MapPolyline out(n, 2);
  size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double target = total * k / (n - 1);
    while (seg + 2 < clean.size() && arc[seg + 1] < target) ++seg;
    const double span = arc[seg + 1] - arc[seg];
    const double u = span > 0.0 ? (target - arc[seg]) / span : 0.0;
    const Eigen::Vector2d p = clean[seg] + u * (clean[seg + 1] - clean[seg]);
    out(k, 0) = p.x();
    out(k, 1) = p.y();
  }
  return out;
}

/// Lateral offset of a centerline (positive = left of travel direction).
inline std::vector<Eigen::Vector2d> offset_polyline(const std::vector<Eigen::Vector2d>& pts,
                                                    double lateral) {
  std::vector<Eigen::Vector2d> out(pts.size());
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) {
    Eigen::Vector2d dir = Eigen::Vector2d::Zero();
    if (i > 0) dir += (pts[i] - pts[i - 1]).normalized();
    if (i + 1 < n) dir += (pts[i + 1] - pts[i]).normalized();
    if (dir.norm() < 1e-12) dir = Eigen::Vector2d(1.0, 0.0);
    dir.normalize();
    const Eigen::Vector2d normal(-dir.y(), dir.x());
    out[i] = pts[i] + lateral * normal;
  }
  return out;
}

struct TurnDraws {
  double t_entry;
  double delta;   // signed total heading change, rad
  double t_turn;
  double v_turn;
  double v_exit;
};

inline TurnDraws draw_turn(Rng& rng, double v0, double sign, const GeneratorParams& p) {
  TurnDraws d;
  d.t_entry = rng.uniform(1.5, 3.0);
  d.delta = sign * rng.uniform(p.turn_angle_min_deg, p.turn_angle_max_deg) * M_PI / 180.0;
  const double usable_accel = 0.9 * p.accel_limit;
  const double min_dur = std::abs(d.delta) / (0.9 * p.yaw_rate_limit);
  d.t_turn = rng.uniform(std::max(2.5, min_dur), std::max(4.5, min_dur + 0.5));
  d.v_turn = std::max(rng.uniform(p.turn_speed_min, p.turn_speed_max),
                      v0 - usable_accel * d.t_entry);
  const double accel_window = std::max(0.0, 8.0 - d.t_entry - d.t_turn);
  d.v_exit = std::min(rng.uniform(d.v_turn, p.v_max), d.v_turn + usable_accel * accel_window);
  return d;
}

/// Future speed/heading at time tf for a turn maneuver.
inline void turn_state(const TurnDraws& d, double tf, double v0, double usable_accel,
                       double* speed, double* heading) {
  if (tf <= d.t_entry) {
    *speed = v0 + (d.v_turn - v0) * tf / d.t_entry;
    *heading = 0.0;
  } else if (tf <= d.t_entry + d.t_turn) {
    *speed = d.v_turn;
    *heading = d.delta * (tf - d.t_entry) / d.t_turn;
  } else {
    *speed = std::min(d.v_exit, d.v_turn + usable_accel * (tf - d.t_entry - d.t_turn));
    *heading = d.delta;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Goal derivation

/// Endpoint = final waypoint; SparseRoute = 5 waypoints evenly spaced over
/// the future, ending at the final step: idx_k = ((k+1)*H)/5 - 1.
inline Goal derive_goal(const Trajectory& future, GoalVariant variant) {
  Goal g;
  g.variant = variant;
  const int h = static_cast<int>(future.rows());
  switch (variant) {
    case GoalVariant::kNone:
      break;
    case GoalVariant::kEndpoint:
      g.waypoints.push_back(future.row(h - 1).transpose());
      break;
    case GoalVariant::kSparseRoute: {
      if (h < kSparseRouteLen) {
        throw ConfigError("derive_goal: horizon too short for a sparse route");
      }
      for (int k = 0; k < kSparseRouteLen; ++k) {
        const int idx = ((k + 1) * h) / kSparseRouteLen - 1;
        g.waypoints.push_back(future.row(idx).transpose());
      }
      break;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Curation filters

/// Rejects near-stationary tracks: keep only if some valid waypoint lies
/// >= 1.0 m from the first valid one. Tracks with fewer than two valid
/// waypoints are degenerate and rejected.
inline bool static_filter(const Trajectory& track, const std::vector<bool>& validity) {
  if (static_cast<size_t>(track.rows()) != validity.size()) {
    throw DataError("static_filter: track/validity length mismatch");
  }
  int first_valid = -1;
  int valid_count = 0;
  double max_disp = 0.0;
  for (Eigen::Index i = 0; i < track.rows(); ++i) {
    if (!validity[i]) continue;
    ++valid_count;
    if (first_valid < 0) {
      first_valid = static_cast<int>(i);
      continue;
    }
    const double dx = track(i, 0) - track(first_valid, 0);
    const double dy = track(i, 1) - track(first_valid, 1);
    max_disp = std::max(max_disp, std::sqrt(dx * dx + dy * dy));
  }
  if (valid_count < 2) return false;
  return max_disp >= 1.0;
}

/// Rejects tracks with a gap of more than 4 consecutive invalid timesteps.
inline bool quality_filter(const std::vector<bool>& validity) {
  if (validity.empty()) throw DataError("quality_filter: empty validity mask");
  int run = 0;
  for (bool v : validity) {
    run = v ? 0 : run + 1;
    if (run > 4) return false;
  }
  return true;
}

/// History positions followed by future waypoints, as one track.
inline Trajectory full_track(const ScenarioSample& s) {
  Trajectory t(s.ego_history.rows() + s.future.rows(), 2);
  t.topRows(s.ego_history.rows()) = s.ego_history.leftCols(2);
  t.bottomRows(s.future.rows()) = s.future;
  return t;
}

// ---------------------------------------------------------------------------
// Scenario generation

inline ScenarioSample generate_scenario(ScenarioKind kind, std::uint64_t seed,
                                        const GeneratorParams& params,
                                        GoalVariant goal_variant = GoalVariant::kSparseRoute) {
  const int H = params.horizon;
  const int hist = params.history_len;
  const int pred = hist - 1;
  const int total = hist + H;
  const double dt = params.dt;
  const double usable_accel = 0.9 * params.accel_limit;

  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(kind)));

  const bool is_stop = kind == ScenarioKind::kStopAndGo;
  const double v0 = is_stop ? rng.uniform(params.stop_v_min, params.stop_v_max)
                            : rng.uniform(params.v_min, params.v_max);

  // --- maneuver profile -----------------------------------------------------
  detail::MotionProfile prof;
  prof.speed.assign(total, v0);
  prof.heading.assign(total, 0.0);

  detail::TurnDraws turn{};
  double lc_side = 0.0, lc_start = 0.0, lc_dur = 0.0;
  double virtual_entry = 0.0;  // intersection anchor for the straight kind

  switch (kind) {
    case ScenarioKind::kStraight:
      virtual_entry = rng.uniform(1.5, 3.0);
      break;
    case ScenarioKind::kLeftTurn:
    case ScenarioKind::kRightTurn: {
      const double sign = kind == ScenarioKind::kLeftTurn ? 1.0 : -1.0;
      turn = detail::draw_turn(rng, v0, sign, params);
      for (int j = 1; j <= H; ++j) {
        detail::turn_state(turn, j * dt, v0, usable_accel, &prof.speed[pred + j],
                           &prof.heading[pred + j]);
      }
      break;
    }
    case ScenarioKind::kLaneChange: {
      lc_side = rng.uniform() < 0.5 ? 1.0 : -1.0;
      lc_start = rng.uniform(1.0, 3.0);
      lc_dur = rng.uniform(2.5, 4.0);
      for (int j = 1; j <= H; ++j) {
        const double u = (j * dt - lc_start) / lc_dur;
        const double vy =
            lc_side * params.lane_change_offset * detail::smoothstep_deriv(u) / lc_dur;
        const double vx = std::sqrt(std::max(1e-6, v0 * v0 - vy * vy));
        prof.speed[pred + j] = v0;
        prof.heading[pred + j] = std::atan2(vy, vx);
      }
      break;
    }
    case ScenarioKind::kStopAndGo: {
      const double t_bs = rng.uniform(0.8, 1.8);
      const double a_dec = std::max(rng.uniform(1.8, usable_accel), v0 / (5.2 - t_bs));
      const double stop_dur = rng.uniform(0.8, 2.0);
      const double t_resume = t_bs + v0 / a_dec + stop_dur;
      const double a_acc = rng.uniform(1.8, usable_accel);
      const double v_target = rng.uniform(3.0, 7.0);
      for (int j = 1; j <= H; ++j) {
        const double tf = j * dt;
        double v;
        if (tf <= t_bs) {
          v = v0;
        } else if (tf <= t_resume - stop_dur) {
          v = std::max(0.0, v0 - a_dec * (tf - t_bs));
        } else if (tf <= t_resume) {
          v = 0.0;
        } else {
          v = std::min(v_target, a_acc * (tf - t_resume));
        }
        prof.speed[pred + j] = v;
      }
      break;
    }
  }

  const std::vector<Eigen::Vector2d> center = detail::integrate_positions(prof, pred, dt);

  // --- map ------------------------------------------------------------------
  std::vector<MapPolyline> map_polylines;
  const bool intersection_kind = kind == ScenarioKind::kStraight ||
                                 kind == ScenarioKind::kLeftTurn ||
                                 kind == ScenarioKind::kRightTurn;
  if (intersection_kind) {
    const double t_entry = kind == ScenarioKind::kStraight ? virtual_entry : turn.t_entry;
    const int entry_idx = pred + static_cast<int>(std::lround(t_entry / dt));
    const double tail = 2.0;  // extend exits past the horizon for context

    // Approach shared by all three exits: centerline up to the entry index.
    std::vector<Eigen::Vector2d> approach(center.begin(), center.begin() + entry_idx + 1);

    // Expert exit centerline: the rest of the track plus a straight tail.
    auto expert_exit = approach;
    expert_exit.insert(expert_exit.end(), center.begin() + entry_idx + 1, center.end());
    {
      const Eigen::Vector2d v = detail::velocity_at(prof, total - 1);
      const Eigen::Vector2d dir =
          v.norm() > 1e-9 ? Eigen::Vector2d(v.normalized()) : Eigen::Vector2d(1.0, 0.0);
      const double v_end = std::max(prof.speed[total - 1], 3.0);
      for (int j = 1; j <= static_cast<int>(tail / dt); ++j) {
        expert_exit.push_back(center.back() + dir * (v_end * j * dt));
      }
    }

    // Alternate exits drawn from the same maneuver distributions.
    auto make_alt = [&](double sign) {
      detail::TurnDraws alt = detail::draw_turn(rng, v0, sign, params);
      alt.t_entry = t_entry;  // anchor all exits at the shared entry point
      std::vector<Eigen::Vector2d> path = approach;
      detail::MotionProfile ap;
      const double sim_time = (H * dt - t_entry) + tail;
      const int steps = static_cast<int>(sim_time / dt);
      ap.speed.assign(steps + 1, v0);
      ap.heading.assign(steps + 1, 0.0);
      for (int j = 1; j <= steps; ++j) {
        detail::turn_state(alt, t_entry + j * dt, v0, usable_accel, &ap.speed[j],
                           &ap.heading[j]);
      }
      Eigen::Vector2d pos = path.back();
      for (int j = 0; j + 1 <= steps; ++j) {
        pos += dt * 0.5 * (detail::velocity_at(ap, j) + detail::velocity_at(ap, j + 1));
        path.push_back(pos);
      }
      return path;
    };
    auto make_straight_alt = [&]() {
      std::vector<Eigen::Vector2d> path = approach;
      const double sim_time = (H * dt - t_entry) + tail;
      for (int j = 1; j <= static_cast<int>(sim_time / dt); ++j) {
        path.push_back(approach.back() + Eigen::Vector2d(v0 * j * dt, 0.0));
      }
      return path;
    };

    // Emit in canonical geometric order (left, straight, right) regardless of
    // which exit the expert takes.
    std::vector<std::vector<Eigen::Vector2d>> exits(3);
    if (kind == ScenarioKind::kLeftTurn) {
      exits[0] = expert_exit;
      exits[1] = make_straight_alt();
      exits[2] = make_alt(-1.0);
    } else if (kind == ScenarioKind::kRightTurn) {
      exits[0] = make_alt(1.0);
      exits[1] = make_straight_alt();
      exits[2] = expert_exit;
    } else {
      exits[0] = make_alt(1.0);
      exits[1] = expert_exit;
      exits[2] = make_alt(-1.0);
    }
    for (const auto& path : exits) {
      map_polylines.push_back(detail::resample_polyline(
          detail::offset_polyline(path, params.lane_half_width), kMapPolylineLen));
      map_polylines.push_back(detail::resample_polyline(
          detail::offset_polyline(path, -params.lane_half_width), kMapPolylineLen));
    }
  } else {
    // Three-lane corridor: four straight boundaries around the ego lane.
    const double x_lo = center.front().x() - 5.0;
    double x_hi = center.back().x() + 10.0;
    for (const auto& p : center) x_hi = std::max(x_hi, p.x() + 10.0);
    for (double y : {-3.0 * params.lane_half_width, -params.lane_half_width,
                     params.lane_half_width, 3.0 * params.lane_half_width}) {
      std::vector<Eigen::Vector2d> line = {{x_lo, y}, {x_hi, y}};
      map_polylines.push_back(detail::resample_polyline(line, kMapPolylineLen));
    }
  }
  if (static_cast<int>(map_polylines.size()) > params.max_map_polylines) {
    throw ConfigError("generate_scenario: map polyline count exceeds configured maximum");
  }

  // --- surrounding agents ---------------------------------------------------
  std::vector<AgentState> agents;
  const int n_agents = rng.uniform_int(params.min_agents, params.max_agents);
  for (int a = 0; a < n_agents; ++a) {
    AgentState st;
    const bool pedestrian = rng.uniform() < 0.15;
    double x = rng.uniform(-25.0, 60.0);
    double y = rng.uniform(-10.0, 10.0);
    for (int tries = 0; tries < 20 && std::abs(x) < 4.0 && std::abs(y) < 2.2; ++tries) {
      x = rng.uniform(-25.0, 60.0);
      y = rng.uniform(-10.0, 10.0);
    }
    if (std::abs(x) < 4.0 && std::abs(y) < 2.2) y += 4.0;
    const double yaw = rng.uniform(-M_PI, M_PI);
    st.x = x;
    st.y = y;
    st.cos_yaw = std::cos(yaw);
    st.sin_yaw = std::sin(yaw);
    if (pedestrian) {
      st.is_pedestrian = 1.0;
      st.length = rng.uniform(0.6, 1.0);
      st.width = st.length;
      const double speed = rng.uniform(0.0, 2.0);
      st.vx = speed * st.cos_yaw;
      st.vy = speed * st.sin_yaw;
    } else {
      st.is_vehicle = 1.0;
      st.length = rng.uniform(4.0, 5.5);
      st.width = rng.uniform(1.8, 2.2);
      const bool parked = rng.uniform() < 0.25;
      st.is_parked = parked ? 1.0 : 0.0;
      const double speed = parked ? 0.0 : rng.uniform(0.0, params.v_max);
      st.vx = speed * st.cos_yaw;
      st.vy = speed * st.sin_yaw;
    }
    agents.push_back(st);
  }

  // --- assemble the sample ----------------------------------------------------
  ScenarioSample sample;
  sample.kind = to_string(kind);
  sample.validity.assign(total, true);

  sample.ego_history.resize(hist, params.ego_feature_dim);
  for (int i = 0; i < hist; ++i) {
    const Eigen::Vector2d vel = detail::velocity_at(prof, i);
    double x = center[i].x();
    double y = center[i].y();
    if (i != pred && params.noise_scale > 0.0) {
      // jitter everywhere except the prediction-time anchor, which defines
      // the ego frame origin
      x += rng.uniform(-params.noise_scale, params.noise_scale);
      y += rng.uniform(-params.noise_scale, params.noise_scale);
    }
    Eigen::VectorXd row(params.ego_feature_dim);
    row.setZero();
    row(0) = x;
    row(1) = y;
    if (params.ego_feature_dim > 2) row(2) = vel.x();
    if (params.ego_feature_dim > 3) row(3) = vel.y();
    if (params.ego_feature_dim > 4) row(4) = std::cos(prof.heading[i]);
    if (params.ego_feature_dim > 5) row(5) = std::sin(prof.heading[i]);
    sample.ego_history.row(i) = row.transpose();
  }

  sample.future.resize(H, 2);
  for (int j = 1; j <= H; ++j) {
    double x = center[pred + j].x();
    double y = center[pred + j].y();
    if (params.noise_scale > 0.0) {
      x += rng.uniform(-params.noise_scale, params.noise_scale);
      y += rng.uniform(-params.noise_scale, params.noise_scale);
    }
    sample.future(j - 1, 0) = x;
    sample.future(j - 1, 1) = y;
  }

  sample.agents = std::move(agents);
  sample.map = std::move(map_polylines);
  sample.goal = derive_goal(sample.future, goal_variant);
  return sample;
}

// ---------------------------------------------------------------------------
// Dataset serialization (UTF-8 JSON Lines)

inline nlohmann::ordered_json sample_to_json(const ScenarioSample& s) {
  nlohmann::ordered_json j;
  std::vector<std::vector<double>> hist(s.ego_history.rows());
  for (Eigen::Index i = 0; i < s.ego_history.rows(); ++i) {
    hist[i].assign(s.ego_history.row(i).begin(), s.ego_history.row(i).end());
  }
  j["ego_history"] = hist;

  std::vector<std::vector<double>> agents;
  for (const auto& a : s.agents) {
    const Eigen::VectorXd f = a.to_features();
    agents.emplace_back(f.data(), f.data() + f.size());
  }
  j["agents"] = agents;

  std::vector<std::vector<std::array<double, 2>>> map;
  for (const auto& poly : s.map) {
    std::vector<std::array<double, 2>> pts(poly.rows());
    for (Eigen::Index i = 0; i < poly.rows(); ++i) pts[i] = {poly(i, 0), poly(i, 1)};
    map.push_back(std::move(pts));
  }
  j["map"] = map;

  nlohmann::ordered_json goal;
  goal["variant"] = to_string(s.goal.variant);
  std::vector<std::array<double, 2>> gw;
  for (const auto& w : s.goal.waypoints) gw.push_back({w.x(), w.y()});
  goal["waypoints"] = gw;
  j["goal"] = goal;

  std::vector<std::array<double, 2>> fut(s.future.rows());
  for (Eigen::Index i = 0; i < s.future.rows(); ++i) fut[i] = {s.future(i, 0), s.future(i, 1)};
  j["future"] = fut;

  j["validity"] = s.validity;
  j["kind"] = s.kind;
  return j;
}

inline ScenarioSample sample_from_json(const nlohmann::json& j) {
  ScenarioSample s;
  const auto hist = j.at("ego_history").get<std::vector<std::vector<double>>>();
  if (hist.size() != kHistoryLen) {
    throw DataError("ego_history must have " + std::to_string(kHistoryLen) + " rows, got " +
                    std::to_string(hist.size()));
  }
  const size_t feat = hist[0].size();
  s.ego_history.resize(hist.size(), feat);
  for (size_t i = 0; i < hist.size(); ++i) {
    if (hist[i].size() != feat) throw DataError("ego_history rows have inconsistent widths");
    for (size_t c = 0; c < feat; ++c) s.ego_history(i, c) = hist[i][c];
  }

  for (const auto& af : j.at("agents")) {
    const auto fv = af.get<std::vector<double>>();
    Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(fv.data(), fv.size());
    s.agents.push_back(AgentState::from_features(f));
  }

  for (const auto& poly : j.at("map")) {
    const auto pts = poly.get<std::vector<std::array<double, 2>>>();
    if (pts.size() != kMapPolylineLen) {
      throw DataError("map polyline must have " + std::to_string(kMapPolylineLen) +
                      " waypoints, got " + std::to_string(pts.size()));
    }
    MapPolyline m(pts.size(), 2);
    for (size_t i = 0; i < pts.size(); ++i) {
      m(i, 0) = pts[i][0];
      m(i, 1) = pts[i][1];
    }
    s.map.push_back(std::move(m));
  }

  s.goal.variant = goal_variant_from_string(j.at("goal").at("variant").get<std::string>());
  for (const auto& w : j.at("goal").at("waypoints")) {
    const auto pt = w.get<std::array<double, 2>>();
    s.goal.waypoints.emplace_back(pt[0], pt[1]);
  }
  const size_t expected_goal_len = s.goal.variant == GoalVariant::kNone ? 0
                                   : s.goal.variant == GoalVariant::kEndpoint
                                       ? 1
                                       : kSparseRouteLen;
  if (s.goal.waypoints.size() != expected_goal_len) {
    throw DataError("goal variant '" + to_string(s.goal.variant) + "' must carry " +
                    std::to_string(expected_goal_len) + " waypoints, got " +
                    std::to_string(s.goal.waypoints.size()));
  }

  const auto fut = j.at("future").get<std::vector<std::array<double, 2>>>();
  if (fut.empty()) throw DataError("future is empty");
  s.future.resize(fut.size(), 2);
  for (size_t i = 0; i < fut.size(); ++i) {
    s.future(i, 0) = fut[i][0];
    s.future(i, 1) = fut[i][1];
  }

  s.validity = j.at("validity").get<std::vector<bool>>();
  if (s.validity.size() != kHistoryLen + fut.size()) {
    throw DataError("validity mask must cover the full track");
  }
  s.kind = j.at("kind").get<std::string>();
  if (!s.ego_history.allFinite() || !s.future.allFinite()) {
    throw DataError("non-finite coordinates");
  }
  return s;
}

inline std::vector<ScenarioSample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file '" + path + "'");
  std::vector<ScenarioSample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      samples.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

// ---------------------------------------------------------------------------
// Dataset build

struct BuildConfig {
  int n_train = 0;
  int n_val = 0;
  /// Per-kind proportions aligned with scenario_kind_names() order; must sum
  /// to 1.
  std::vector<double> mix;
  std::uint64_t seed = 0;
  std::string train_path;
  std::string val_path;
  GeneratorParams params;
  GoalVariant goal_variant = GoalVariant::kSparseRoute;
};

inline std::vector<double> uniform_mix() {
  const size_t n = scenario_kind_names().size();
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

namespace detail {

inline ScenarioKind pick_kind(double u, const std::vector<double>& mix) {
  double acc = 0.0;
  const auto& names = scenario_kind_names();
  for (size_t i = 0; i < names.size(); ++i) {
    acc += mix[i];
    if (u < acc) return names[i].first;
  }
  return names.back().first;
}

inline void write_split(std::ofstream& out, int count, std::uint64_t tag,
                        const BuildConfig& cfg) {
  for (int i = 0; i < count; ++i) {
    Rng pick(mix_seed(cfg.seed, tag, static_cast<std::uint64_t>(i)));
    const ScenarioKind kind = pick_kind(pick.uniform(), cfg.mix);
    ScenarioSample sample;
    bool ok = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      sample = generate_scenario(
          kind, mix_seed(cfg.seed, tag, static_cast<std::uint64_t>(i),
                         static_cast<std::uint64_t>(attempt)),
          cfg.params, cfg.goal_variant);
      if (static_filter(full_track(sample), sample.validity) &&
          quality_filter(sample.validity)) {
        ok = true;
        break;
      }
    }
    if (!ok) throw DataError("build_dataset: could not generate a sample passing filters");
    out << sample_to_json(sample).dump() << "\n";
  }
}

}  // namespace detail

/// Writes train and validation JSONL files. Train and validation indices use
/// disjoint seed substreams, and every emitted sample passes both curation
/// filters.
inline void build_dataset(const BuildConfig& cfg) {
  if (cfg.n_train < 1 || cfg.n_val < 0) {
    throw ConfigError("build_dataset: counts must be positive");
  }
  if (cfg.mix.size() != scenario_kind_names().size()) {
    throw ConfigError("build_dataset: mix must cover all scenario kinds");
  }
  double sum = 0.0;
  for (double m : cfg.mix) {
    if (m < 0.0) throw ConfigError("build_dataset: negative mix proportion");
    sum += m;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("build_dataset: mix proportions must sum to 1");
  }

  std::ofstream train_out(cfg.train_path);
  if (!train_out) throw DataError("cannot open '" + cfg.train_path + "' for writing");
  detail::write_split(train_out, cfg.n_train, 0, cfg);

  if (cfg.n_val > 0) {
    std::ofstream val_out(cfg.val_path);
    if (!val_out) throw DataError("cannot open '" + cfg.val_path + "' for writing");
    detail::write_split(val_out, cfg.n_val, 1, cfg);
  }
}

}  // namespace latentplan::scenegen
