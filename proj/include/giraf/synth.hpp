#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "giraf/gesture.hpp"
#include "giraf/geometry.hpp"
#include "giraf/hand.hpp"
#include "giraf/rng.hpp"

namespace giraf {

// Procedural right-hand skeletons for every trainable gesture class. Desk
// scale, camera frame (x right, y down, z into the scene).

// Orthonormal palm frame: f points wrist->fingers, n out of the palm,
// s = f x n toward the thumb.
struct PalmFrame {
  Vec3 f{0.0, 0.0, 1.0};
  Vec3 n{0.0, -1.0, 0.0};
  Vec3 s{1.0, 0.0, 0.0};
};

inline PalmFrame make_palm(const Vec3& forward, const Vec3& normal_hint) {
  PalmFrame p;
  p.f = normalized(forward);
  Vec3 n = normal_hint - dot(normal_hint, p.f) * p.f;
  if (norm(n) < 1e-9) {
    Vec3 alt = std::abs(p.f.x) < 0.9 ? Vec3{1.0, 0.0, 0.0}
                                     : Vec3{0.0, 1.0, 0.0};
    n = alt - dot(alt, p.f) * p.f;
  }
  p.n = normalized(n);
  p.s = cross(p.f, p.n);
  return p;
}

inline PalmFrame rotate_palm(const PalmFrame& p, const Mat3& r) {
  return PalmFrame{r * p.f, r * p.n, r * p.s};
}

// Full finger curl bends each joint by this much.
inline constexpr double kCurlPerJoint = 1.2217;  // 70 degrees
inline constexpr double kThumbCurlPerJoint = 1.0;

struct HandPose {
  Vec3 wrist{0.0, 0.0, 0.6};
  PalmFrame palm;
  // thumb, index, middle, ring, pinky curl in [0, 1]
  std::array<double, 5> curl{0.0, 0.0, 0.0, 0.0, 0.0};
  // Exact-collinearity override: the index chain runs straight from its MCP
  // through this world point.
  std::optional<Vec3> index_target;
  // Thumb chain runs toward the index tip, touching it (Ok) or stopping
  // short of it (Pinch).
  bool thumb_to_index = false;
  double thumb_index_gap = 0.0;
};

namespace detail {

struct FingerDef {
  Vec3 mcp_offset;  // in palm coordinates (f, s, n)
  double l1, l2, l3;
};

inline Vec3 palm_point(const HandPose& pose, const Vec3& offset) {
  return pose.wrist + offset.x * pose.palm.f + offset.y * pose.palm.s +
         offset.z * pose.palm.n;
}

inline void build_chain(const Vec3& base, const Vec3& d0, const Vec3& axis,
                        double joint_angle, double l1, double l2, double l3,
                        Vec3* out) {
  Vec3 d1 = axis_angle(axis, joint_angle) * d0;
  Vec3 d2 = axis_angle(axis, 2.0 * joint_angle) * d0;
  Vec3 d3 = axis_angle(axis, 3.0 * joint_angle) * d0;
  out[0] = base + l1 * d1;
  out[1] = out[0] + l2 * d2;
  out[2] = out[1] + l3 * d3;
}

}  // namespace detail

inline std::array<Vec3, kp::kCount> hand_skeleton(const HandPose& pose) {
  using detail::FingerDef;
  // (forward, side, normal) offsets and segment lengths, index..pinky.
  static const FingerDef fingers[4] = {
      {{0.090, 0.022, 0.0}, 0.040, 0.025, 0.022},
      {{0.095, 0.000, 0.0}, 0.045, 0.028, 0.024},
      {{0.090, -0.022, 0.0}, 0.042, 0.026, 0.023},
      {{0.082, -0.042, 0.0}, 0.032, 0.020, 0.019},
  };

  std::array<Vec3, kp::kCount> p;
  p[kp::kWrist] = pose.wrist;

  const Vec3 curl_axis = cross(pose.palm.n, pose.palm.f);  // == -s
  const int mcp_index[4] = {kp::kIndexMcp, kp::kMiddleMcp, kp::kRingMcp,
                            kp::kPinkyMcp};
  for (int fi = 0; fi < 4; ++fi) {
    const FingerDef& def = fingers[fi];
    Vec3 mcp = detail::palm_point(pose, def.mcp_offset);
    p[mcp_index[fi]] = mcp;
    Vec3* joints = &p[mcp_index[fi] + 1];
    if (fi == 0 && pose.index_target) {
      Vec3 d = normalized(*pose.index_target - mcp);
      joints[0] = mcp + 0.040 * d;
      joints[1] = mcp + 0.065 * d;
      joints[2] = mcp + 0.087 * d;
    } else {
      double angle = pose.curl[fi + 1] * kCurlPerJoint;
      detail::build_chain(mcp, pose.palm.f, curl_axis, angle, def.l1, def.l2,
                          def.l3, joints);
    }
  }

  Vec3 cmc = detail::palm_point(pose, {0.030, 0.032, 0.0});
  p[kp::kThumbCmc] = cmc;
  if (pose.thumb_to_index) {
    Vec3 itip = p[kp::kIndexTip];
    Vec3 u = normalized(itip - cmc);
    Vec3 tip = itip - pose.thumb_index_gap * u;
    p[kp::kThumbCmc + 1] = cmc + 0.035 * u;
    p[kp::kThumbCmc + 2] = cmc + 0.065 * u;
    p[kp::kThumbTip] = tip;
  } else {
    Vec3 d0 = normalized(pose.palm.s + 0.25 * pose.palm.f);
    double angle = pose.curl[0] * kThumbCurlPerJoint;
    detail::build_chain(cmc, d0, pose.palm.f, angle, 0.035, 0.030, 0.025,
                        &p[kp::kThumbCmc + 1]);
  }
  return p;
}

struct GestureSynthConfig {
  double noise_sigma = 0.0;
  int n_frames = 1;
  std::uint64_t seed = 0;
  Vec3 wrist{0.0, 0.0, 0.6};
  Vec3 target{0.0, 0.0, 1.2};  // aim point for Pointing / circling
  double fps = 30.0;
  CameraIntrinsics cam = default_camera();
  // Rigid rotation of the whole hand about the wrist, for pose variety.
  Mat3 orientation_jitter = Mat3::identity();
};

namespace detail {

inline HandPose static_pose(GestureClass cls, const GestureSynthConfig& cfg) {
  HandPose pose;
  pose.wrist = cfg.wrist;
  switch (cls) {
    case GestureClass::Pointing:
      pose.palm = make_palm(cfg.target - cfg.wrist, {0.0, -1.0, 0.0});
      pose.curl = {0.7, 0.0, 0.9, 0.9, 0.9};
      pose.index_target = cfg.target;
      break;
    case GestureClass::OpenPalmUp:
      pose.palm = make_palm({0.0, 0.0, 1.0}, {0.0, -1.0, 0.0});
      pose.curl = {0.1, 0.05, 0.05, 0.05, 0.05};
      break;
    case GestureClass::OpenPalmOut:
      pose.palm = make_palm({0.0, -1.0, 0.0}, {0.0, 0.0, -1.0});
      pose.curl = {0.1, 0.05, 0.05, 0.05, 0.05};
      break;
    case GestureClass::Fist:
      pose.palm = make_palm({0.0, 0.0, 1.0}, {0.0, -1.0, 0.0});
      pose.curl = {0.75, 1.0, 1.0, 1.0, 1.0};
      break;
    case GestureClass::ThumbsUp:
      // s points up (-y): thumb extended skyward over a fist.
      pose.palm = make_palm({0.0, 0.0, 1.0}, {-1.0, 0.0, 0.0});
      pose.curl = {0.0, 1.0, 1.0, 1.0, 1.0};
      break;
    case GestureClass::ThumbsDown:
      pose.palm = make_palm({0.0, 0.0, 1.0}, {1.0, 0.0, 0.0});
      pose.curl = {0.0, 1.0, 1.0, 1.0, 1.0};
      break;
    case GestureClass::Ok:
      pose.palm = make_palm({0.0, 0.0, 1.0}, {0.0, -1.0, 0.0});
      pose.curl = {0.0, 0.5, 0.08, 0.08, 0.08};
      pose.thumb_to_index = true;
      break;
    case GestureClass::Pinch:
      pose.palm = make_palm({0.0, 0.0, 1.0}, {0.0, -1.0, 0.0});
      pose.curl = {0.0, 0.15, 0.65, 0.65, 0.65};
      pose.thumb_to_index = true;
      pose.thumb_index_gap = 0.03;
      break;
    default:
      pose.palm = make_palm({0.0, 0.0, 1.0}, {0.0, -1.0, 0.0});
      break;
  }
  return pose;
}

// u runs 0..1 across the clip; phase is one full cycle.
inline HandPose dynamic_pose(GestureClass cls, const GestureSynthConfig& cfg,
                             double u) {
  constexpr double kTau = 2.0 * std::numbers::pi;
  double phi = kTau * u;
  HandPose pose;
  pose.wrist = cfg.wrist;
  switch (cls) {
    case GestureClass::Beckoning: {
      pose.palm = make_palm({0.0, 0.0, 1.0}, {0.0, -1.0, 0.0});
      double c = 0.15 + 0.35 * (1.0 - std::cos(2.0 * phi));
      pose.curl = {0.3, c, c, c, c};
      pose.wrist.z += -0.02 * std::sin(2.0 * phi);
      break;
    }
    case GestureClass::CirclingHorizontal: {
      // Loose point — index leads, the rest half-relaxed — swept in x/z.
      pose.wrist.x += 0.06 * (std::cos(phi) - 1.0);
      pose.wrist.z += 0.03 * std::sin(phi);
      pose.palm = make_palm(cfg.target - pose.wrist, {0.0, -1.0, 0.0});
      pose.curl = {0.15, 0.0, 0.5, 0.5, 0.5};
      pose.index_target = cfg.target;
      break;
    }
    case GestureClass::CirclingVertical: {
      pose.wrist.x += 0.06 * (std::cos(phi) - 1.0);
      pose.wrist.y += 0.06 * std::sin(phi);
      pose.palm = make_palm(cfg.target - pose.wrist, {0.0, -1.0, 0.0});
      pose.curl = {0.15, 0.0, 0.5, 0.5, 0.5};
      pose.index_target = cfg.target;
      break;
    }
    case GestureClass::Hammering: {
      pose.palm = make_palm({0.0, 0.0, 1.0}, {0.0, -1.0, 0.0});
      pose.curl = {0.75, 1.0, 1.0, 1.0, 1.0};
      pose.wrist.y += 0.025 * (1.0 - std::cos(2.0 * phi));  // two strikes
      pose.palm = rotate_palm(
          pose.palm, axis_angle(pose.palm.s, 0.35 * std::sin(2.0 * phi)));
      break;
    }
    case GestureClass::PickUpMotion: {
      pose.palm = make_palm({0.0, 0.0, 1.0}, {0.0, -1.0, 0.0});
      double c = 0.1 + 0.8 * u;
      pose.curl = {0.5 * u, c, c, c, c};
      pose.wrist.y -= 0.04 * u;  // lift
      break;
    }
    case GestureClass::ReleaseMotion: {
      pose.palm = make_palm({0.0, 0.0, 1.0}, {0.0, 1.0, 0.0});  // palm down
      double c = 0.9 - 0.8 * u;
      pose.curl = {0.5 * (1.0 - u), c, c, c, c};
      pose.wrist.y += 0.03 * u;  // lower
      break;
    }
    case GestureClass::Twisting: {
      pose.palm = make_palm({0.0, 0.0, 1.0}, {0.0, -1.0, 0.0});
      pose.curl = {0.0, 0.15, 0.65, 0.65, 0.65};
      pose.thumb_to_index = true;
      pose.thumb_index_gap = 0.02;
      double roll = -0.8 + 1.6 * u;  // one knob turn
      pose.palm = rotate_palm(pose.palm, axis_angle(pose.palm.f, roll));
      break;
    }
    default:
      pose = static_pose(cls, cfg);
      break;
  }
  return pose;
}

}  // namespace detail

inline std::vector<HandKeypoints> synth_gesture(GestureClass cls,
                                                const GestureSynthConfig& cfg) {
  if (cls == GestureClass::Unknown)
    throw InvalidSpecError("cannot synthesize the Unknown gesture class");
  if (cfg.noise_sigma < 0.0)
    throw InvalidSpecError("noise_sigma must be non-negative");
  if (cfg.n_frames < 1)
    throw InvalidSpecError("n_frames must be at least 1");

  auto rng = make_rng(cfg.seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::vector<HandKeypoints> frames;
  frames.reserve(cfg.n_frames);
  for (int k = 0; k < cfg.n_frames; ++k) {
    double u = cfg.n_frames > 1
                   ? static_cast<double>(k) / (cfg.n_frames - 1)
                   : 0.0;
    HandPose pose = is_dynamic_gesture(cls)
                        ? detail::dynamic_pose(cls, cfg, u)
                        : detail::static_pose(cls, cfg);
    auto world = hand_skeleton(pose);
    for (Vec3& p : world) {
      p = pose.wrist + cfg.orientation_jitter * (p - pose.wrist);
      if (cfg.noise_sigma > 0.0) {
        p.x += cfg.noise_sigma * jitter(rng);
        p.y += cfg.noise_sigma * jitter(rng);
        p.z += cfg.noise_sigma * jitter(rng);
      }
    }
    HandKeypoints hk;
    for (int i = 0; i < kp::kCount; ++i) {
      hk.world_coords[i] = world[i];
      hk.image_coords[i] = project(world[i], cfg.cam);
    }
    hk.confidence = 1.0;
    hk.timestamp = k / cfg.fps;
    frames.push_back(std::move(hk));
  }
  return frames;
}

inline std::vector<HandKeypoints> synth_gesture(GestureClass cls,
                                                double noise_sigma,
                                                int n_frames,
                                                std::uint64_t seed) {
  GestureSynthConfig cfg;
  cfg.noise_sigma = noise_sigma;
  cfg.n_frames = n_frames;
  cfg.seed = seed;
  return synth_gesture(cls, cfg);
}

struct DatasetConfig {
  int static_samples_per_class = 100;
  int dynamic_samples_per_class = 100;
  double noise_sigma = 0.003;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  int dynamic_frames = 16;
};

// Randomized wrist placement, aim target and hand orientation per sample so
// the classifiers cannot memorize a single canonical pose.
inline GestureDataset synth_dataset(const DatasetConfig& cfg) {
  GestureDataset data;
  data.seed = cfg.seed;
  auto rng = make_rng(derive_seed(cfg.seed, 0xda7a));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> angle_jitter(0.0, 0.10);

  auto add_class = [&](GestureClass cls, int count, int n_frames) {
    int n_train =
        count - static_cast<int>(std::lround(count * cfg.test_fraction));
    for (int i = 0; i < count; ++i) {
      GestureSynthConfig g;
      g.noise_sigma = cfg.noise_sigma;
      g.n_frames = n_frames;
      g.seed = derive_seed(cfg.seed, (static_cast<std::uint64_t>(cls) << 32) |
                                         static_cast<std::uint64_t>(i));
      g.wrist = Vec3{-0.08 + 0.16 * u01(rng), -0.08 + 0.16 * u01(rng),
                     0.52 + 0.16 * u01(rng)};
      g.target = Vec3{-0.3 + 0.6 * u01(rng), -0.2 + 0.5 * u01(rng),
                      1.0 + 0.6 * u01(rng)};
      Vec3 axis{u01(rng) - 0.5, u01(rng) - 0.5, u01(rng) - 0.5};
      if (norm(axis) < 1e-9) axis = Vec3{0.0, 0.0, 1.0};
      g.orientation_jitter = axis_angle(axis, angle_jitter(rng));
      GestureSample sample;
      sample.frames = synth_gesture(cls, g);
      sample.label = cls;
      (i < n_train ? data.train : data.test).push_back(std::move(sample));
    }
  };

  for (GestureClass cls : static_gesture_classes())
    add_class(cls, cfg.static_samples_per_class, 1);
  for (GestureClass cls : dynamic_gesture_classes())
    add_class(cls, cfg.dynamic_samples_per_class, cfg.dynamic_frames);
  return data;
}

}  // namespace giraf
