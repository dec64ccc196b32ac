#pragma once

#include <array>

#include "giraf/geometry.hpp"

namespace giraf {

// 21-point hand skeleton index convention:
//   0 wrist
//   1-4   thumb  CMC / MCP / IP / tip
//   5-8   index  MCP / PIP / DIP / tip
//   9-12  middle MCP / PIP / DIP / tip
//   13-16 ring   MCP / PIP / DIP / tip
//   17-20 pinky  MCP / PIP / DIP / tip
namespace kp {
inline constexpr int kWrist = 0;
inline constexpr int kThumbCmc = 1;
inline constexpr int kThumbTip = 4;
inline constexpr int kIndexMcp = 5;
inline constexpr int kIndexPip = 6;
inline constexpr int kIndexDip = 7;
inline constexpr int kIndexTip = 8;
inline constexpr int kMiddleMcp = 9;
inline constexpr int kRingMcp = 13;
inline constexpr int kRingTip = 16;
inline constexpr int kPinkyMcp = 17;
inline constexpr int kPinkyTip = 20;
inline constexpr int kCount = 21;
}  // namespace kp

struct HandKeypoints {
  std::array<Pixel, kp::kCount> image_coords{};
  std::array<Vec3, kp::kCount> world_coords{};
  double confidence = 1.0;  // in [0, 1]
  double timestamp = 0.0;   // seconds
};

constexpr double kDegenerateFingerEps = 1e-6;  // meters

// The pointing ray starts at the index fingertip and runs along the
// PIP-joint -> tip direction.
inline Ray pointing_ray(const HandKeypoints& hand) {
  const Vec3& tip = hand.world_coords[kp::kIndexTip];
  const Vec3& pip = hand.world_coords[kp::kIndexPip];
  Vec3 d = tip - pip;
  double len = norm(d);
  if (len <= kDegenerateFingerEps) throw DegenerateFingerError();
  return Ray{tip, d / len};
}

// Palm centroid: mean of wrist and the four finger MCP joints.
inline Vec3 hand_center(const HandKeypoints& hand) {
  Vec3 sum = hand.world_coords[kp::kWrist] + hand.world_coords[kp::kIndexMcp] +
             hand.world_coords[kp::kMiddleMcp] +
             hand.world_coords[kp::kRingMcp] + hand.world_coords[kp::kPinkyMcp];
  return sum / 5.0;
}

}  // namespace giraf
