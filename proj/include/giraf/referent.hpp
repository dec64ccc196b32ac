#pragma once

#include <string>
#include <variant>
#include <vector>

#include "giraf/error.hpp"
#include "giraf/geometry.hpp"
#include "giraf/hand.hpp"
#include "giraf/scene.hpp"

namespace giraf {

// What a deictic gesture refers to: an object, a point, or a direction.
struct Location {
  Vec3 point;
};

struct Direction {
  Vec3 vector;  // unit
};

struct Referent {
  std::variant<ObjectEntry, Location, Direction> value;
};

// Closest candidate to the pointing ray; ties broken by label, then by
// coordinate lexicographic order, so selection is fully deterministic.
inline ObjectEntry resolve_object(const Scene& scene, const HandKeypoints& hand,
                                  const std::string& target,
                                  const Ontology& ontology) {
  Ray ray = pointing_ray(hand);
  std::vector<ObjectEntry> candidates =
      semantic_filter(target, ontology, scene.objects);
  if (candidates.empty())
    throw NoCandidatesError("no scene object matches '" + target + "'");

  const ObjectEntry* best = &candidates[0];
  double best_d = ray_point_distance(ray, candidates[0].position);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    double d = ray_point_distance(ray, candidates[i].position);
    bool better = d < best_d;
    if (d == best_d) {
      if (candidates[i].label != best->label)
        better = candidates[i].label < best->label;
      else
        better = lex_less(candidates[i].position, best->position);
    }
    if (better) {
      best = &candidates[i];
      best_d = d;
    }
  }
  return *best;
}

inline Vec3 resolve_location(const Scene& scene, const HandKeypoints& hand) {
  Ray ray = pointing_ray(hand);
  if (scene.cloud.empty()) throw EmptyCloudError();
  const Vec3* best = &scene.cloud[0];
  double best_d = ray_point_distance(ray, scene.cloud[0]);
  for (std::size_t i = 1; i < scene.cloud.size(); ++i) {
    double d = ray_point_distance(ray, scene.cloud[i]);
    if (d < best_d || (d == best_d && lex_less(scene.cloud[i], *best))) {
      best = &scene.cloud[i];
      best_d = d;
    }
  }
  return *best;
}

inline Vec3 resolve_direction(const HandKeypoints& hand) {
  return pointing_ray(hand).direction;
}

}  // namespace giraf
