#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "giraf/error.hpp"
#include "giraf/geometry.hpp"
#include "giraf/rng.hpp"

namespace giraf {

struct ObjectEntry {
  std::string label;
  Vec3 position;

  bool operator==(const ObjectEntry& o) const {
    return label == o.label && position == o.position;
  }
};

struct Scene {
  std::vector<ObjectEntry> objects;
  std::vector<Vec3> cloud;
  CameraIntrinsics camera = default_camera();
  std::string frame_tag = "camera";
};

// Canonical key for matching spoken targets against labels: lower case,
// spaces collapsed to underscores ("water jug" finds "water_jug").
inline std::string label_key(std::string_view s) {
  std::string k;
  k.reserve(s.size());
  for (char ch : s)
    k.push_back(ch == ' ' ? '_'
                          : static_cast<char>(std::tolower(
                                static_cast<unsigned char>(ch))));
  return k;
}

// Category -> labels map with identity closure: every label always names
// itself, whether or not it appears as a key.
class Ontology {
 public:
  Ontology() = default;

  void add(const std::string& category, const std::string& label) {
    categories_[label_key(category)].insert(label_key(label));
  }

  bool contains(const std::string& target, const std::string& label) const {
    std::string t = label_key(target), l = label_key(label);
    if (t == l) return true;
    auto it = categories_.find(t);
    return it != categories_.end() && it->second.count(l) > 0;
  }

  // Candidate label keys for a target, identity included.
  std::set<std::string> candidates(const std::string& target) const {
    std::set<std::string> out;
    std::string t = label_key(target);
    out.insert(t);
    auto it = categories_.find(t);
    if (it != categories_.end())
      out.insert(it->second.begin(), it->second.end());
    return out;
  }

  const std::map<std::string, std::set<std::string>>& entries() const {
    return categories_;
  }

  // Groups labels by their prefix before the first underscore, so that e.g.
  // "drawer" covers every "drawer_r_c".
  static Ontology from_prefixes(const std::vector<std::string>& labels) {
    Ontology o;
    for (const auto& label : labels) {
      auto cut = label.find('_');
      if (cut != std::string::npos && cut > 0)
        o.add(label.substr(0, cut), label);
    }
    return o;
  }

 private:
  std::map<std::string, std::set<std::string>> categories_;
};

inline std::vector<ObjectEntry> semantic_filter(
    const std::string& target, const Ontology& ontology,
    const std::vector<ObjectEntry>& objects) {
  std::vector<ObjectEntry> out;
  for (const auto& obj : objects)
    if (ontology.contains(target, obj.label)) out.push_back(obj);
  return out;
}

// Pluggable candidate vocabulary source; the ontology is the hermetic
// default, a completion-backend adapter lives with the planner.
class CandidateSource {
 public:
  virtual ~CandidateSource() = default;
  // Label keys that may satisfy `target`, drawn from `vocabulary`.
  virtual std::set<std::string> candidates(
      const std::string& target,
      const std::vector<std::string>& vocabulary) const = 0;
};

class OntologyCandidateSource final : public CandidateSource {
 public:
  explicit OntologyCandidateSource(Ontology ontology)
      : ontology_(std::move(ontology)) {}

  std::set<std::string> candidates(
      const std::string& target,
      const std::vector<std::string>& vocabulary) const override {
    std::set<std::string> out;
    for (const auto& label : vocabulary)
      if (ontology_.contains(target, label)) out.insert(label_key(label));
    return out;
  }

 private:
  Ontology ontology_;
};

inline std::vector<ObjectEntry> semantic_filter(
    const std::string& target, const CandidateSource& source,
    const std::vector<ObjectEntry>& objects) {
  std::vector<std::string> vocab;
  for (const auto& obj : objects) vocab.push_back(obj.label);
  std::set<std::string> keys = source.candidates(target, vocab);
  std::vector<ObjectEntry> out;
  for (const auto& obj : objects)
    if (keys.count(label_key(obj.label))) out.push_back(obj);
  return out;
}

struct DrawerGridSpec {
  int rows = 8;
  int cols = 8;
  double spacing = 0.10;
  Vec3 origin{-0.35, -0.35, 1.2};  // drawer_1_1 center; cabinet face z-plane
};

struct ToolBenchSpec {
  std::vector<ObjectEntry> tools;
};

struct RandomSceneSpec {
  int n_objects = 10;
  std::vector<std::string> label_pool = {"box", "cup", "ball"};
  Vec3 bounds_min{-0.4, -0.3, 0.8};
  Vec3 bounds_max{0.4, 0.3, 1.6};
};

struct SceneSpec {
  std::variant<DrawerGridSpec, ToolBenchSpec, RandomSceneSpec> kind;
  std::uint64_t seed = 0;
};

namespace detail {

inline bool near_any(const std::vector<Vec3>& pts, const Vec3& p) {
  for (const auto& q : pts)
    if (norm(q - p) < 1e-9) return true;
  return false;
}

// 1 cm sampling of an axis-aligned rectangle, skipping points that already
// appear as object centers.
template <typename MakePoint>
void sample_plane(Scene& scene, double a0, double a1, double b0, double b1,
                  MakePoint&& make_point) {
  std::vector<Vec3> centers;
  for (const auto& o : scene.objects) centers.push_back(o.position);
  const double step = 0.01;
  int na = static_cast<int>(std::lround((a1 - a0) / step));
  int nb = static_cast<int>(std::lround((b1 - b0) / step));
  for (int i = 0; i <= na; ++i)
    for (int j = 0; j <= nb; ++j) {
      Vec3 p = make_point(a0 + i * step, b0 + j * step);
      if (!near_any(centers, p)) scene.cloud.push_back(p);
    }
}

}  // namespace detail

inline Scene generate_scene(const SceneSpec& spec) {
  Scene scene;
  if (const auto* g = std::get_if<DrawerGridSpec>(&spec.kind)) {
    if (g->rows < 1 || g->cols < 1)
      throw InvalidSpecError("drawer grid needs rows*cols >= 1");
    if (g->spacing <= 0.0)
      throw InvalidSpecError("drawer grid spacing must be positive");
    for (int r = 1; r <= g->rows; ++r)
      for (int c = 1; c <= g->cols; ++c) {
        ObjectEntry e;
        e.label = "drawer_" + std::to_string(r) + "_" + std::to_string(c);
        e.position = g->origin + Vec3{(c - 1) * g->spacing,
                                      (r - 1) * g->spacing, 0.0};
        scene.objects.push_back(std::move(e));
      }
    for (const auto& o : scene.objects) scene.cloud.push_back(o.position);
    double m = g->spacing;  // one drawer pitch of margin around the face
    detail::sample_plane(
        scene, g->origin.x - m, g->origin.x + (g->cols - 1) * g->spacing + m,
        g->origin.y - m, g->origin.y + (g->rows - 1) * g->spacing + m,
        [&](double x, double y) { return Vec3{x, y, g->origin.z}; });
    scene.frame_tag = "camera";
  } else if (const auto* t = std::get_if<ToolBenchSpec>(&spec.kind)) {
    if (t->tools.empty()) throw InvalidSpecError("tool bench needs tools");
    for (const auto& tool : t->tools) {
      if (tool.label.empty())
        throw InvalidSpecError("tool labels must be non-empty");
      scene.objects.push_back(tool);
    }
    for (const auto& o : scene.objects) scene.cloud.push_back(o.position);
    double min_x = scene.objects[0].position.x, max_x = min_x;
    double min_z = scene.objects[0].position.z, max_z = min_z;
    double table_y = scene.objects[0].position.y;
    for (const auto& o : scene.objects) {
      min_x = std::min(min_x, o.position.x);
      max_x = std::max(max_x, o.position.x);
      min_z = std::min(min_z, o.position.z);
      max_z = std::max(max_z, o.position.z);
      table_y = std::max(table_y, o.position.y);
    }
    double surface = table_y + 0.02;  // just below the object centers
    detail::sample_plane(scene, min_x - 0.15, max_x + 0.15, min_z - 0.15,
                         max_z + 0.15, [&](double x, double z) {
                           return Vec3{x, surface, z};
                         });
  } else {
    const auto& r = std::get<RandomSceneSpec>(spec.kind);
    if (r.n_objects < 1)
      throw InvalidSpecError("random scene needs at least one object");
    if (r.label_pool.empty())
      throw InvalidSpecError("random scene needs a label pool");
    auto rng = make_rng(spec.seed);
    std::uniform_real_distribution<double> ux(r.bounds_min.x, r.bounds_max.x);
    std::uniform_real_distribution<double> uy(r.bounds_min.y, r.bounds_max.y);
    std::uniform_real_distribution<double> uz(r.bounds_min.z, r.bounds_max.z);
    std::uniform_int_distribution<std::size_t> pick(0,
                                                    r.label_pool.size() - 1);
    for (int i = 0; i < r.n_objects; ++i) {
      ObjectEntry e;
      e.label = r.label_pool[pick(rng)];
      e.position = Vec3{ux(rng), uy(rng), uz(rng)};
      scene.objects.push_back(std::move(e));
    }
    for (const auto& o : scene.objects) scene.cloud.push_back(o.position);
    double surface = r.bounds_max.y + 0.02;
    detail::sample_plane(scene, r.bounds_min.x, r.bounds_max.x, r.bounds_min.z,
                         r.bounds_max.z, [&](double x, double z) {
                           return Vec3{x, surface, z};
                         });
  }
  return scene;
}

inline std::vector<std::string> scene_vocabulary(const Scene& scene) {
  std::vector<std::string> vocab;
  for (const auto& o : scene.objects) vocab.push_back(o.label);
  return vocab;
}

}  // namespace giraf
