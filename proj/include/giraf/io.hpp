#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "giraf/error.hpp"
#include "giraf/gesture.hpp"
#include "giraf/hand.hpp"
#include "giraf/scenario.hpp"
#include "giraf/scene.hpp"
#include "giraf/sim.hpp"

namespace giraf {

using Json = nlohmann::json;

namespace detail {

inline std::string join_path(const std::string& at, const std::string& key) {
  return at.empty() ? key : at + "." + key;
}

inline const Json& need(const Json& j, const std::string& key,
                        const std::string& at) {
  if (!j.is_object())
    throw InvariantViolationError(at.empty() ? "(root)" : at,
                                  "expected an object");
  auto it = j.find(key);
  if (it == j.end())
    throw InvariantViolationError(join_path(at, key), "missing field");
  return *it;
}

inline double need_number(const Json& j, const std::string& key,
                          const std::string& at) {
  const Json& v = need(j, key, at);
  if (!v.is_number())
    throw InvariantViolationError(join_path(at, key), "expected a number");
  return v.get<double>();
}

inline int need_int(const Json& j, const std::string& key,
                    const std::string& at) {
  const Json& v = need(j, key, at);
  if (!v.is_number_integer())
    throw InvariantViolationError(join_path(at, key), "expected an integer");
  return v.get<int>();
}

inline std::uint64_t need_u64(const Json& j, const std::string& key,
                              const std::string& at) {
  const Json& v = need(j, key, at);
  if (!v.is_number_integer())
    throw InvariantViolationError(join_path(at, key), "expected an integer");
  return v.get<std::uint64_t>();
}

inline std::string need_string(const Json& j, const std::string& key,
                               const std::string& at) {
  const Json& v = need(j, key, at);
  if (!v.is_string())
    throw InvariantViolationError(join_path(at, key), "expected a string");
  return v.get<std::string>();
}

inline const Json& need_array(const Json& j, const std::string& key,
                              const std::string& at) {
  const Json& v = need(j, key, at);
  if (!v.is_array())
    throw InvariantViolationError(join_path(at, key), "expected an array");
  return v;
}

inline Vec3 vec3_at(const Json& v, const std::string& at) {
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() ||
      !v[1].is_number() || !v[2].is_number())
    throw InvariantViolationError(at, "expected [x, y, z]");
  return Vec3{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

inline Json vec3_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

inline void check_version(const Json& j) {
  const Json& v = need(j, "format_version", "");
  if (!v.is_number_integer() || v.get<int>() != 1)
    throw InvariantViolationError("format_version",
                                  "unsupported version (expected 1)");
}

inline Json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileParseError(path.string() + ": file not found");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FileParseError(path.string() + ": " + e.what());
  }
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("short write to " + path.string());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scene

inline Json scene_to_json(const Scene& s) {
  Json j;
  j["format_version"] = 1;
  j["camera"] = Json{{"fx", s.camera.fx},         {"fy", s.camera.fy},
                     {"cx", s.camera.cx},         {"cy", s.camera.cy},
                     {"width", s.camera.width},   {"height", s.camera.height}};
  Json objs = Json::array();
  for (const auto& o : s.objects)
    objs.push_back(Json{{"label", o.label}, {"pos", detail::vec3_json(o.position)}});
  j["objects"] = std::move(objs);
  Json cloud = Json::array();
  for (const auto& p : s.cloud) cloud.push_back(detail::vec3_json(p));
  j["cloud"] = std::move(cloud);
  j["frame_tag"] = s.frame_tag;
  return j;
}

inline Scene scene_from_json(const Json& j) {
  detail::check_version(j);
  Scene s;
  const Json& cam = detail::need(j, "camera", "");
  s.camera.fx = detail::need_number(cam, "fx", "camera");
  s.camera.fy = detail::need_number(cam, "fy", "camera");
  s.camera.cx = detail::need_number(cam, "cx", "camera");
  s.camera.cy = detail::need_number(cam, "cy", "camera");
  s.camera.width = detail::need_int(cam, "width", "camera");
  s.camera.height = detail::need_int(cam, "height", "camera");
  if (s.camera.fx <= 0.0)
    throw InvariantViolationError("camera.fx", "focal length must be positive");
  if (s.camera.fy <= 0.0)
    throw InvariantViolationError("camera.fy", "focal length must be positive");
  if (s.camera.width < 1 || s.camera.height < 1)
    throw InvariantViolationError("camera.width",
                                  "image size must be at least 1x1");

  const Json& objs = detail::need_array(j, "objects", "");
  for (std::size_t i = 0; i < objs.size(); ++i) {
    std::string at = "objects[" + std::to_string(i) + "]";
    ObjectEntry e;
    e.label = detail::need_string(objs[i], "label", at);
    if (e.label.empty())
      throw InvariantViolationError(at + ".label", "label must be non-empty");
    e.position = detail::vec3_at(detail::need(objs[i], "pos", at), at + ".pos");
    s.objects.push_back(std::move(e));
  }

  const Json& cloud = detail::need_array(j, "cloud", "");
  for (std::size_t i = 0; i < cloud.size(); ++i)
    s.cloud.push_back(
        detail::vec3_at(cloud[i], "cloud[" + std::to_string(i) + "]"));

  if (auto it = j.find("frame_tag"); it != j.end()) {
    if (!it->is_string())
      throw InvariantViolationError("frame_tag", "expected a string");
    s.frame_tag = it->get<std::string>();
  }
  return s;
}

inline void save_scene(const std::filesystem::path& path, const Scene& s) {
  detail::write_file(path, scene_to_json(s).dump(2) + "\n");
}

inline Scene load_scene(const std::filesystem::path& path) {
  return scene_from_json(detail::parse_file(path));
}

// ---------------------------------------------------------------------------
// Ontology

inline Json ontology_to_json(const Ontology& o) {
  Json cats = Json::object();
  for (const auto& [category, labels] : o.entries())
    cats[category] = Json(labels);
  return Json{{"format_version", 1}, {"categories", std::move(cats)}};
}

inline Ontology ontology_from_json(const Json& j) {
  detail::check_version(j);
  const Json& cats = detail::need(j, "categories", "");
  if (!cats.is_object())
    throw InvariantViolationError("categories", "expected an object");
  Ontology o;
  for (const auto& [category, labels] : cats.items()) {
    if (!labels.is_array())
      throw InvariantViolationError("categories." + category,
                                    "expected an array of labels");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!labels[i].is_string())
        throw InvariantViolationError(
            "categories." + category + "[" + std::to_string(i) + "]",
            "expected a string");
      o.add(category, labels[i].get<std::string>());
    }
  }
  return o;
}

inline void save_ontology(const std::filesystem::path& path,
                          const Ontology& o) {
  detail::write_file(path, ontology_to_json(o).dump(2) + "\n");
}

inline Ontology load_ontology(const std::filesystem::path& path) {
  return ontology_from_json(detail::parse_file(path));
}

// ---------------------------------------------------------------------------
// Hand keypoint frames (.hand files hold one frame; datasets hold sequences)

inline Json frame_to_json(const HandKeypoints& h) {
  Json image = Json::array();
  for (const auto& p : h.image_coords) image.push_back(Json::array({p.u, p.v}));
  Json world = Json::array();
  for (const auto& p : h.world_coords) world.push_back(detail::vec3_json(p));
  return Json{{"image", std::move(image)},
              {"world", std::move(world)},
              {"confidence", h.confidence},
              {"t", h.timestamp}};
}

inline HandKeypoints frame_from_json(const Json& j, const std::string& at) {
  HandKeypoints h;
  const Json& image = detail::need_array(j, "image", at);
  if (static_cast<int>(image.size()) != kp::kCount)
    throw InvariantViolationError(detail::join_path(at, "image"),
                                  "expected 21 [u, v] keypoints");
  for (int k = 0; k < kp::kCount; ++k) {
    const Json& p = image[k];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() ||
        !p[1].is_number())
      throw InvariantViolationError(
          detail::join_path(at, "image[" + std::to_string(k) + "]"),
          "expected [u, v]");
    h.image_coords[k] = Pixel{p[0].get<double>(), p[1].get<double>()};
  }
  const Json& world = detail::need_array(j, "world", at);
  if (static_cast<int>(world.size()) != kp::kCount)
    throw InvariantViolationError(detail::join_path(at, "world"),
                                  "expected 21 [x, y, z] keypoints");
  for (int k = 0; k < kp::kCount; ++k)
    h.world_coords[k] = detail::vec3_at(
        world[k], detail::join_path(at, "world[" + std::to_string(k) + "]"));
  h.confidence = detail::need_number(j, "confidence", at);
  if (h.confidence < 0.0 || h.confidence > 1.0)
    throw InvariantViolationError(detail::join_path(at, "confidence"),
                                  "must be in [0, 1]");
  h.timestamp = detail::need_number(j, "t", at);
  return h;
}

inline void save_hand(const std::filesystem::path& path,
                      const HandKeypoints& h) {
  Json j = frame_to_json(h);
  j["format_version"] = 1;
  detail::write_file(path, j.dump(2) + "\n");
}

inline HandKeypoints load_hand(const std::filesystem::path& path) {
  Json j = detail::parse_file(path);
  detail::check_version(j);
  return frame_from_json(j, "");
}

// ---------------------------------------------------------------------------
// Gesture datasets: one sample per line

inline void save_gesture_samples(const std::filesystem::path& path,
                                 const std::vector<GestureSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    Json frames = Json::array();
    for (const auto& f : s.frames) frames.push_back(frame_to_json(f));
    Json j{{"label", gesture_id(s.label)}, {"frames", std::move(frames)}};
    out += j.dump() + "\n";
  }
  detail::write_file(path, out);
}

inline std::vector<GestureSample> load_gesture_samples(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileParseError(path.string() + ": file not found");
  std::vector<GestureSample> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw FileParseError(path.string() + ":" + std::to_string(lineno) +
                           ": " + e.what());
    }
    std::string at = "line " + std::to_string(lineno);
    GestureSample s;
    std::string label = detail::need_string(j, "label", at);
    auto cls = parse_gesture(label);
    if (!cls)
      throw InvariantViolationError(detail::join_path(at, "label"),
                                    "unknown gesture '" + label + "'");
    s.label = *cls;
    const Json& frames = detail::need_array(j, "frames", at);
    if (frames.empty())
      throw InvariantViolationError(detail::join_path(at, "frames"),
                                    "must be non-empty");
    for (std::size_t i = 0; i < frames.size(); ++i)
      s.frames.push_back(frame_from_json(
          frames[i],
          detail::join_path(at, "frames[" + std::to_string(i) + "]")));
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trained models

inline Json models_to_json(const GestureModels& m) {
  Json j;
  j["format_version"] = 1;
  j["camera"] = Json{{"fx", m.cam.fx},         {"fy", m.cam.fy},
                     {"cx", m.cam.cx},         {"cy", m.cam.cy},
                     {"width", m.cam.width},   {"height", m.cam.height}};
  j["static"] = Json{{"input_dim", m.static_model.input_dim},
                     {"h1", m.static_model.h1},
                     {"h2", m.static_model.h2},
                     {"classes", m.static_model.classes},
                     {"params", m.static_model.params}};
  j["dynamic"] = Json{{"input_dim", m.dynamic_model.input_dim},
                      {"hidden", m.dynamic_model.hidden},
                      {"classes", m.dynamic_model.classes},
                      {"params", m.dynamic_model.params}};
  return j;
}

inline GestureModels models_from_json(const Json& j) {
  detail::check_version(j);
  GestureModels m;
  const Json& cam = detail::need(j, "camera", "");
  m.cam.fx = detail::need_number(cam, "fx", "camera");
  m.cam.fy = detail::need_number(cam, "fy", "camera");
  m.cam.cx = detail::need_number(cam, "cx", "camera");
  m.cam.cy = detail::need_number(cam, "cy", "camera");
  m.cam.width = detail::need_int(cam, "width", "camera");
  m.cam.height = detail::need_int(cam, "height", "camera");

  const Json& st = detail::need(j, "static", "");
  m.static_model = MlpModel::zeros(detail::need_int(st, "input_dim", "static"),
                                   detail::need_int(st, "h1", "static"),
                                   detail::need_int(st, "h2", "static"),
                                   detail::need_int(st, "classes", "static"));
  const Json& sp = detail::need_array(st, "params", "static");
  if (sp.size() != m.static_model.param_count())
    throw InvariantViolationError("static.params", "parameter count mismatch");
  m.static_model.params = sp.get<std::vector<double>>();

  const Json& dy = detail::need(j, "dynamic", "");
  m.dynamic_model =
      LstmModel::zeros(detail::need_int(dy, "input_dim", "dynamic"),
                       detail::need_int(dy, "hidden", "dynamic"),
                       detail::need_int(dy, "classes", "dynamic"));
  const Json& dp = detail::need_array(dy, "params", "dynamic");
  if (dp.size() != m.dynamic_model.param_count())
    throw InvariantViolationError("dynamic.params", "parameter count mismatch");
  m.dynamic_model.params = dp.get<std::vector<double>>();
  return m;
}

inline void save_models(const std::filesystem::path& path,
                        const GestureModels& m) {
  detail::write_file(path, models_to_json(m).dump() + "\n");
}

inline GestureModels load_models(const std::filesystem::path& path) {
  return models_from_json(detail::parse_file(path));
}

// ---------------------------------------------------------------------------
// Scenario specs

inline Json scene_spec_to_json(const SceneSpec& s) {
  Json j;
  if (const auto* g = std::get_if<DrawerGridSpec>(&s.kind)) {
    j["type"] = "drawer_grid";
    j["rows"] = g->rows;
    j["cols"] = g->cols;
    j["spacing"] = g->spacing;
    j["origin"] = detail::vec3_json(g->origin);
  } else if (const auto* t = std::get_if<ToolBenchSpec>(&s.kind)) {
    j["type"] = "tool_bench";
    Json tools = Json::array();
    for (const auto& o : t->tools)
      tools.push_back(
          Json{{"label", o.label}, {"pos", detail::vec3_json(o.position)}});
    j["tools"] = std::move(tools);
  } else {
    const auto& r = std::get<RandomSceneSpec>(s.kind);
    j["type"] = "random";
    j["n_objects"] = r.n_objects;
    j["label_pool"] = r.label_pool;
    j["bounds_min"] = detail::vec3_json(r.bounds_min);
    j["bounds_max"] = detail::vec3_json(r.bounds_max);
  }
  j["seed"] = s.seed;
  return j;
}

inline SceneSpec scene_spec_from_json(const Json& j, const std::string& at) {
  SceneSpec s;
  std::string type = detail::need_string(j, "type", at);
  if (type == "drawer_grid") {
    DrawerGridSpec g;
    if (j.contains("rows")) g.rows = detail::need_int(j, "rows", at);
    if (j.contains("cols")) g.cols = detail::need_int(j, "cols", at);
    if (j.contains("spacing")) g.spacing = detail::need_number(j, "spacing", at);
    if (j.contains("origin"))
      g.origin = detail::vec3_at(j["origin"], detail::join_path(at, "origin"));
    s.kind = g;
  } else if (type == "tool_bench") {
    ToolBenchSpec t;
    const Json& tools = detail::need_array(j, "tools", at);
    for (std::size_t i = 0; i < tools.size(); ++i) {
      std::string tat = detail::join_path(at, "tools[" + std::to_string(i) + "]");
      ObjectEntry e;
      e.label = detail::need_string(tools[i], "label", tat);
      e.position =
          detail::vec3_at(detail::need(tools[i], "pos", tat), tat + ".pos");
      t.tools.push_back(std::move(e));
    }
    s.kind = t;
  } else if (type == "random") {
    RandomSceneSpec r;
    if (j.contains("n_objects"))
      r.n_objects = detail::need_int(j, "n_objects", at);
    if (j.contains("label_pool")) {
      const Json& pool = detail::need_array(j, "label_pool", at);
      r.label_pool.clear();
      for (const auto& l : pool) {
        if (!l.is_string())
          throw InvariantViolationError(detail::join_path(at, "label_pool"),
                                        "expected strings");
        r.label_pool.push_back(l.get<std::string>());
      }
    }
    if (j.contains("bounds_min"))
      r.bounds_min = detail::vec3_at(j["bounds_min"],
                                     detail::join_path(at, "bounds_min"));
    if (j.contains("bounds_max"))
      r.bounds_max = detail::vec3_at(j["bounds_max"],
                                     detail::join_path(at, "bounds_max"));
    s.kind = r;
  } else {
    throw InvariantViolationError(detail::join_path(at, "type"),
                                  "unknown scene type '" + type + "'");
  }
  if (j.contains("seed")) s.seed = detail::need_u64(j, "seed", at);
  return s;
}

inline Json goal_to_json(const GoalSpec& g) {
  if (const auto* ah = std::get_if<goal::ObjectAtHand>(&g))
    return Json{{"type", "object_at_hand"}, {"object", ah->object}};
  if (const auto* d = std::get_if<goal::DrawerOpen>(&g))
    return Json{{"type", "drawer_open"}, {"drawer", d->drawer}};
  if (const auto* oa = std::get_if<goal::ObjectAt>(&g))
    return Json{{"type", "object_at"},
                {"object", oa->object},
                {"pos", detail::vec3_json(oa->position)},
                {"tolerance", oa->tolerance}};
  const auto& gn = std::get<goal::GripperNear>(g);
  return Json{{"type", "gripper_near"},
              {"pos", detail::vec3_json(gn.position)},
              {"tolerance", gn.tolerance}};
}

inline GoalSpec goal_from_json(const Json& j, const std::string& at) {
  std::string type = detail::need_string(j, "type", at);
  if (type == "object_at_hand")
    return goal::ObjectAtHand{detail::need_string(j, "object", at)};
  if (type == "drawer_open")
    return goal::DrawerOpen{detail::need_string(j, "drawer", at)};
  if (type == "object_at") {
    goal::ObjectAt g;
    g.object = detail::need_string(j, "object", at);
    g.position =
        detail::vec3_at(detail::need(j, "pos", at), detail::join_path(at, "pos"));
    if (j.contains("tolerance"))
      g.tolerance = detail::need_number(j, "tolerance", at);
    return g;
  }
  if (type == "gripper_near") {
    goal::GripperNear g;
    g.position =
        detail::vec3_at(detail::need(j, "pos", at), detail::join_path(at, "pos"));
    if (j.contains("tolerance"))
      g.tolerance = detail::need_number(j, "tolerance", at);
    return g;
  }
  throw InvariantViolationError(detail::join_path(at, "type"),
                                "unknown goal type '" + type + "'");
}

inline Json gesture_script_to_json(const GestureScript& g) {
  Json j;
  j["class"] = gesture_id(g.cls);
  if (g.target) j["target"] = detail::vec3_json(*g.target);
  j["noise_sigma"] = g.noise_sigma;
  j["n_frames"] = g.n_frames;
  switch (g.fidelity) {
    case GestureScript::Fidelity::Label: j["fidelity"] = "label"; break;
    case GestureScript::Fidelity::Description:
      j["fidelity"] = "description";
      break;
    case GestureScript::Fidelity::Numeric: j["fidelity"] = "numeric"; break;
  }
  if (!g.description.empty()) j["description"] = g.description;
  return j;
}

inline GestureScript gesture_script_from_json(const Json& j,
                                              const std::string& at) {
  GestureScript g;
  std::string cls = detail::need_string(j, "class", at);
  auto parsed = parse_gesture(cls);
  if (!parsed || *parsed == GestureClass::Unknown)
    throw InvariantViolationError(detail::join_path(at, "class"),
                                  "unknown gesture '" + cls + "'");
  g.cls = *parsed;
  if (j.contains("target"))
    g.target = detail::vec3_at(j["target"], detail::join_path(at, "target"));
  if (j.contains("noise_sigma"))
    g.noise_sigma = detail::need_number(j, "noise_sigma", at);
  if (j.contains("n_frames")) g.n_frames = detail::need_int(j, "n_frames", at);
  if (j.contains("fidelity")) {
    std::string f = detail::need_string(j, "fidelity", at);
    if (f == "label") {
      g.fidelity = GestureScript::Fidelity::Label;
    } else if (f == "description") {
      g.fidelity = GestureScript::Fidelity::Description;
    } else if (f == "numeric") {
      g.fidelity = GestureScript::Fidelity::Numeric;
    } else {
      throw InvariantViolationError(detail::join_path(at, "fidelity"),
                                    "expected label, description or numeric");
    }
  }
  if (j.contains("description"))
    g.description = detail::need_string(j, "description", at);
  return g;
}

inline Json scenario_to_json(const ScenarioSpec& spec) {
  Json j;
  j["format_version"] = 1;
  j["id"] = spec.id;
  j["scene"] = scene_spec_to_json(spec.scene);
  if (!spec.ontology.entries().empty()) {
    Json cats = Json::object();
    for (const auto& [category, labels] : spec.ontology.entries())
      cats[category] = Json(labels);
    j["ontology"] = std::move(cats);
  }
  Json script = Json::array();
  for (const auto& si : spec.script) {
    Json s;
    s["speech"] = si.speech;
    if (si.gesture) s["gesture"] = gesture_script_to_json(*si.gesture);
    if (si.truth_object) s["truth_object"] = *si.truth_object;
    if (si.truth_position)
      s["truth_position"] = detail::vec3_json(*si.truth_position);
    script.push_back(std::move(s));
  }
  j["script"] = std::move(script);
  j["goal"] = goal_to_json(spec.goal);
  j["backend"] = spec.backend;
  if (!spec.transcript_dir.empty())
    j["transcript_dir"] = spec.transcript_dir.generic_string();
  j["seed"] = spec.seed;
  j["max_trials"] = spec.max_trials;
  j["confirm_tolerance"] = spec.confirm_tolerance;
  return j;
}

inline ScenarioSpec scenario_from_json(const Json& j) {
  detail::check_version(j);
  ScenarioSpec spec;
  spec.id = detail::need_string(j, "id", "");
  spec.scene = scene_spec_from_json(detail::need(j, "scene", ""), "scene");
  if (j.contains("ontology")) {
    const Json& cats = j["ontology"];
    if (!cats.is_object())
      throw InvariantViolationError("ontology", "expected an object");
    for (const auto& [category, labels] : cats.items()) {
      if (!labels.is_array())
        throw InvariantViolationError("ontology." + category,
                                      "expected an array of labels");
      for (const auto& l : labels) {
        if (!l.is_string())
          throw InvariantViolationError("ontology." + category,
                                        "expected strings");
        spec.ontology.add(category, l.get<std::string>());
      }
    }
  }
  const Json& script = detail::need_array(j, "script", "");
  for (std::size_t i = 0; i < script.size(); ++i) {
    std::string at = "script[" + std::to_string(i) + "]";
    ScriptedInstruction si;
    si.speech = detail::need_string(script[i], "speech", at);
    if (script[i].contains("gesture"))
      si.gesture = gesture_script_from_json(script[i]["gesture"],
                                            at + ".gesture");
    if (script[i].contains("truth_object"))
      si.truth_object = detail::need_string(script[i], "truth_object", at);
    if (script[i].contains("truth_position"))
      si.truth_position = detail::vec3_at(script[i]["truth_position"],
                                          at + ".truth_position");
    spec.script.push_back(std::move(si));
  }
  spec.goal = goal_from_json(detail::need(j, "goal", ""), "goal");
  if (j.contains("backend"))
    spec.backend = detail::need_string(j, "backend", "");
  if (j.contains("transcript_dir"))
    spec.transcript_dir = detail::need_string(j, "transcript_dir", "");
  if (j.contains("seed")) spec.seed = detail::need_u64(j, "seed", "");
  if (j.contains("max_trials"))
    spec.max_trials = detail::need_int(j, "max_trials", "");
  if (j.contains("confirm_tolerance"))
    spec.confirm_tolerance = detail::need_number(j, "confirm_tolerance", "");
  return spec;
}

inline void save_scenario(const std::filesystem::path& path,
                          const ScenarioSpec& spec) {
  detail::write_file(path, scenario_to_json(spec).dump(2) + "\n");
}

// Relative transcript directories are resolved against the scenario file.
inline ScenarioSpec load_scenario(const std::filesystem::path& path) {
  ScenarioSpec spec = scenario_from_json(detail::parse_file(path));
  if (!spec.transcript_dir.empty() && spec.transcript_dir.is_relative())
    spec.transcript_dir = path.parent_path() / spec.transcript_dir;
  return spec;
}

// ---------------------------------------------------------------------------
// GestureInstruct fixtures

inline Json gi_cases_to_json(const std::vector<GestureInstructCase>& cases) {
  Json arr = Json::array();
  for (const auto& c : cases) {
    Json j;
    j["id"] = c.id;
    j["gesture_type"] = c.gesture_type;
    j["gesture_label"] = c.gesture_label;
    j["description"] = c.description;
    if (c.instruction) j["instruction"] = *c.instruction;
    if (!c.context.empty()) j["context"] = c.context;
    j["expected_call"] = c.expected_call;
    j["expected_arg_kind"] = value_kind_name(c.expected_arg_kind);
    arr.push_back(std::move(j));
  }
  return Json{{"format_version", 1}, {"cases", std::move(arr)}};
}

inline std::vector<GestureInstructCase> gi_cases_from_json(const Json& j) {
  detail::check_version(j);
  const Json& arr = detail::need_array(j, "cases", "");
  std::vector<GestureInstructCase> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string at = "cases[" + std::to_string(i) + "]";
    GestureInstructCase c;
    c.id = detail::need_string(arr[i], "id", at);
    c.gesture_type = detail::need_string(arr[i], "gesture_type", at);
    c.gesture_label = detail::need_string(arr[i], "gesture_label", at);
    c.description = detail::need_string(arr[i], "description", at);
    if (arr[i].contains("instruction"))
      c.instruction = detail::need_string(arr[i], "instruction", at);
    if (arr[i].contains("context"))
      c.context = detail::need_string(arr[i], "context", at);
    c.expected_call = detail::need_string(arr[i], "expected_call", at);
    std::string kind = detail::need_string(arr[i], "expected_arg_kind", at);
    auto parsed = parse_value_kind(kind);
    if (!parsed)
      throw InvariantViolationError(at + ".expected_arg_kind",
                                    "unknown value kind '" + kind + "'");
    c.expected_arg_kind = *parsed;
    out.push_back(std::move(c));
  }
  return out;
}

inline void save_gesture_instruct(const std::filesystem::path& path,
                                  const std::vector<GestureInstructCase>& cs) {
  detail::write_file(path, gi_cases_to_json(cs).dump(2) + "\n");
}

inline std::vector<GestureInstructCase> load_gesture_instruct(
    const std::filesystem::path& path) {
  return gi_cases_from_json(detail::parse_file(path));
}

// ---------------------------------------------------------------------------
// Reports

inline std::string metrics_text(const std::string& id, const Metrics& m) {
  std::string out;
  out += "scenario: " + id + "\n";
  out += std::string("planning_success: ") +
         (m.planning_success ? "true" : "false") + "\n";
  out += std::string("execution_success: ") +
         (m.execution_success ? "true" : "false") + "\n";
  out += "trials_used: " + std::to_string(m.trials_used) + "\n";
  out += "trace:\n";
  for (const auto& t : m.trace)
    out += "  [trial " + std::to_string(t.trial) + " ins " +
           std::to_string(t.instruction) + "] " + t.kind + " " + t.detail +
           "\n";
  return out;
}

inline constexpr const char* kMetricsCsvHeader =
    "id,planning_success,execution_success,trials_used";

inline std::string metrics_csv_row(const std::string& id, const Metrics& m) {
  return id + "," + (m.planning_success ? "1" : "0") + "," +
         (m.execution_success ? "1" : "0") + "," +
         std::to_string(m.trials_used);
}

inline std::string sweep_csv(const SweepResult& r) {
  std::string out = "spacing,distance,correct,trials,accuracy\n";
  for (const auto& c : r.cells)
    out += detail::format_number(c.spacing) + "," +
           detail::format_number(c.distance) + "," + std::to_string(c.correct) +
           "," + std::to_string(c.trials) + "," +
           detail::format_number(c.accuracy) + "\n";
  return out;
}

inline std::string gi_report_text(const GiReport& rep) {
  std::string out;
  for (std::size_t i = 0; i < kGestureTypes.size(); ++i)
    out += kGestureTypes[i] + ": " + std::to_string(rep.correct[i]) + "/" +
           std::to_string(rep.total[i]) + "\n";
  out += "overall: " + std::to_string(rep.overall_correct) + "/" +
         std::to_string(rep.overall_total) + "\n";
  return out;
}

inline std::string gi_report_csv(const GiReport& rep) {
  std::string out = "id,gesture_type,planned_call,correct\n";
  for (const auto& c : rep.cases)
    out += c.id + "," + c.gesture_type + "," + c.planned_call + "," +
           (c.correct ? "1" : "0") + "\n";
  return out;
}

}  // namespace giraf
