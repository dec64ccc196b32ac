#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "giraf/error.hpp"
#include "giraf/geometry.hpp"
#include "giraf/hand.hpp"
#include "giraf/policy.hpp"
#include "giraf/scene.hpp"

namespace giraf {

// Kinematic tolerances: grasp/drawer matching radius and the "at hand"
// radius used by the ObjectAtHand goal.
inline constexpr double kGraspRadius = 0.02;
inline constexpr double kDrawerRadius = 0.02;
inline constexpr double kAtHandRadius = 0.05;

struct SimObject {
  std::string label;
  Vec3 position;
  bool held = false;
  bool operator==(const SimObject&) const = default;
};

struct Drawer {
  Vec3 position;
  bool open = false;
  bool operator==(const Drawer&) const = default;
};

struct Gripper {
  Vec3 position{0.0, -0.3, 0.6};
  bool open = true;
  std::optional<std::string> holding;
  bool operator==(const Gripper&) const = default;
};

struct WorldState {
  std::map<std::string, SimObject> objects;
  std::map<std::string, Drawer> drawers;
  Gripper gripper;
  std::optional<HandKeypoints> human_hand;
};

inline void validate_world(const WorldState& w) {
  int held = 0;
  for (const auto& [id, o] : w.objects)
    if (o.held) ++held;
  if (held > 1) throw InvalidSpecError("more than one object is held");
  if (w.gripper.holding) {
    auto it = w.objects.find(*w.gripper.holding);
    if (it == w.objects.end())
      throw InvalidSpecError("gripper holds unknown object '" +
                             *w.gripper.holding + "'");
    if (!it->second.held)
      throw InvalidSpecError("held flag out of sync on '" + it->first + "'");
    if (!(it->second.position == w.gripper.position))
      throw InvalidSpecError("held object must track the gripper");
    if (held != 1) throw InvalidSpecError("held count out of sync");
  } else if (held != 0) {
    throw InvalidSpecError("held object without a holding gripper");
  }
}

// Objects labelled drawer_* become drawers, everything else a graspable
// object. Duplicate labels get a numeric suffix so ids stay unique.
inline WorldState world_from_scene(const Scene& scene) {
  WorldState w;
  auto unique_id = [](const auto& taken, const std::string& label) {
    if (!taken.count(label)) return label;
    for (int i = 2;; ++i) {
      std::string candidate = label + "_" + std::to_string(i);
      if (!taken.count(candidate)) return candidate;
    }
  };
  for (const auto& o : scene.objects) {
    if (o.label.rfind("drawer", 0) == 0) {
      w.drawers[unique_id(w.drawers, o.label)] = Drawer{o.position, false};
    } else {
      std::string id = unique_id(w.objects, o.label);
      w.objects[id] = SimObject{o.label, o.position, false};
    }
  }
  return w;
}

namespace goal {

struct ObjectAtHand {
  std::string object;  // id or label
};
struct DrawerOpen {
  std::string drawer;
};
struct ObjectAt {
  std::string object;
  Vec3 position;
  double tolerance = 0.01;
};
struct GripperNear {
  Vec3 position;
  double tolerance = 0.01;
};

}  // namespace goal

using GoalSpec = std::variant<goal::ObjectAtHand, goal::DrawerOpen,
                              goal::ObjectAt, goal::GripperNear>;

inline void validate_goal(const GoalSpec& g) {
  if (const auto* oa = std::get_if<goal::ObjectAt>(&g)) {
    if (oa->tolerance <= 0.0)
      throw InvalidSpecError("ObjectAt tolerance must be > 0");
  } else if (const auto* gn = std::get_if<goal::GripperNear>(&g)) {
    if (gn->tolerance <= 0.0)
      throw InvalidSpecError("GripperNear tolerance must be > 0");
  }
}

inline const SimObject* find_object(const WorldState& w,
                                    const std::string& key) {
  auto it = w.objects.find(key);
  if (it != w.objects.end()) return &it->second;
  std::string k = label_key(key);
  for (const auto& [id, o] : w.objects)
    if (label_key(o.label) == k) return &o;
  return nullptr;
}

inline bool check_goal(const WorldState& w, const GoalSpec& g) {
  if (const auto* ah = std::get_if<goal::ObjectAtHand>(&g)) {
    const SimObject* obj = find_object(w, ah->object);
    if (!obj || !w.human_hand) return false;
    return norm(obj->position - hand_center(*w.human_hand)) <= kAtHandRadius;
  }
  if (const auto* d = std::get_if<goal::DrawerOpen>(&g)) {
    auto it = w.drawers.find(d->drawer);
    return it != w.drawers.end() && it->second.open;
  }
  if (const auto* oa = std::get_if<goal::ObjectAt>(&g)) {
    const SimObject* obj = find_object(w, oa->object);
    return obj && norm(obj->position - oa->position) <= oa->tolerance;
  }
  const auto& gn = std::get<goal::GripperNear>(g);
  return norm(w.gripper.position - gn.position) <= gn.tolerance;
}

// Closures the interpreter calls for the perception functions; the scenario
// runner builds them over (scene, detected hand).
struct PerceptionBindings {
  std::function<Vec3(const std::string&)> referred_obj_pos;
  std::function<Vec3()> referred_location;
  std::function<Vec3()> referred_direction;
  std::function<Vec3()> hand_center_pos;
};

struct TraceEvent {
  std::string call;
  std::vector<std::string> args;
  std::string outcome;  // "ok" or a failure tag like "GraspFailure"
};

struct ExecResult {
  WorldState world;
  std::vector<TraceEvent> trace;
  std::vector<std::string> utterances;

  bool all_ok() const {
    for (const auto& e : trace)
      if (e.outcome != "ok") return false;
    return true;
  }
};

namespace detail {

struct RtValue {
  ValueKind kind = ValueKind::Void;
  Vec3 vec{};
  double num = 0.0;
  std::string str;
};

inline std::string format_vec3(const Vec3& v) {
  return "(" + format_number(v.x) + ", " + format_number(v.y) + ", " +
         format_number(v.z) + ")";
}

inline std::string format_rt(const RtValue& v) {
  switch (v.kind) {
    case ValueKind::Position:
    case ValueKind::Direction:
      return format_vec3(v.vec);
    case ValueKind::Scalar:
      return format_number(v.num);
    case ValueKind::String:
      return "'" + v.str + "'";
    case ValueKind::Void:
      return "void";
  }
  return "void";
}

class Interpreter {
 public:
  Interpreter(const PerceptionBindings& bind, ExecResult& res)
      : bind_(bind), res_(res) {}

  void run(const PolicyProgram& prog) {
    for (const auto& st : prog.statements) {
      if (std::holds_alternative<Comment>(st.node)) continue;
      if (const auto* a = std::get_if<Assign>(&st.node)) {
        env_[a->name] = eval(a->value);
      } else {
        eval_call(std::get<ExprStatement>(st.node).call);
      }
    }
  }

 private:
  RtValue eval(const Expr& e) {
    if (const auto* s = std::get_if<StringLit>(&e.node)) {
      RtValue v;
      v.kind = ValueKind::String;
      v.str = s->value;
      return v;
    }
    if (const auto* n = std::get_if<NumberLit>(&e.node)) {
      RtValue v;
      v.kind = ValueKind::Scalar;
      v.num = n->value;
      return v;
    }
    if (const auto* id = std::get_if<Identifier>(&e.node)) {
      auto it = env_.find(id->name);
      if (it == env_.end())
        throw std::logic_error("unbound identifier '" + id->name +
                               "' reached the interpreter");
      return it->second;
    }
    return eval_call(std::get<Call>(e.node));
  }

  RtValue eval_call(const Call& c) {
    std::vector<RtValue> args;
    args.reserve(c.args.size());
    for (const auto& a : c.args) args.push_back(eval(a));
    if (c.name == "detect_referred_obj_pos")
      return perceive(c.name, {args.at(0)},
                      [&] { return require(bind_.referred_obj_pos,
                                           c.name)(args.at(0).str); },
                      ValueKind::Position);
    if (c.name == "detect_referred_location")
      return perceive(c.name, {},
                      [&] { return require(bind_.referred_location, c.name)(); },
                      ValueKind::Position);
    if (c.name == "detect_referred_direction")
      return perceive(c.name, {},
                      [&] { return require(bind_.referred_direction,
                                           c.name)(); },
                      ValueKind::Direction);
    if (c.name == "detect_hand_center_pos")
      return perceive(c.name, {},
                      [&] { return require(bind_.hand_center_pos, c.name)(); },
                      ValueKind::Position);
    apply_action(c.name, args);
    return RtValue{};
  }

  template <typename Fn>
  const Fn& require(const Fn& fn, const std::string& name) {
    if (!fn)
      throw InvalidSpecError("no perception binding for '" + name +
                             "' (was a gesture detected?)");
    return fn;
  }

  template <typename Get>
  RtValue perceive(const std::string& name, std::vector<RtValue> args,
                   Get&& get, ValueKind kind) {
    TraceEvent ev;
    ev.call = name;
    for (const auto& a : args) ev.args.push_back(format_rt(a));
    try {
      Vec3 p = get();
      ev.outcome = "ok";
      res_.trace.push_back(std::move(ev));
      RtValue v;
      v.kind = kind;
      v.vec = p;
      return v;
    } catch (const Error& e) {
      ev.outcome = e.code();
      res_.trace.push_back(std::move(ev));
      throw;
    }
  }

  void sync_held() {
    WorldState& w = res_.world;
    if (w.gripper.holding)
      w.objects.at(*w.gripper.holding).position = w.gripper.position;
  }

  // Nearest free object / drawer within the match radius; ties go to the
  // smallest id (map order).
  std::string nearest_object(const Vec3& p) const {
    const WorldState& w = res_.world;
    std::string best;
    double best_d = 0.0;
    for (const auto& [id, o] : w.objects) {
      if (o.held) continue;
      double d = norm(o.position - p);
      if (d <= kGraspRadius && (best.empty() || d < best_d)) {
        best = id;
        best_d = d;
      }
    }
    return best;
  }

  std::string nearest_drawer(const Vec3& p) const {
    const WorldState& w = res_.world;
    std::string best;
    double best_d = 0.0;
    for (const auto& [id, d] : w.drawers) {
      double dist = norm(d.position - p);
      if (dist <= kDrawerRadius && (best.empty() || dist < best_d)) {
        best = id;
        best_d = dist;
      }
    }
    return best;
  }

  void apply_action(const std::string& name, const std::vector<RtValue>& args) {
    WorldState& w = res_.world;
    TraceEvent ev;
    ev.call = name;
    for (const auto& a : args) ev.args.push_back(format_rt(a));
    ev.outcome = "ok";

    if (name == "move_gripper_to_pos") {
      w.gripper.position = args.at(0).vec;
      sync_held();
    } else if (name == "move_gripper_by_dir") {
      Vec3 d = args.at(0).vec;
      double n = norm(d);
      if (n > 1e-12) d = d / n;
      w.gripper.position = w.gripper.position + d * args.at(1).num;
      sync_held();
    } else if (name == "open_gripper") {
      w.gripper.open = true;
      if (w.gripper.holding) {
        w.objects.at(*w.gripper.holding).held = false;
        w.gripper.holding.reset();
      }
    } else if (name == "close_gripper") {
      w.gripper.open = false;
      if (!w.gripper.holding) {
        std::string id = nearest_object(w.gripper.position);
        if (!id.empty()) {
          w.gripper.holding = id;
          w.objects.at(id).held = true;
          sync_held();
        }
      }
    } else if (name == "pick_up_obj_at_pos") {
      std::string id;
      if (!w.gripper.holding) id = nearest_object(args.at(0).vec);
      if (id.empty()) {
        ev.outcome = "GraspFailure";  // world left untouched
      } else {
        w.gripper.position = w.objects.at(id).position;
        w.gripper.open = false;
        w.gripper.holding = id;
        w.objects.at(id).held = true;
      }
    } else if (name == "place_obj_at_pos") {
      if (!w.gripper.holding) {
        ev.outcome = "NothingHeld";
      } else {
        w.gripper.position = args.at(0).vec;
        sync_held();
        w.objects.at(*w.gripper.holding).held = false;
        w.gripper.holding.reset();
        w.gripper.open = true;
      }
    } else if (name == "open_drawer_at_pos") {
      std::string id = nearest_drawer(args.at(0).vec);
      if (id.empty()) {
        ev.outcome = "NoDrawerAtPos";
      } else {
        w.drawers.at(id).open = true;
        w.gripper.position = w.drawers.at(id).position;
        sync_held();
      }
    } else if (name == "say") {
      res_.utterances.push_back(args.at(0).str);
    } else if (name == "stop" || name == "twist_gripper") {
      // kinematic no-ops
    } else {
      throw std::logic_error("unknown function '" + name +
                             "' reached the interpreter");
    }
    res_.trace.push_back(std::move(ev));
  }

  const PerceptionBindings& bind_;
  ExecResult& res_;
  std::map<std::string, RtValue> env_;
};

}  // namespace detail

// Runs a validated program against the world. Action failures are recorded
// in the trace (the world is left untouched by the failing call); perception
// failures are recorded and then rethrown since no value can be produced.
inline ExecResult execute(const PolicyProgram& prog, WorldState world,
                          const PerceptionBindings& bindings) {
  ExecResult res;
  res.world = std::move(world);
  detail::Interpreter interp(bindings, res);
  interp.run(prog);
  return res;
}

}  // namespace giraf
