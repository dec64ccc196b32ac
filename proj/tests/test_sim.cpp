#include "giraf/sim.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "fixtures.hpp"
#include "giraf/policy.hpp"
#include "giraf/rng.hpp"
#include "giraf/synth.hpp"

using namespace giraf;

namespace {

WorldState table_world() {
  WorldState w;
  w.objects["water_jug"] = SimObject{"water_jug", Vec3{0.1, 0.1, 1.0}, false};
  w.objects["mug"] = SimObject{"mug", Vec3{-0.2, 0.1, 1.1}, false};
  return w;
}

PerceptionBindings table_bindings(const WorldState& w, const Vec3& hand) {
  PerceptionBindings b;
  b.referred_obj_pos = [&w](const std::string& q) {
    const SimObject* o = find_object(w, q);
    if (!o) throw NoCandidatesError(q);
    return o->position;
  };
  b.referred_location = [hand] { return hand; };
  b.referred_direction = [] { return Vec3{0.0, 0.0, 1.0}; };
  b.hand_center_pos = [hand] { return hand; };
  return b;
}

}  // namespace

TEST_CASE("water-jug listing runs end to end", "[sim]") {
  WorldState w = table_world();
  auto palm = synth_gesture(GestureClass::OpenPalmUp, 0.0, 1, 7);
  w.human_hand = palm.back();
  const Vec3 hand = hand_center(palm.back());

  PolicyProgram prog = parse_policy(fixtures::kWaterJugListing);
  ExecResult r = execute(prog, w, table_bindings(w, hand));

  CHECK(r.all_ok());
  CHECK(r.world.objects.at("water_jug").position == hand);
  CHECK_FALSE(r.world.objects.at("water_jug").held);
  CHECK_FALSE(r.world.gripper.holding.has_value());
  CHECK(r.world.gripper.open);
  CHECK(r.world.objects.at("mug").position == Vec3{-0.2, 0.1, 1.1});
  CHECK(check_goal(r.world, goal::ObjectAtHand{"water_jug"}));

  std::vector<std::string> calls;
  for (const auto& e : r.trace) calls.push_back(e.call);
  CHECK(calls == std::vector<std::string>{
                     "detect_referred_obj_pos", "pick_up_obj_at_pos",
                     "detect_hand_center_pos", "move_gripper_to_pos",
                     "open_gripper"});
}

TEST_CASE("grasp failure leaves the world untouched", "[sim]") {
  WorldState w = table_world();
  PerceptionBindings b = table_bindings(w, Vec3{0.9, 0.9, 0.9});

  // The "referred location" is nowhere near an object, so the pick fails.
  PolicyProgram prog = parse_policy(
      "obj_pos = detect_referred_location()\npick_up_obj_at_pos(obj_pos)\n");
  ExecResult r = execute(prog, w, b);

  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace[1].call == "pick_up_obj_at_pos");
  CHECK(r.trace[1].outcome == "GraspFailure");
  CHECK_FALSE(r.all_ok());
  CHECK(r.world.objects == w.objects);
  CHECK(r.world.drawers == w.drawers);
  CHECK(r.world.gripper == w.gripper);
}

TEST_CASE("picking while holding is a grasp failure", "[sim]") {
  WorldState w = table_world();
  PerceptionBindings b;
  b.referred_obj_pos = [&w](const std::string& q) {
    return w.objects.at(q).position;
  };
  PolicyProgram prog = parse_policy(
      "a = detect_referred_obj_pos('water_jug')\n"
      "pick_up_obj_at_pos(a)\n"
      "b = detect_referred_obj_pos('mug')\n"
      "pick_up_obj_at_pos(b)\n");
  ExecResult r = execute(prog, w, b);

  REQUIRE(r.trace.size() == 4);
  CHECK(r.trace[1].outcome == "ok");
  CHECK(r.trace[3].outcome == "GraspFailure");
  CHECK(r.world.gripper.holding == "water_jug");
  CHECK_FALSE(r.world.objects.at("mug").held);
}

TEST_CASE("placing with an empty gripper reports NothingHeld", "[sim]") {
  WorldState w = table_world();
  PerceptionBindings b = table_bindings(w, Vec3{0.0, 0.0, 1.0});
  PolicyProgram prog = parse_policy(
      "p = detect_referred_location()\nplace_obj_at_pos(p)\n");
  ExecResult r = execute(prog, w, b);
  CHECK(r.trace[1].outcome == "NothingHeld");
  CHECK(r.world.objects == w.objects);
}

TEST_CASE("opening a drawer flips exactly one drawer", "[sim]") {
  Scene scene = generate_scene(SceneSpec{DrawerGridSpec{}, 0});
  WorldState w = world_from_scene(scene);
  REQUIRE(w.drawers.size() == 64);
  REQUIRE(w.objects.empty());

  const Vec3 target{0.05, -0.15, 1.2};  // drawer_3_5 center
  PerceptionBindings b;
  b.referred_obj_pos = [target](const std::string&) { return target; };
  PolicyProgram prog = parse_policy(
      "drawer_pos = detect_referred_obj_pos('drawer')\n"
      "open_drawer_at_pos(drawer_pos)\n");
  ExecResult r = execute(prog, w, b);

  CHECK(r.all_ok());
  int open = 0;
  for (const auto& [id, d] : r.world.drawers) open += d.open ? 1 : 0;
  CHECK(open == 1);
  CHECK(r.world.drawers.at("drawer_3_5").open);
  CHECK(check_goal(r.world, goal::DrawerOpen{"drawer_3_5"}));
  CHECK_FALSE(check_goal(r.world, goal::DrawerOpen{"drawer_3_6"}));

  // No drawer within 2 cm of an off-grid point.
  WorldState w2 = world_from_scene(scene);
  b.referred_obj_pos = [](const std::string&) {
    return Vec3{0.0, -0.15, 1.2};  // 5 cm off the nearest center
  };
  ExecResult r2 = execute(prog, w2, b);
  CHECK(r2.trace[1].outcome == "NoDrawerAtPos");
  CHECK(r2.world.drawers == w2.drawers);
}

TEST_CASE("close_gripper grasps only within reach", "[sim]") {
  WorldState w = table_world();
  w.gripper.position = Vec3{0.1, 0.1, 1.015};  // 1.5 cm above the jug
  ExecResult r = execute(parse_policy("close_gripper()\n"), w, {});
  CHECK(r.world.gripper.holding == "water_jug");
  CHECK(r.world.objects.at("water_jug").held);
  // Held object teleports with the gripper from now on.
  CHECK(r.world.objects.at("water_jug").position == r.world.gripper.position);

  WorldState far = table_world();
  far.gripper.position = Vec3{0.1, 0.1, 0.9};  // 10 cm away
  ExecResult r2 = execute(parse_policy("close_gripper()\n"), far, {});
  CHECK(r2.all_ok());  // closing on air is fine
  CHECK_FALSE(r2.world.gripper.holding.has_value());
}

TEST_CASE("move_gripper_by_dir normalizes the direction", "[sim]") {
  WorldState w = table_world();
  w.gripper.position = Vec3{0.0, 0.0, 0.5};
  PerceptionBindings b;
  b.referred_direction = [] { return Vec3{0.0, 0.0, 2.0}; };
  PolicyProgram prog = parse_policy(
      "d = detect_referred_direction()\nmove_gripper_by_dir(d, 0.1)\n");
  ExecResult r = execute(prog, w, b);
  CHECK(norm(r.world.gripper.position - Vec3{0.0, 0.0, 0.6}) < 1e-12);
}

TEST_CASE("say collects utterances; stop and twist are no-ops", "[sim]") {
  WorldState w = table_world();
  ExecResult r = execute(
      parse_policy("say('how should I correct it')\nstop()\ntwist_gripper()\n"),
      w, {});
  CHECK(r.utterances == std::vector<std::string>{"how should I correct it"});
  CHECK(r.all_ok());
  CHECK(r.world.objects == w.objects);
  CHECK(r.world.gripper == w.gripper);
}

TEST_CASE("interpreter rejects what the validator would have", "[sim]") {
  WorldState w = table_world();
  // Unknown function and unbound identifier are programming errors here,
  // not domain errors: the validator runs before execute.
  CHECK_THROWS_AS(execute(parse_policy("frobnicate()\n"), w, {}),
                  std::logic_error);
  CHECK_THROWS_AS(execute(parse_policy("move_gripper_to_pos(ghost)\n"), w, {}),
                  std::logic_error);
  // A missing perception binding is a domain error (no gesture was seen).
  CHECK_THROWS_AS(
      execute(parse_policy("p = detect_referred_location()\n"), w, {}),
      InvalidSpecError);
}

TEST_CASE("perception errors are traced then rethrown", "[sim]") {
  WorldState w = table_world();
  PerceptionBindings b;
  b.referred_obj_pos = [](const std::string& q) -> Vec3 {
    throw NoCandidatesError(q);
  };
  PolicyProgram prog = parse_policy(
      "p = detect_referred_obj_pos('wrench')\npick_up_obj_at_pos(p)\n");
  CHECK_THROWS_AS(execute(prog, w, b), NoCandidatesError);
}

TEST_CASE("world_from_scene splits drawers from objects", "[sim]") {
  Scene scene;
  scene.objects = {ObjectEntry{"drawer_1_1", Vec3{0, 0, 1}},
                   ObjectEntry{"cup", Vec3{0.1, 0, 1}},
                   ObjectEntry{"cup", Vec3{0.2, 0, 1}}};
  WorldState w = world_from_scene(scene);
  CHECK(w.drawers.size() == 1);
  REQUIRE(w.objects.size() == 2);
  CHECK(w.objects.count("cup") == 1);
  CHECK(w.objects.count("cup_2") == 1);  // duplicate label, distinct id
  CHECK(w.objects.at("cup_2").label == "cup");
}

TEST_CASE("goal checks and world validation", "[sim]") {
  WorldState w = table_world();
  CHECK(check_goal(w, goal::ObjectAt{"water_jug", Vec3{0.1, 0.1, 1.0}, 0.01}));
  CHECK_FALSE(
      check_goal(w, goal::ObjectAt{"water_jug", Vec3{0.1, 0.1, 1.1}, 0.01}));
  CHECK_FALSE(check_goal(w, goal::ObjectAt{"ghost", Vec3{}, 0.01}));
  w.gripper.position = Vec3{0.3, 0.0, 0.9};
  CHECK(check_goal(w, goal::GripperNear{Vec3{0.3, 0.0, 0.9}, 0.001}));
  CHECK_FALSE(check_goal(w, goal::ObjectAtHand{"water_jug"}));  // no hand

  CHECK_THROWS_AS(validate_goal(GoalSpec{goal::GripperNear{Vec3{}, 0.0}}),
                  InvalidSpecError);
  CHECK_THROWS_AS(validate_goal(GoalSpec{goal::ObjectAt{"x", Vec3{}, -1.0}}),
                  InvalidSpecError);

  // find_object matches ids first, then normalized labels.
  CHECK(find_object(w, "water jug") != nullptr);
  CHECK(find_object(w, "Water Jug") != nullptr);
  CHECK(find_object(w, "spanner") == nullptr);

  WorldState bad = table_world();
  bad.objects.at("mug").held = true;
  CHECK_THROWS_AS(validate_world(bad), InvalidSpecError);
  bad.objects.at("mug").held = false;
  bad.gripper.holding = "ghost";
  CHECK_THROWS_AS(validate_world(bad), InvalidSpecError);
  CHECK_NOTHROW(validate_world(table_world()));
}

TEST_CASE("random action sequences preserve world invariants", "[sim]") {
  auto rng = make_rng(20260823u);
  std::uniform_real_distribution<double> coord(-0.4, 0.4);
  std::uniform_int_distribution<int> op_pick(0, 6);
  std::uniform_int_distribution<int> obj_pick(0, 3);

  for (int iter = 0; iter < 200; ++iter) {
    WorldState w;
    for (int k = 0; k < 4; ++k) {
      std::string id = "obj_" + std::to_string(k);
      w.objects[id] =
          SimObject{id, Vec3{coord(rng), coord(rng), 1.0 + coord(rng)}, false};
    }
    w.drawers["drawer_1_1"] = Drawer{Vec3{0.0, 0.0, 1.2}, false};
    const std::size_t n_objects = w.objects.size();

    // The "perception" returns either an exact object center or a random
    // point, so picks sometimes succeed and sometimes fail.
    std::vector<Vec3> targets;
    for (const auto& [id, o] : w.objects) targets.push_back(o.position);
    auto random_point = [&]() -> Vec3 {
      if (op_pick(rng) < 3) return targets[obj_pick(rng)];
      return Vec3{coord(rng), coord(rng), 1.0 + coord(rng)};
    };

    std::string src;
    int var = 0;
    for (int step = 0; step < 12; ++step) {
      std::string v = "p" + std::to_string(var++);
      switch (op_pick(rng)) {
        case 0:
          src += v + " = detect_referred_location()\npick_up_obj_at_pos(" +
                 v + ")\n";
          break;
        case 1:
          src += v + " = detect_referred_location()\nplace_obj_at_pos(" + v +
                 ")\n";
          break;
        case 2:
          src += v + " = detect_referred_location()\nmove_gripper_to_pos(" +
                 v + ")\n";
          break;
        case 3:
          src += "open_gripper()\n";
          break;
        case 4:
          src += "close_gripper()\n";
          break;
        case 5:
          src += v + " = detect_referred_location()\nopen_drawer_at_pos(" + v +
                 ")\n";
          break;
        case 6:
          src += v +
                 " = detect_referred_direction()\nmove_gripper_by_dir(" + v +
                 ", 0.05)\n";
          break;
      }
    }

    PerceptionBindings b;
    b.referred_location = random_point;
    b.referred_direction = [&]() -> Vec3 {
      return Vec3{coord(rng), coord(rng), coord(rng)};
    };

    ExecResult r = execute(parse_policy(src), w, b);
    CHECK(r.world.objects.size() == n_objects);  // nothing created/destroyed
    CHECK(r.world.drawers.size() == 1);
    CHECK_NOTHROW(validate_world(r.world));
  }
}
