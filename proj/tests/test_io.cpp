#include "giraf/io.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <random>

#include "giraf/synth.hpp"

using namespace giraf;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    auto rng = std::random_device{};
    path = fs::temp_directory_path() /
           ("giraf_io_" + std::to_string(rng() % 1000000));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

bool same_frame(const HandKeypoints& a, const HandKeypoints& b) {
  for (int k = 0; k < kp::kCount; ++k) {
    if (!(a.image_coords[k] == b.image_coords[k])) return false;
    if (!(a.world_coords[k] == b.world_coords[k])) return false;
  }
  return a.confidence == b.confidence && a.timestamp == b.timestamp;
}

}  // namespace

TEST_CASE("scene files round-trip byte-identically", "[io]") {
  TempDir dir;
  Scene scene = generate_scene(SceneSpec{DrawerGridSpec{}, 0});
  fs::path a = dir.path / "a.scene";
  fs::path b = dir.path / "b.scene";
  save_scene(a, scene);
  Scene loaded = load_scene(a);
  save_scene(b, loaded);

  REQUIRE(loaded.objects.size() == scene.objects.size());
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    CHECK(loaded.objects[i].label == scene.objects[i].label);
    CHECK(loaded.objects[i].position == scene.objects[i].position);
  }
  CHECK(loaded.cloud == scene.cloud);
  CHECK(loaded.camera.fx == scene.camera.fx);
  CHECK(loaded.frame_tag == scene.frame_tag);

  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::string ta((std::istreambuf_iterator<char>(fa)), {});
  std::string tb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(ta == tb);
  CHECK(!ta.empty());
}

TEST_CASE("scene load failures carry a field path", "[io]") {
  TempDir dir;
  CHECK_THROWS_AS(load_scene(dir.path / "missing.scene"), FileParseError);
  CHECK_THROWS_WITH(load_scene(dir.path / "missing.scene"),
                    Catch::Matchers::ContainsSubstring("not found"));

  fs::path p = dir.path / "bad.scene";
  write_text(p, "{ nope");
  CHECK_THROWS_AS(load_scene(p), FileParseError);

  write_text(p, R"({"format_version": 2, "camera": {}, "objects": [],
                    "cloud": []})");
  CHECK_THROWS_AS(load_scene(p), InvariantViolationError);

  write_text(p, R"({"format_version": 1,
    "camera": {"fx": 600, "fy": 600, "cx": 320, "cy": 240,
               "width": 640, "height": 480},
    "objects": [{"label": "", "pos": [0, 0, 1]}], "cloud": []})");
  try {
    load_scene(p);
    FAIL("expected InvariantViolationError");
  } catch (const InvariantViolationError& e) {
    CHECK(e.field_path == "objects[0].label");
  }

  write_text(p, R"({"format_version": 1,
    "camera": {"fx": -1, "fy": 600, "cx": 320, "cy": 240,
               "width": 640, "height": 480},
    "objects": [], "cloud": []})");
  try {
    load_scene(p);
    FAIL("expected InvariantViolationError");
  } catch (const InvariantViolationError& e) {
    CHECK(e.field_path == "camera.fx");
  }

  write_text(p, R"({"format_version": 1,
    "camera": {"fx": 600, "fy": 600, "cx": 320, "cy": 240,
               "width": 640, "height": 480},
    "objects": [{"label": "cup", "pos": [0, 0]}], "cloud": []})");
  try {
    load_scene(p);
    FAIL("expected InvariantViolationError");
  } catch (const InvariantViolationError& e) {
    CHECK(e.field_path == "objects[0].pos");
  }
}

TEST_CASE("ontology files round-trip", "[io]") {
  TempDir dir;
  Ontology o;
  o.add("tool", "hammer");
  o.add("tool", "screwdriver");
  o.add("drawer", "drawer_1_1");
  fs::path p = dir.path / "ontology.json";
  save_ontology(p, o);
  Ontology loaded = load_ontology(p);
  CHECK(loaded.entries() == o.entries());
  CHECK(loaded.contains("tool", "hammer"));
  CHECK(loaded.contains("hammer", "hammer"));  // identity closure survives
  CHECK_FALSE(loaded.contains("tool", "cup"));

  write_text(p, R"({"format_version": 1, "categories": {"tool": "hammer"}})");
  CHECK_THROWS_AS(load_ontology(p), InvariantViolationError);
}

TEST_CASE("hand files hold one exact frame", "[io]") {
  TempDir dir;
  auto frames = synth_gesture(GestureClass::Pointing, 0.0, 1, 42);
  fs::path p = dir.path / "point.hand";
  save_hand(p, frames[0]);
  HandKeypoints loaded = load_hand(p);
  CHECK(same_frame(loaded, frames[0]));

  Json j = frame_to_json(frames[0]);
  j["format_version"] = 1;
  j["confidence"] = 1.5;
  write_text(p, j.dump());
  try {
    load_hand(p);
    FAIL("expected InvariantViolationError");
  } catch (const InvariantViolationError& e) {
    CHECK(e.field_path == "confidence");
  }

  j["confidence"] = 1.0;
  j["image"].erase(0);  // 20 keypoints left
  write_text(p, j.dump());
  CHECK_THROWS_AS(load_hand(p), InvariantViolationError);
}

TEST_CASE("gesture sample files are line-delimited", "[io]") {
  TempDir dir;
  std::vector<GestureSample> samples;
  GestureSample a;
  a.label = GestureClass::Pointing;
  a.frames = synth_gesture(GestureClass::Pointing, 0.003, 1, 1);
  GestureSample b;
  b.label = GestureClass::Hammering;
  b.frames = synth_gesture(GestureClass::Hammering, 0.003, 16, 2);
  samples = {a, b};

  fs::path p = dir.path / "train.jsonl";
  save_gesture_samples(p, samples);

  std::ifstream in(p);
  int lines = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++lines;
  CHECK(lines == 2);

  auto loaded = load_gesture_samples(p);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].label == GestureClass::Pointing);
  CHECK(loaded[1].label == GestureClass::Hammering);
  REQUIRE(loaded[1].frames.size() == 16);
  CHECK(same_frame(loaded[0].frames[0], a.frames[0]));
  CHECK(same_frame(loaded[1].frames[15], b.frames[15]));

  write_text(p, "{\"label\": \"pointing\", \"frames\": []}\n");
  CHECK_THROWS_AS(load_gesture_samples(p), InvariantViolationError);
  write_text(p, "{\"label\": \"moonwalk\", \"frames\": [{}]}\n");
  CHECK_THROWS_AS(load_gesture_samples(p), InvariantViolationError);
  write_text(p, "{\"label\": \"pointing\"\n");
  CHECK_THROWS_WITH(load_gesture_samples(p),
                    Catch::Matchers::ContainsSubstring(":1:"));
}

TEST_CASE("model files restore the exact forward pass", "[io]") {
  TempDir dir;
  GestureModels m;
  m.static_model = MlpModel::random_init(10, 8, 6, 4, 3);
  m.dynamic_model = LstmModel::random_init(10, 8, 5, 4);
  fs::path p = dir.path / "models.json";
  save_models(p, m);
  GestureModels loaded = load_models(p);

  CHECK(loaded.static_model.params == m.static_model.params);
  CHECK(loaded.dynamic_model.params == m.dynamic_model.params);
  CHECK(loaded.cam.fx == m.cam.fx);

  std::vector<double> x(10, 0.25);
  CHECK(mlp_forward(loaded.static_model, x) == mlp_forward(m.static_model, x));

  Json j = models_to_json(m);
  j["static"]["params"].erase(0);
  write_text(p, j.dump());
  try {
    load_models(p);
    FAIL("expected InvariantViolationError");
  } catch (const InvariantViolationError& e) {
    CHECK(e.field_path == "static.params");
  }
}

TEST_CASE("scenario files round-trip and resolve transcript dirs", "[io]") {
  TempDir dir;
  ScenarioSpec spec;
  spec.id = "water_jug_handover";
  ToolBenchSpec bench;
  bench.tools = {ObjectEntry{"water_jug", Vec3{0.1, 0.1, 1.0}},
                 ObjectEntry{"mug", Vec3{-0.2, 0.1, 1.1}}};
  spec.scene = SceneSpec{bench, 0};
  spec.ontology.add("vessel", "water_jug");
  ScriptedInstruction pick;
  pick.speech = "pick up the water jug";
  GestureScript point;
  point.cls = GestureClass::Pointing;
  point.target = Vec3{0.1, 0.1, 1.0};
  point.fidelity = GestureScript::Fidelity::Description;
  point.description = "index finger extends out while others curl inward";
  pick.gesture = point;
  pick.truth_object = "water_jug";
  ScriptedInstruction hand;
  hand.speech = "hand it to me";
  GestureScript palm;
  palm.cls = GestureClass::OpenPalmUp;
  palm.fidelity = GestureScript::Fidelity::Description;
  palm.description = "an open palm faces upward";
  hand.gesture = palm;
  spec.script = {pick, hand};
  spec.goal = goal::ObjectAtHand{"water_jug"};
  spec.backend = "replay";
  spec.transcript_dir = "transcripts";
  spec.seed = 7;

  fs::path p = dir.path / "water_jug.scenario";
  save_scenario(p, spec);
  ScenarioSpec loaded = load_scenario(p);

  CHECK(loaded.id == spec.id);
  CHECK(loaded.backend == "replay");
  CHECK(loaded.transcript_dir == dir.path / "transcripts");
  CHECK(loaded.seed == 7);
  REQUIRE(loaded.script.size() == 2);
  CHECK(loaded.script[0].truth_object == "water_jug");
  CHECK(loaded.script[0].gesture->description ==
        "index finger extends out while others curl inward");
  CHECK(loaded.script[1].gesture->cls == GestureClass::OpenPalmUp);
  CHECK(std::holds_alternative<goal::ObjectAtHand>(loaded.goal));
  CHECK(loaded.ontology.contains("vessel", "water_jug"));

  // Semantics survive the round trip: the loaded spec runs identically.
  loaded.backend = "rule";
  spec.backend = "rule";
  spec.transcript_dir.clear();
  Metrics a = run_scenario(spec);
  Metrics b = run_scenario(loaded);
  CHECK(a.planning_success == b.planning_success);
  CHECK(a.execution_success == b.execution_success);
  CHECK(a.trace.size() == b.trace.size());

  // Re-serializing the loaded spec reproduces the same structure.
  ScenarioSpec reloaded = scenario_from_json(scenario_to_json(spec));
  CHECK(scenario_to_json(reloaded) == scenario_to_json(spec));

  write_text(p, R"({"format_version": 1, "id": "x",
    "scene": {"type": "hologram"}, "script": [], "goal": {"type": "nope"}})");
  CHECK_THROWS_AS(load_scenario(p), InvariantViolationError);
}

TEST_CASE("gesture-instruct fixtures round-trip", "[io]") {
  TempDir dir;
  GestureInstructCase c;
  c.id = "thumbs_up";
  c.gesture_type = "Symbolic";
  c.gesture_label = "thumbs up";
  c.description =
      "thumb extends out and points upward while other fingers curl inward";
  c.context = "the robot gripper is open and above the cup handle";
  c.expected_call = "close_gripper";
  c.expected_arg_kind = ValueKind::Void;

  GestureInstructCase d;
  d.id = "pointing_object";
  d.gesture_type = "Deictic";
  d.gesture_label = "pointing";
  d.description = "index finger extends out while others curl inward";
  d.instruction = "pick up this water jug";
  d.context = "the robot gripper is empty";
  d.expected_call = "pick_up_obj_at_pos";
  d.expected_arg_kind = ValueKind::Position;

  fs::path p = dir.path / "cases.json";
  save_gesture_instruct(p, {c, d});
  auto loaded = load_gesture_instruct(p);
  REQUIRE(loaded.size() == 2);
  CHECK_FALSE(loaded[0].instruction.has_value());
  CHECK(loaded[1].instruction == "pick up this water jug");
  CHECK(loaded[0].expected_arg_kind == ValueKind::Void);
  CHECK(loaded[1].expected_arg_kind == ValueKind::Position);
  PrimitiveCatalog catalog = PrimitiveCatalog::defaults();
  for (const auto& lc : loaded) CHECK_NOTHROW(validate_gi_case(lc, catalog));

  Json j = gi_cases_to_json({c});
  j["cases"][0]["expected_arg_kind"] = "tensor";
  write_text(p, j.dump());
  CHECK_THROWS_AS(load_gesture_instruct(p), InvariantViolationError);
}

TEST_CASE("metrics render as text and csv", "[io]") {
  Metrics m;
  m.planning_success = true;
  m.execution_success = false;
  m.trials_used = 3;
  m.trace.push_back(TraceRecord{1, 0, "phase", "Confirming"});
  m.trace.push_back(TraceRecord{1, 0, "utter", "pick up the water jug"});

  std::string text = metrics_text("water_jug", m);
  CHECK(text.find("scenario: water_jug\n") != std::string::npos);
  CHECK(text.find("planning_success: true\n") != std::string::npos);
  CHECK(text.find("execution_success: false\n") != std::string::npos);
  CHECK(text.find("trials_used: 3\n") != std::string::npos);
  CHECK(text.find("[trial 1 ins 0] phase Confirming") != std::string::npos);

  CHECK(std::string(kMetricsCsvHeader) ==
        "id,planning_success,execution_success,trials_used");
  CHECK(metrics_csv_row("water_jug", m) == "water_jug,1,0,3");
}

TEST_CASE("sweep and gesture-instruct reports render", "[io]") {
  SweepConfig cfg;
  cfg.spacings = {0.05, 0.15};
  cfg.distances = {0.5};
  cfg.trials_per_cell = 10;
  cfg.noise_sigma = 0.0;
  SweepResult r = spacing_distance_sweep(cfg);
  std::string csv = sweep_csv(r);
  CHECK(csv.rfind("spacing,distance,correct,trials,accuracy\n", 0) == 0);
  CHECK(csv.find("0.05,0.5,10,10,1\n") != std::string::npos);
  CHECK(csv.find("0.15,0.5,10,10,1\n") != std::string::npos);

  GiReport rep;
  rep.cases.push_back(GiCaseResult{"thumbs_up", "Symbolic", "close_gripper",
                                   true});
  rep.correct[0] = 1;
  rep.total[0] = 1;
  rep.overall_correct = 1;
  rep.overall_total = 1;
  std::string text = gi_report_text(rep);
  CHECK(text.find("Symbolic: 1/1\n") != std::string::npos);
  CHECK(text.find("Deictic: 0/0\n") != std::string::npos);
  CHECK(text.find("overall: 1/1\n") != std::string::npos);
  std::string gcsv = gi_report_csv(rep);
  CHECK(gcsv.find("thumbs_up,Symbolic,close_gripper,1\n") !=
        std::string::npos);
}
