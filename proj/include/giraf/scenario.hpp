#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "giraf/dialog.hpp"
#include "giraf/error.hpp"
#include "giraf/gesture.hpp"
#include "giraf/planner.hpp"
#include "giraf/referent.hpp"
#include "giraf/rng.hpp"
#include "giraf/scene.hpp"
#include "giraf/sim.hpp"
#include "giraf/synth.hpp"

namespace giraf {

// How a scripted gesture is synthesized and reported to the planner.
struct GestureScript {
  enum class Fidelity { Label, Description, Numeric };

  GestureClass cls = GestureClass::Pointing;
  std::optional<Vec3> target;  // aim point; default synth target otherwise
  double noise_sigma = 0.0;
  int n_frames = 1;
  Fidelity fidelity = Fidelity::Label;
  std::string description;  // used at Fidelity::Description; label text if empty
};

struct ScriptedInstruction {
  std::string speech;
  std::optional<GestureScript> gesture;
  // Ground truth for the auto-confirmer; with neither set, the user always
  // answers yes.
  std::optional<std::string> truth_object;
  std::optional<Vec3> truth_position;
};

struct ScenarioSpec {
  std::string id = "scenario";
  SceneSpec scene;
  Ontology ontology;  // merged on top of the prefix-derived categories
  std::vector<ScriptedInstruction> script;
  GoalSpec goal = goal::GripperNear{Vec3{0.0, 0.0, 0.0}, 0.01};
  std::string backend = "rule";  // "rule" | "replay"
  std::filesystem::path transcript_dir;
  std::uint64_t seed = 0;
  int max_trials = 3;
  double confirm_tolerance = 0.02;
};

inline void validate_scenario(const ScenarioSpec& spec) {
  if (spec.id.empty()) throw InvalidSpecError("scenario id must be non-empty");
  if (spec.script.empty())
    throw InvalidSpecError("scenario script must be non-empty");
  if (spec.max_trials < 1)
    throw InvalidSpecError("max_trials must be at least 1");
  if (spec.confirm_tolerance <= 0.0)
    throw InvalidSpecError("confirm_tolerance must be > 0");
  validate_goal(spec.goal);
  for (const auto& si : spec.script) {
    if (si.gesture && si.gesture->n_frames < 1)
      throw InvalidSpecError("gesture n_frames must be at least 1");
    if (si.gesture && si.gesture->noise_sigma < 0.0)
      throw InvalidSpecError("gesture noise_sigma must be non-negative");
  }
}

struct TraceRecord {
  int trial = 1;        // attempt number across the whole scenario
  int instruction = 0;  // script index
  std::string kind;     // "phase" | "utter" | "effect" | "call" | "error"
  std::string detail;
};

struct Metrics {
  bool planning_success = false;
  bool execution_success = false;  // implies planning_success
  int trials_used = 0;
  std::vector<TraceRecord> trace;
};

namespace detail {

inline Ontology scenario_ontology(const ScenarioSpec& spec,
                                  const Scene& scene) {
  Ontology onto = Ontology::from_prefixes(scene_vocabulary(scene));
  for (const auto& [category, labels] : spec.ontology.entries())
    for (const auto& label : labels) onto.add(category, label);
  return onto;
}

inline std::optional<Vec3> truth_point(const ScriptedInstruction& si,
                                       const Scene& scene) {
  if (si.truth_object) {
    std::string key = label_key(*si.truth_object);
    for (const auto& o : scene.objects)
      if (label_key(o.label) == key) return o.position;
    throw InvalidSpecError("truth_object '" + *si.truth_object +
                           "' is not in the scene");
  }
  return si.truth_position;
}

}  // namespace detail

// Runs the scripted dialog/plan/execute loop against a synthetic scene.
// Each instruction gets a fresh dialog machine whose trial cap is whatever
// is left of the scenario budget; the world persists across instructions.
// With `models` set, the gesture label is taken from the classifier instead
// of being trusted from the script.
inline Metrics run_scenario(const ScenarioSpec& spec,
                            CompletionBackend& backend,
                            const GestureModels* models = nullptr) {
  validate_scenario(spec);
  const Scene scene = generate_scene(spec.scene);
  const Ontology onto = detail::scenario_ontology(spec, scene);
  const PromptContext ctx = default_prompt_context();

  Metrics m;
  WorldState world = world_from_scene(scene);
  int failures = 0;  // failed attempts, scenario-wide
  bool gave_up = false;
  bool goal_ok = false;

  for (std::size_t i = 0; i < spec.script.size() && !gave_up; ++i) {
    const ScriptedInstruction& si = spec.script[i];
    const std::optional<Vec3> truth = detail::truth_point(si, scene);
    DialogMachine machine(spec.max_trials - failures);

    for (bool done = false; !done && !gave_up;) {
      const int attempt = failures + 1;
      auto rec = [&](const char* kind, std::string detail) {
        m.trace.push_back(TraceRecord{attempt, static_cast<int>(i), kind,
                                      std::move(detail)});
      };

      // -- Synthesize (and optionally classify) the gesture.
      std::optional<std::vector<HandKeypoints>> frames;
      Instruction ins;
      ins.speech_text = si.speech;
      ins.index = static_cast<int>(i);
      if (si.gesture) {
        const GestureScript& gs = *si.gesture;
        GestureSynthConfig g;
        g.noise_sigma = gs.noise_sigma;
        g.n_frames = gs.n_frames;
        g.seed = derive_seed(spec.seed, i * 97 + failures);
        g.cam = scene.camera;
        if (gs.target) g.target = *gs.target;
        frames = synth_gesture(gs.cls, g);
        world.human_hand = frames->back();

        GestureObservation obs;
        if (models) {
          obs = classify(*models, *frames);
        } else {
          obs.cls = gs.cls;
          obs.confidence = 1.0;
          obs.frames = *frames;
          obs.gesture_time = (*frames)[(frames->size() - 1) / 2].timestamp;
        }
        switch (gs.fidelity) {
          case GestureScript::Fidelity::Label:
            ins.gesture = GestureRepresentation::label(obs.cls);
            break;
          case GestureScript::Fidelity::Description:
            ins.gesture = GestureRepresentation::description(
                gs.description.empty() ? gesture_label(gs.cls)
                                       : gs.description);
            break;
          case GestureScript::Fidelity::Numeric:
            ins.gesture = GestureRepresentation::numeric(obs);
            break;
        }
        ins.gesture_time = obs.gesture_time;
      }

      PerceptionBindings bind;
      if (frames) {
        const HandKeypoints hand = frames->back();
        bind.referred_obj_pos = [&scene, &onto, hand](const std::string& q) {
          return resolve_object(scene, hand, q, onto).position;
        };
        bind.referred_location = [&scene, hand] {
          return resolve_location(scene, hand);
        };
        bind.referred_direction = [hand] { return resolve_direction(hand); };
        bind.hand_center_pos = [hand] { return hand_center(hand); };
      }

      // -- Confirm the instruction back, then plan.
      auto confirm = machine.step(event::InstructionReceived{ins});
      rec("phase", "Confirming");
      rec("utter", confirm.utterance);
      machine.step(event::ConfirmationDone{});
      rec("phase", "Planning");

      std::optional<PlanResult> plan;
      std::optional<std::string> fail;
      try {
        plan = plan_instruction(ctx, ins, backend);
        if (!plan->ok()) {
          std::string msg = "plan failed validation:";
          for (const auto& v : plan->violations)
            msg += " line " + std::to_string(v.line) + ": " + v.message + ";";
          fail = msg;
        }
      } catch (const Error& e) {
        fail = e.what();
      }

      bool needs_perception = false;
      if (!fail) {
        needs_perception = uses_perception(plan->program, ctx.catalog);
        if (needs_perception && !frames)
          fail = "the plan calls perception but no gesture was detected";
      }

      // -- Dry-run the plan on a copy of the world to find the referent the
      // robot should indicate; the first perception value is the target.
      std::optional<Vec3> indicated;
      if (!fail) {
        if (!needs_perception) {
          indicated = world.gripper.position;
        } else {
          std::optional<Vec3> first;
          auto tap = [&first](Vec3 p) {
            if (!first) first = p;
            return p;
          };
          PerceptionBindings probe;
          probe.referred_obj_pos = [&](const std::string& q) {
            return tap(bind.referred_obj_pos(q));
          };
          probe.referred_location = [&] { return tap(bind.referred_location()); };
          probe.referred_direction = [&] {
            return tap(bind.referred_direction());
          };
          probe.hand_center_pos = [&] { return tap(bind.hand_center_pos()); };
          try {
            execute(plan->program, world, probe);
            indicated = first ? *first : world.gripper.position;
          } catch (const Error& e) {
            fail = e.what();
          }
        }
      }

      if (fail) {
        auto report = machine.step(event::PlanFailed{*fail});
        rec("phase", "Errored");
        rec("utter", report.utterance);
        ++failures;
        auto reset = machine.step(event::Reset{});
        if (machine.phase() == DialogPhase::Done) {
          rec("utter", reset.utterance);
          rec("phase", "Done");
          gave_up = true;
        } else {
          rec("phase", "Idle");
        }
        continue;
      }

      auto point = machine.step(event::PlanReady{*indicated});
      rec("phase", "Indicating");
      rec("effect", "move_and_point " + detail::format_vec3(point.target));
      auto ask = machine.step(event::IndicationDone{});
      rec("phase", "AwaitingYesNo");
      rec("utter", ask.utterance);

      // The scripted user approves iff the indicated target matches the
      // ground-truth referent.
      bool yes = !truth || norm(*indicated - *truth) <= spec.confirm_tolerance;
      if (!yes) {
        auto bye = machine.step(event::UserNo{});
        rec("phase", "Aborted");
        rec("utter", bye.utterance);
        ++failures;
        auto reset = machine.step(event::Reset{});
        if (machine.phase() == DialogPhase::Done) {
          rec("utter", reset.utterance);
          rec("phase", "Done");
          gave_up = true;
        } else {
          rec("phase", "Idle");
        }
        continue;
      }

      machine.step(event::UserYes{});
      rec("phase", "Executing");
      bool exec_failed = false;
      try {
        ExecResult r = execute(plan->program, world, bind);
        world = std::move(r.world);
        for (const auto& te : r.trace) {
          std::string line = te.call + "(";
          for (std::size_t a = 0; a < te.args.size(); ++a)
            line += (a ? ", " : "") + te.args[a];
          line += ") -> " + te.outcome;
          rec("call", std::move(line));
        }
        for (const auto& u : r.utterances) rec("utter", u);
      } catch (const Error& e) {
        exec_failed = true;  // world rolls back to the pre-execution state
        rec("error", e.what());
      }

      const bool last = (i + 1 == spec.script.size());
      if (last) goal_ok = !exec_failed && check_goal(world, spec.goal);
      machine.step(event::ExecutionFinished{last ? goal_ok : !exec_failed});
      rec("phase", "Done");
      done = true;
    }
  }

  m.planning_success = !gave_up;
  m.execution_success = !gave_up && goal_ok;
  m.trials_used = gave_up ? failures : failures + 1;
  return m;
}

inline Metrics run_scenario(const ScenarioSpec& spec,
                            const GestureModels* models = nullptr) {
  if (spec.backend == "rule") {
    RulePlanner planner;
    return run_scenario(spec, planner, models);
  }
  if (spec.backend == "replay") {
    ReplayBackend replay(spec.transcript_dir);
    return run_scenario(spec, replay, models);
  }
  throw ConfigError("unknown scenario backend '" + spec.backend +
                    "' (expected rule or replay)");
}

// ---------------------------------------------------------------------------
// Pointing accuracy sweep: three objects in a row, the user points at the
// middle one from a given distance under keypoint noise.

struct SweepConfig {
  std::vector<double> spacings{0.05, 0.15, 0.30};   // meters between objects
  std::vector<double> distances{0.5, 1.0, 1.5};     // hand-to-object meters
  double noise_sigma = 0.003;
  int trials_per_cell = 500;
  std::uint64_t seed = 0;
};

struct SweepCell {
  double spacing = 0.0;
  double distance = 0.0;
  int correct = 0;
  int trials = 0;
  double accuracy = 0.0;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepCell> cells;  // row-major: spacings x distances

  const SweepCell& cell(std::size_t spacing_idx,
                        std::size_t distance_idx) const {
    return cells.at(spacing_idx * config.distances.size() + distance_idx);
  }
};

inline SweepResult spacing_distance_sweep(const SweepConfig& cfg) {
  if (cfg.spacings.empty() || cfg.distances.empty())
    throw InvalidSpecError("sweep needs at least one spacing and distance");
  if (cfg.trials_per_cell < 1)
    throw InvalidSpecError("trials_per_cell must be at least 1");
  if (cfg.noise_sigma < 0.0)
    throw InvalidSpecError("noise_sigma must be non-negative");

  const Vec3 wrist{0.0, 0.0, 0.4};
  SweepResult out;
  out.config = cfg;
  std::size_t cell_idx = 0;
  for (double spacing : cfg.spacings) {
    for (double distance : cfg.distances) {
      Scene scene;
      scene.camera = default_camera();
      scene.frame_tag = "sweep";
      const double z = wrist.z + distance;
      scene.objects = {ObjectEntry{"obj_1", Vec3{-spacing, 0.0, z}},
                       ObjectEntry{"obj_2", Vec3{0.0, 0.0, z}},
                       ObjectEntry{"obj_3", Vec3{spacing, 0.0, z}}};
      const Ontology onto =
          Ontology::from_prefixes(scene_vocabulary(scene));

      int correct = 0;
      for (int t = 0; t < cfg.trials_per_cell; ++t) {
        GestureSynthConfig g;
        g.noise_sigma = cfg.noise_sigma;
        g.n_frames = 1;
        g.seed = derive_seed(cfg.seed, cell_idx * 1000003ULL +
                                           static_cast<std::uint64_t>(t));
        g.wrist = wrist;
        g.target = scene.objects[1].position;
        auto frames = synth_gesture(GestureClass::Pointing, g);
        if (resolve_object(scene, frames.back(), "obj", onto).label == "obj_2")
          ++correct;
      }
      out.cells.push_back(SweepCell{
          spacing, distance, correct, cfg.trials_per_cell,
          static_cast<double>(correct) / cfg.trials_per_cell});
      ++cell_idx;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// GestureInstruct-style scoring: a plan is correct when it calls the expected
// primitive with the expected first-argument kind.

inline const std::array<std::string, 4> kGestureTypes = {
    "Symbolic", "Semaphoric", "Iconic", "Deictic"};

struct GestureInstructCase {
  std::string id;
  std::string gesture_type;  // one of kGestureTypes
  std::string gesture_label;
  std::string description;
  std::optional<std::string> instruction;  // speech; absent for Symbolic
  std::string context;
  std::string expected_call;
  ValueKind expected_arg_kind = ValueKind::Void;
};

inline void validate_gi_case(const GestureInstructCase& c,
                             const PrimitiveCatalog& catalog) {
  if (c.id.empty())
    throw InvalidSpecError("gesture-instruct case id must be non-empty");
  if (std::find(kGestureTypes.begin(), kGestureTypes.end(), c.gesture_type) ==
      kGestureTypes.end())
    throw InvalidSpecError("case " + c.id + ": unknown gesture type '" +
                           c.gesture_type + "'");
  if (c.description.empty())
    throw InvalidSpecError("case " + c.id + ": description must be non-empty");
  if (c.gesture_type == "Symbolic" && c.instruction)
    throw InvalidSpecError("case " + c.id +
                           ": symbolic gestures carry no language instruction");
  const FunctionSpec* fn = catalog.find(c.expected_call);
  if (!fn)
    throw InvalidSpecError("case " + c.id + ": expected call '" +
                           c.expected_call + "' is not in the catalog");
  ValueKind first = fn->params.empty() ? ValueKind::Void : fn->params.front();
  if (first != c.expected_arg_kind)
    throw InvalidSpecError("case " + c.id +
                           ": expected arg kind disagrees with the catalog");
}

struct GiCaseResult {
  std::string id;
  std::string gesture_type;
  std::string planned_call;  // first bare action call, for reporting
  bool correct = false;
};

struct GiReport {
  std::vector<GiCaseResult> cases;
  // Indexed to match kGestureTypes.
  std::array<int, 4> correct{};
  std::array<int, 4> total{};
  int overall_correct = 0;
  int overall_total = 0;
};

inline GiReport run_gesture_instruct(
    const std::vector<GestureInstructCase>& cases, CompletionBackend& backend,
    const PromptContext& ctx = default_prompt_context()) {
  GiReport rep;
  for (const auto& c : cases) {
    validate_gi_case(c, ctx.catalog);
    Instruction ins;
    ins.speech_text = c.instruction.value_or("");
    ins.gesture = GestureRepresentation::description(c.description);
    ins.index = static_cast<int>(rep.cases.size());

    GiCaseResult r;
    r.id = c.id;
    r.gesture_type = c.gesture_type;
    try {
      PlanResult plan = plan_instruction(ctx, ins, backend);
      for (const auto& st : plan.program.statements) {
        if (const auto* e = std::get_if<ExprStatement>(&st.node)) {
          r.planned_call = e->call.name;
          break;
        }
      }
      r.correct =
          plan.ok() && calls_function(plan.program, c.expected_call) &&
          first_arg_kind(plan.program, ctx.catalog, c.expected_call) ==
              std::optional<ValueKind>(c.expected_arg_kind);
    } catch (const Error&) {
      r.correct = false;
    }

    auto type_idx = static_cast<std::size_t>(
        std::find(kGestureTypes.begin(), kGestureTypes.end(), c.gesture_type) -
        kGestureTypes.begin());
    rep.total[type_idx] += 1;
    rep.correct[type_idx] += r.correct ? 1 : 0;
    rep.overall_total += 1;
    rep.overall_correct += r.correct ? 1 : 0;
    rep.cases.push_back(std::move(r));
  }
  return rep;
}

}  // namespace giraf
