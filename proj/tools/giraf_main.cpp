// giraf: scene/gesture data generation, grounding, planning, scenario
// execution and the grounding service, all from one binary.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "giraf/backend_http.hpp"
#include "giraf/io.hpp"
#include "giraf/scenario.hpp"
#include "giraf/synth.hpp"

namespace fs = std::filesystem;
using namespace giraf;

namespace {

Vec3 parse_triple(const std::string& s, const std::string& flag) {
  Vec3 v;
  char extra;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf%c", &v.x, &v.y, &v.z, &extra) != 3)
    throw ConfigError(flag + " wants 'x,y,z', got '" + s + "'");
  return v;
}

std::vector<double> parse_list(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    std::string tok = s.substr(pos, comma - pos);
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError(flag + " wants comma-separated numbers, got '" + s +
                        "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty())
    throw ConfigError(flag + " wants comma-separated numbers, got '" + s +
                      "'");
  return out;
}

std::string fmt(double v) { return detail::format_number(v); }

// Program text or report either lands in a file or on stdout.
void emit(const std::optional<std::string>& path, const std::string& text) {
  if (path)
    detail::write_file(*path, text);
  else
    std::cout << text;
}

GestureRepresentation gesture_from_flag(const std::string& text) {
  if (auto cls = parse_gesture(text)) return GestureRepresentation::label(*cls);
  return GestureRepresentation::description(text);
}

std::unique_ptr<CompletionBackend> make_backend(
    const std::string& name, const std::optional<std::string>& transcripts) {
  if (name == "rule") return std::make_unique<RulePlanner>();
  if (name == "replay") {
    if (!transcripts)
      throw ConfigError("backend=replay needs --transcripts");
    return std::make_unique<ReplayBackend>(*transcripts);
  }
  if (name == "remote")
    return std::make_unique<RemoteBackend>(RemoteBackend::from_env());
  throw ConfigError("unknown backend '" + name + "'");
}

// Tees completions from any backend into a replay store.
class RecordingBackend final : public CompletionBackend {
 public:
  RecordingBackend(CompletionBackend& inner, fs::path dir)
      : inner_(inner), store_(std::move(dir)) {}

  std::string complete(const Prompt& prompt) override {
    std::string text = inner_.complete(prompt);
    store_.record(prompt, text);
    ++recorded_;
    return text;
  }
  std::string name() const override { return inner_.name(); }
  int recorded() const { return recorded_; }

 private:
  CompletionBackend& inner_;
  ReplayBackend store_;
  int recorded_ = 0;
};

void add_scene(CLI::App& app) {
  auto* scene = app.add_subcommand("scene", "generate and inspect scenes");
  scene->require_subcommand(1);

  auto* gen = scene->add_subcommand("gen", "write a generated scene file");
  struct GenOpts {
    std::string type = "drawer_grid";
    int rows = 8, cols = 8;
    double spacing = 0.10;
    std::string origin = "-0.35,-0.35,1.2";
    std::vector<std::string> tools;
    int objects = 10;
    std::vector<std::string> labels;
    std::uint64_t seed = 0;
    std::string out;
  };
  auto opts = std::make_shared<GenOpts>();
  gen->add_option("--type", opts->type, "drawer_grid | tool_bench | random")
      ->check(CLI::IsMember({"drawer_grid", "tool_bench", "random"}));
  gen->add_option("--rows", opts->rows, "drawer grid rows");
  gen->add_option("--cols", opts->cols, "drawer grid columns");
  gen->add_option("--spacing", opts->spacing, "drawer spacing in meters");
  gen->add_option("--origin", opts->origin, "drawer_1_1 center as x,y,z");
  gen->add_option("--tool", opts->tools,
                  "tool bench entry label:x,y,z (repeatable)");
  gen->add_option("--objects", opts->objects, "random scene object count");
  gen->add_option("--labels", opts->labels, "random scene label pool");
  gen->add_option("--seed", opts->seed, "random scene seed");
  gen->add_option("--out", opts->out, "output scene file")->required();
  gen->callback([opts] {
    SceneSpec spec;
    spec.seed = opts->seed;
    if (opts->type == "drawer_grid") {
      DrawerGridSpec g;
      g.rows = opts->rows;
      g.cols = opts->cols;
      g.spacing = opts->spacing;
      g.origin = parse_triple(opts->origin, "--origin");
      spec.kind = g;
    } else if (opts->type == "tool_bench") {
      ToolBenchSpec bench;
      for (const auto& t : opts->tools) {
        auto colon = t.find(':');
        if (colon == std::string::npos)
          throw ConfigError("--tool wants label:x,y,z, got '" + t + "'");
        bench.tools.push_back(ObjectEntry{
            t.substr(0, colon), parse_triple(t.substr(colon + 1), "--tool")});
      }
      spec.kind = bench;
    } else {
      RandomSceneSpec r;
      r.n_objects = opts->objects;
      if (!opts->labels.empty()) r.label_pool = opts->labels;
      spec.kind = r;
    }
    Scene s = generate_scene(spec);
    save_scene(opts->out, s);
    std::cout << "wrote " << opts->out << " (" << s.objects.size()
              << " objects, " << s.cloud.size() << " cloud points)\n";
  });

  auto* show = scene->add_subcommand("show", "print a scene file");
  auto path = std::make_shared<std::string>();
  show->add_option("file", *path, "scene file")->required();
  show->callback([path] {
    Scene s = load_scene(*path);
    const CameraIntrinsics& c = s.camera;
    std::cout << "camera: " << c.width << "x" << c.height << " fx=" << fmt(c.fx)
              << " fy=" << fmt(c.fy) << " cx=" << fmt(c.cx)
              << " cy=" << fmt(c.cy) << "\n";
    std::cout << "objects: " << s.objects.size() << "\n";
    for (const auto& o : s.objects)
      std::cout << "  " << o.label << " " << detail::format_vec3(o.position)
                << "\n";
    std::cout << "cloud: " << s.cloud.size() << " points\n";
  });
}

void add_gesture(CLI::App& app) {
  auto* gesture =
      app.add_subcommand("gesture", "synthesize data, train and evaluate");
  gesture->require_subcommand(1);

  auto* synth = gesture->add_subcommand("synth", "write a synthetic dataset");
  struct SynthOpts {
    std::string train, test;
    DatasetConfig cfg;
  };
  auto so = std::make_shared<SynthOpts>();
  synth->add_option("--train", so->train, "output training samples")
      ->required();
  synth->add_option("--test", so->test, "output held-out samples")->required();
  synth->add_option("--static-per-class", so->cfg.static_samples_per_class,
                    "samples per static class");
  synth->add_option("--dynamic-per-class", so->cfg.dynamic_samples_per_class,
                    "samples per dynamic class");
  synth->add_option("--noise", so->cfg.noise_sigma,
                    "keypoint noise sigma in meters");
  synth->add_option("--test-fraction", so->cfg.test_fraction,
                    "held-out fraction per class");
  synth->add_option("--frames", so->cfg.dynamic_frames,
                    "frames per dynamic clip");
  synth->add_option("--seed", so->cfg.seed, "dataset seed");
  synth->callback([so] {
    GestureDataset data = synth_dataset(so->cfg);
    save_gesture_samples(so->train, data.train);
    save_gesture_samples(so->test, data.test);
    std::cout << "wrote " << data.train.size() << " train / "
              << data.test.size() << " test samples\n";
  });

  auto* train = gesture->add_subcommand("train", "train both classifiers");
  struct TrainOpts {
    std::string data, out;
    TrainConfig cfg;
  };
  auto to = std::make_shared<TrainOpts>();
  train->add_option("--train", to->data, "training samples")->required();
  train->add_option("--out", to->out, "output model file")->required();
  train->add_option("--epochs", to->cfg.epochs, "training epochs");
  train->add_option("--lr", to->cfg.lr, "learning rate");
  train->add_option("--batch", to->cfg.batch, "minibatch size");
  train->add_option("--seed", to->cfg.seed, "init and shuffle seed");
  train->callback([to] {
    GestureDataset data;
    data.train = load_gesture_samples(to->data);
    GestureModels models;
    auto mlp = mlp_train(data, models.cam, to->cfg);
    auto rnn = rnn_train(data, models.cam, to->cfg);
    models.static_model = mlp.model;
    models.dynamic_model = rnn.model;
    save_models(to->out, models);
    std::cout << "static loss " << fmt(mlp.epoch_losses.back())
              << ", dynamic loss " << fmt(rnn.epoch_losses.back()) << "\n";
  });

  auto* eval = gesture->add_subcommand("eval", "evaluate trained classifiers");
  struct EvalOpts {
    std::string models, data;
  };
  auto eo = std::make_shared<EvalOpts>();
  eval->add_option("--models", eo->models, "model file")->required();
  eval->add_option("--data", eo->data, "evaluation samples")->required();
  eval->callback([eo] {
    GestureModels models = load_models(eo->models);
    auto samples = load_gesture_samples(eo->data);
    int n_static = 0, n_dynamic = 0;
    for (const auto& s : samples)
      (is_static_gesture(s.label) ? n_static : n_dynamic) += 1;
    double sa = eval_static_accuracy(models.static_model, samples, models.cam);
    double da = eval_dynamic_accuracy(models.dynamic_model, samples,
                                      models.cam);
    std::cout << "static: " << fmt(sa) << " of " << n_static << " samples\n";
    std::cout << "dynamic: " << fmt(da) << " of " << n_dynamic
              << " samples\n";
  });
}

void add_resolve(CLI::App& app) {
  auto* cmd = app.add_subcommand("resolve", "ground a pointing gesture");
  struct Opts {
    std::string scene, hand, target, mode = "object", ontology;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--scene", o->scene, "scene file")->required();
  cmd->add_option("--hand", o->hand, "hand keypoint file")->required();
  cmd->add_option("--target", o->target, "noun phrase to ground");
  cmd->add_option("--mode", o->mode, "object | location | direction")
      ->check(CLI::IsMember({"object", "location", "direction"}));
  cmd->add_option("--ontology", o->ontology, "ontology file");
  cmd->callback([o] {
    Scene scene = load_scene(o->scene);
    HandKeypoints hand = load_hand(o->hand);
    if (o->mode == "object") {
      if (o->target.empty())
        throw ConfigError("mode=object needs --target");
      Ontology onto = o->ontology.empty()
                          ? Ontology::from_prefixes(scene_vocabulary(scene))
                          : load_ontology(o->ontology);
      ObjectEntry hit = resolve_object(scene, hand, o->target, onto);
      std::cout << hit.label << " " << detail::format_vec3(hit.position)
                << "\n";
    } else if (o->mode == "location") {
      std::cout << detail::format_vec3(resolve_location(scene, hand)) << "\n";
    } else {
      std::cout << detail::format_vec3(resolve_direction(hand)) << "\n";
    }
  });
}

void add_plan(CLI::App& app) {
  auto* cmd = app.add_subcommand("plan", "turn one instruction into a program");
  struct Opts {
    std::string speech, gesture;
    int index = 0;
    std::string backend = "rule";
    std::optional<std::string> transcripts, out;
    bool validate_only = false;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--speech", o->speech, "transcribed speech");
  cmd->add_option("--gesture", o->gesture,
                  "gesture name or free-form description");
  cmd->add_option("--index", o->index, "instruction index");
  cmd->add_option("--backend", o->backend, "rule | replay | remote")
      ->check(CLI::IsMember({"rule", "replay", "remote"}));
  cmd->add_option("--transcripts", o->transcripts, "replay store directory");
  cmd->add_option("--out", o->out, "also write the program to a file");
  cmd->add_flag("--validate-only", o->validate_only,
                "print and validate without writing --out");
  cmd->callback([o] {
    Instruction ins;
    ins.speech_text = o->speech;
    ins.index = o->index;
    if (!o->gesture.empty()) ins.gesture = gesture_from_flag(o->gesture);
    auto backend = make_backend(o->backend, o->transcripts);
    PlanResult plan =
        plan_instruction(default_prompt_context(), ins, *backend);
    std::string program = pretty_print(plan.program);
    std::cout << program;
    if (o->out && !o->validate_only) detail::write_file(*o->out, program);
    if (!plan.ok()) {
      for (const auto& v : plan.violations)
        std::cerr << "line " << v.line << ": "
                  << violation_kind_name(v.kind) << ": " << v.message << "\n";
      throw InvalidSpecError("planned program failed validation");
    }
  });
}

void add_run(CLI::App& app) {
  auto* cmd = app.add_subcommand("run", "execute one scenario file");
  struct Opts {
    std::string scenario;
    std::optional<std::string> models, report, csv;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--scenario", o->scenario, "scenario file")->required();
  cmd->add_option("--models", o->models,
                  "classify scripted gestures with these models");
  cmd->add_option("--report", o->report, "write the text report here");
  cmd->add_option("--csv", o->csv, "write a one-row CSV here");
  cmd->callback([o] {
    ScenarioSpec spec = load_scenario(o->scenario);
    std::optional<GestureModels> models;
    if (o->models) models = load_models(*o->models);
    Metrics m = run_scenario(spec, models ? &*models : nullptr);
    std::string text = metrics_text(spec.id, m);
    std::cout << text;
    if (o->report) detail::write_file(*o->report, text);
    if (o->csv)
      detail::write_file(*o->csv, std::string(kMetricsCsvHeader) + "\n" +
                                      metrics_csv_row(spec.id, m) + "\n");
  });
}

void add_batch(CLI::App& app) {
  auto* cmd = app.add_subcommand("batch",
                                 "run every scenario in a directory");
  struct Opts {
    std::string dir;
    std::optional<std::string> models, out;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--dir", o->dir, "directory of scenario .json files")
      ->required();
  cmd->add_option("--models", o->models,
                  "classify scripted gestures with these models");
  cmd->add_option("--out", o->out, "write the CSV here (default stdout)");
  cmd->callback([o] {
    if (!fs::is_directory(o->dir))
      throw FileParseError(o->dir + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(o->dir))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::optional<GestureModels> models;
    if (o->models) models = load_models(*o->models);
    std::string csv = std::string(kMetricsCsvHeader) + "\n";
    for (const auto& f : files) {
      ScenarioSpec spec = load_scenario(f);
      Metrics m = run_scenario(spec, models ? &*models : nullptr);
      csv += metrics_csv_row(spec.id, m) + "\n";
    }
    emit(o->out, csv);
  });
}

void add_sweep(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "sweep", "pointing accuracy over spacing x distance");
  struct Opts {
    SweepConfig cfg;
    std::string spacings, distances;
    std::optional<std::string> out;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--trials", o->cfg.trials_per_cell, "trials per cell");
  cmd->add_option("--noise", o->cfg.noise_sigma,
                  "keypoint noise sigma in meters");
  cmd->add_option("--seed", o->cfg.seed, "sweep seed");
  cmd->add_option("--spacings", o->spacings, "comma-separated spacings");
  cmd->add_option("--distances", o->distances, "comma-separated distances");
  cmd->add_option("--out", o->out, "write the CSV here (default stdout)");
  cmd->callback([o] {
    if (!o->spacings.empty())
      o->cfg.spacings = parse_list(o->spacings, "--spacings");
    if (!o->distances.empty())
      o->cfg.distances = parse_list(o->distances, "--distances");
    SweepResult result = spacing_distance_sweep(o->cfg);
    emit(o->out, sweep_csv(result));
  });
}

void add_gi_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("gi-eval",
                                 "score planners on GestureInstruct cases");
  struct Opts {
    std::string cases;
    std::string backend = "rule";
    std::optional<std::string> transcripts, out;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--cases", o->cases, "case file")->required();
  cmd->add_option("--backend", o->backend, "rule | replay | remote")
      ->check(CLI::IsMember({"rule", "replay", "remote"}));
  cmd->add_option("--transcripts", o->transcripts, "replay store directory");
  cmd->add_option("--out", o->out, "write the per-case CSV here");
  cmd->callback([o] {
    auto cases = load_gesture_instruct(o->cases);
    PrimitiveCatalog catalog = PrimitiveCatalog::defaults();
    for (const auto& c : cases) validate_gi_case(c, catalog);
    auto backend = make_backend(o->backend, o->transcripts);
    GiReport report = run_gesture_instruct(cases, *backend);
    std::cout << gi_report_text(report);
    if (o->out) detail::write_file(*o->out, gi_report_csv(report));
  });
}

void add_record(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "record", "capture backend completions into a replay store");
  struct Opts {
    std::string transcripts;
    std::string backend = "remote";
    std::optional<std::string> scenario;
    std::string speech, gesture;
    int index = 0;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--transcripts", o->transcripts, "replay store directory")
      ->required();
  cmd->add_option("--backend", o->backend, "remote | rule")
      ->check(CLI::IsMember({"remote", "rule"}));
  cmd->add_option("--scenario", o->scenario,
                  "record every prompt this scenario issues");
  cmd->add_option("--speech", o->speech, "one-shot instruction speech");
  cmd->add_option("--gesture", o->gesture, "one-shot gesture");
  cmd->add_option("--index", o->index, "one-shot instruction index");
  cmd->callback([o] {
    auto inner = make_backend(o->backend, std::nullopt);
    RecordingBackend recorder(*inner, o->transcripts);
    if (o->scenario) {
      ScenarioSpec spec = load_scenario(*o->scenario);
      run_scenario(spec, recorder);
    } else {
      Instruction ins;
      ins.speech_text = o->speech;
      ins.index = o->index;
      if (!o->gesture.empty()) ins.gesture = gesture_from_flag(o->gesture);
      PlanResult plan =
          plan_instruction(default_prompt_context(), ins, recorder);
      std::cout << plan.digest << "\n";
    }
    std::cout << "recorded " << recorder.recorded() << " transcripts in "
              << o->transcripts << "\n";
  });
}

void add_serve(CLI::App& app) {
  auto* cmd = app.add_subcommand("serve", "run the grounding service");
  struct Opts {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string scene, ontology, fixtures;
    std::string backend = "rule";
    std::string transcripts;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--host", o->host, "bind address");
  cmd->add_option("--port", o->port, "bind port");
  cmd->add_option("--scene", o->scene, "default scene file");
  cmd->add_option("--ontology", o->ontology, "default ontology file");
  cmd->add_option("--fixtures", o->fixtures, "base directory for scene_ref");
  cmd->add_option("--backend", o->backend, "rule | replay")
      ->check(CLI::IsMember({"rule", "replay"}));
  cmd->add_option("--transcripts", o->transcripts, "replay store directory");
  cmd->callback([o] {
    GroundingService::Config cfg;
    if (!o->scene.empty()) cfg.scene = load_scene(o->scene);
    if (!o->ontology.empty()) cfg.ontology = load_ontology(o->ontology);
    cfg.fixture_dir = o->fixtures;
    cfg.backend = o->backend;
    cfg.transcript_dir = o->transcripts;
    GroundingService service(std::move(cfg));
    std::cout << "listening on " << o->host << ":" << o->port << "\n";
    if (!service.listen(o->host, o->port))
      throw ConfigError("could not bind " + o->host + ":" +
                        std::to_string(o->port));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grounds speech and gesture into robot arm programs", "giraf"};
  app.require_subcommand(1);
  add_scene(app);
  add_gesture(app);
  add_resolve(app);
  add_plan(app);
  add_run(app);
  add_batch(app);
  add_sweep(app);
  add_gi_eval(app);
  add_record(app);
  add_serve(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
