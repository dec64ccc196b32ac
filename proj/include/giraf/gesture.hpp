#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "giraf/error.hpp"
#include "giraf/geometry.hpp"
#include "giraf/hand.hpp"
#include "giraf/nn.hpp"

namespace giraf {

// Static classes first, dynamic classes second, Unknown last; the trained
// class indices below depend on this ordering.
enum class GestureClass {
  Pointing,
  OpenPalmUp,
  OpenPalmOut,
  Fist,
  ThumbsUp,
  ThumbsDown,
  Ok,
  Pinch,
  Beckoning,
  CirclingHorizontal,
  CirclingVertical,
  Hammering,
  PickUpMotion,
  ReleaseMotion,
  Twisting,
  Unknown,
};

inline constexpr int kNumStaticClasses = 8;
inline constexpr int kNumDynamicClasses = 7;

inline bool is_static_gesture(GestureClass c) {
  return static_cast<int>(c) < kNumStaticClasses;
}

inline bool is_dynamic_gesture(GestureClass c) {
  int i = static_cast<int>(c);
  return i >= kNumStaticClasses &&
         i < kNumStaticClasses + kNumDynamicClasses;
}

inline int static_index(GestureClass c) {
  return is_static_gesture(c) ? static_cast<int>(c) : -1;
}

inline int dynamic_index(GestureClass c) {
  return is_dynamic_gesture(c) ? static_cast<int>(c) - kNumStaticClasses : -1;
}

inline GestureClass static_class_at(int i) {
  return static_cast<GestureClass>(i);
}

inline GestureClass dynamic_class_at(int i) {
  return static_cast<GestureClass>(kNumStaticClasses + i);
}

// Machine id, e.g. "thumbs_up"; gesture_label() is the human form with spaces.
inline const char* gesture_id(GestureClass c) {
  switch (c) {
    case GestureClass::Pointing: return "pointing";
    case GestureClass::OpenPalmUp: return "open_palm_up";
    case GestureClass::OpenPalmOut: return "open_palm_out";
    case GestureClass::Fist: return "fist";
    case GestureClass::ThumbsUp: return "thumbs_up";
    case GestureClass::ThumbsDown: return "thumbs_down";
    case GestureClass::Ok: return "ok";
    case GestureClass::Pinch: return "pinch";
    case GestureClass::Beckoning: return "beckoning";
    case GestureClass::CirclingHorizontal: return "circling_horizontal";
    case GestureClass::CirclingVertical: return "circling_vertical";
    case GestureClass::Hammering: return "hammering";
    case GestureClass::PickUpMotion: return "pick_up_motion";
    case GestureClass::ReleaseMotion: return "release_motion";
    case GestureClass::Twisting: return "twisting";
    case GestureClass::Unknown: return "unknown";
  }
  return "unknown";
}

inline std::string gesture_label(GestureClass c) {
  std::string s = gesture_id(c);
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

inline std::optional<GestureClass> parse_gesture(std::string_view name) {
  std::string key(name);
  std::replace(key.begin(), key.end(), ' ', '_');
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  for (int i = 0; i <= static_cast<int>(GestureClass::Unknown); ++i) {
    auto c = static_cast<GestureClass>(i);
    if (key == gesture_id(c)) return c;
  }
  return std::nullopt;
}

inline std::vector<GestureClass> static_gesture_classes() {
  std::vector<GestureClass> v;
  for (int i = 0; i < kNumStaticClasses; ++i) v.push_back(static_class_at(i));
  return v;
}

inline std::vector<GestureClass> dynamic_gesture_classes() {
  std::vector<GestureClass> v;
  for (int i = 0; i < kNumDynamicClasses; ++i) v.push_back(dynamic_class_at(i));
  return v;
}

using FeatureVector = std::vector<double>;
inline constexpr int kFeatureDim = 106;

// 42 image entries (u/width, v/height per keypoint), 63 world entries
// (wrist-centred, scaled by the wrist->middle-MCP distance), then confidence.
// Image entries are left un-centred on purpose: global hand translation is
// the signal that separates the circling/hammering motions.
inline FeatureVector extract_features(const HandKeypoints& frame,
                                      const CameraIntrinsics& cam) {
  FeatureVector f(kFeatureDim);
  for (int k = 0; k < kp::kCount; ++k) {
    f[2 * k] = frame.image_coords[k].u / cam.width;
    f[2 * k + 1] = frame.image_coords[k].v / cam.height;
  }
  const Vec3& wrist = frame.world_coords[kp::kWrist];
  double scale = norm(frame.world_coords[kp::kMiddleMcp] - wrist);
  if (scale < 1e-9) scale = 1.0;
  for (int k = 0; k < kp::kCount; ++k) {
    Vec3 p = (frame.world_coords[k] - wrist) / scale;
    f[42 + 3 * k] = p.x;
    f[42 + 3 * k + 1] = p.y;
    f[42 + 3 * k + 2] = p.z;
  }
  f[105] = frame.confidence;
  return f;
}

struct GestureObservation {
  GestureClass cls = GestureClass::Unknown;
  double confidence = 0.0;
  std::vector<HandKeypoints> frames;
  double gesture_time = 0.0;
};

// The three fidelity levels a gesture can be reported at.
struct GestureRepresentation {
  struct Label {
    GestureClass value;
  };
  struct Description {
    std::string text;
  };
  struct Numeric {
    GestureObservation observation;
  };
  std::variant<Label, Description, Numeric> rep;

  static GestureRepresentation label(GestureClass c) {
    return {Label{c}};
  }
  static GestureRepresentation description(std::string text) {
    return {Description{std::move(text)}};
  }
  static GestureRepresentation numeric(GestureObservation obs) {
    return {Numeric{std::move(obs)}};
  }
};

struct GestureSample {
  std::vector<HandKeypoints> frames;
  GestureClass label = GestureClass::Unknown;
};

struct GestureDataset {
  std::vector<GestureSample> train;
  std::vector<GestureSample> test;
  std::uint64_t seed = 0;
};

inline constexpr int kDynamicWindow = 16;
inline constexpr int kDynamicMinFrames = 8;

struct GestureModels {
  MlpModel static_model;
  LstmModel dynamic_model;
  CameraIntrinsics cam = default_camera();
};

namespace detail {

inline std::vector<std::vector<double>> window_features(
    const std::vector<HandKeypoints>& frames, const CameraIntrinsics& cam) {
  std::size_t start =
      frames.size() > kDynamicWindow ? frames.size() - kDynamicWindow : 0;
  std::vector<std::vector<double>> feats;
  for (std::size_t i = start; i < frames.size(); ++i)
    feats.push_back(extract_features(frames[i], cam));
  return feats;
}

}  // namespace detail

// Short clips go to the static classifier (last frame); longer clips run
// both and keep the more confident head. Below-threshold winners degrade to
// Unknown rather than raising.
inline GestureObservation classify(const GestureModels& models,
                                   const std::vector<HandKeypoints>& frames,
                                   double threshold = 0.5) {
  if (frames.empty()) throw EmptySequenceError();

  auto static_probs =
      mlp_forward(models.static_model,
                  extract_features(frames.back(), models.cam));
  auto s_it = std::max_element(static_probs.begin(), static_probs.end());
  GestureClass cls =
      static_class_at(static_cast<int>(s_it - static_probs.begin()));
  double conf = *s_it;

  if (static_cast<int>(frames.size()) >= kDynamicMinFrames) {
    auto dyn_probs = rnn_forward(models.dynamic_model,
                                 detail::window_features(frames, models.cam));
    auto d_it = std::max_element(dyn_probs.begin(), dyn_probs.end());
    if (*d_it > conf) {
      cls = dynamic_class_at(static_cast<int>(d_it - dyn_probs.begin()));
      conf = *d_it;
    }
  }

  if (conf < threshold) cls = GestureClass::Unknown;

  GestureObservation obs;
  obs.cls = cls;
  obs.confidence = conf;
  obs.frames = frames;
  obs.gesture_time = frames[(frames.size() - 1) / 2].timestamp;
  return obs;
}

inline TrainResult<MlpModel> mlp_train(const GestureDataset& data,
                                       const CameraIntrinsics& cam,
                                       const TrainConfig& cfg) {
  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  for (const auto& s : data.train) {
    if (!is_static_gesture(s.label)) continue;
    if (s.frames.empty()) throw EmptySequenceError();
    xs.push_back(extract_features(s.frames.back(), cam));
    ys.push_back(static_index(s.label));
  }
  if (xs.empty()) throw EmptyDatasetError("no static samples to train on");
  return mlp_train(MlpModel::random_init(kFeatureDim, 64, 32,
                                         kNumStaticClasses, cfg.seed),
                   xs, ys, cfg);
}

inline TrainResult<LstmModel> rnn_train(const GestureDataset& data,
                                        const CameraIntrinsics& cam,
                                        const TrainConfig& cfg) {
  std::vector<std::vector<std::vector<double>>> xs;
  std::vector<int> ys;
  for (const auto& s : data.train) {
    if (!is_dynamic_gesture(s.label)) continue;
    if (s.frames.empty()) throw EmptySequenceError();
    xs.push_back(detail::window_features(s.frames, cam));
    ys.push_back(dynamic_index(s.label));
  }
  if (xs.empty()) throw EmptyDatasetError("no dynamic samples to train on");
  return lstm_train(LstmModel::random_init(kFeatureDim, 64,
                                           kNumDynamicClasses, cfg.seed),
                    xs, ys, cfg);
}

// Fraction of samples whose argmax class matches the label.
inline double eval_static_accuracy(const MlpModel& model,
                                   const std::vector<GestureSample>& samples,
                                   const CameraIntrinsics& cam) {
  int n = 0, correct = 0;
  for (const auto& s : samples) {
    if (!is_static_gesture(s.label)) continue;
    ++n;
    auto p = mlp_forward(model, extract_features(s.frames.back(), cam));
    int arg = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    if (arg == static_index(s.label)) ++correct;
  }
  return n == 0 ? 0.0 : static_cast<double>(correct) / n;
}

inline double eval_dynamic_accuracy(const LstmModel& model,
                                    const std::vector<GestureSample>& samples,
                                    const CameraIntrinsics& cam) {
  int n = 0, correct = 0;
  for (const auto& s : samples) {
    if (!is_dynamic_gesture(s.label)) continue;
    ++n;
    auto p = rnn_forward(model, detail::window_features(s.frames, cam));
    int arg = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    if (arg == dynamic_index(s.label)) ++correct;
  }
  return n == 0 ? 0.0 : static_cast<double>(correct) / n;
}

}  // namespace giraf
