#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "giraf/error.hpp"
#include "giraf/gesture.hpp"
#include "giraf/policy.hpp"

namespace giraf {

struct WordTiming {
  std::string word;
  double start = 0.0;  // seconds
  double end = 0.0;
  bool operator==(const WordTiming&) const = default;
};

// One utterance with its synchronized gesture, if any. `index` numbers the
// instruction within a session and shows up in the textualized comment.
struct Instruction {
  std::string speech_text;
  std::vector<WordTiming> word_timings;
  std::optional<GestureRepresentation> gesture;
  std::optional<double> gesture_time;
  int index = 0;
};

inline void validate_instruction(const Instruction& ins) {
  for (std::size_t i = 0; i + 1 < ins.word_timings.size(); ++i)
    if (ins.word_timings[i + 1].start < ins.word_timings[i].start)
      throw InvalidSpecError("word_timings out of order");
  for (const auto& wt : ins.word_timings)
    if (wt.end < wt.start)
      throw InvalidSpecError("word timing '" + wt.word +
                             "' ends before it starts");
  if (ins.gesture_time && !ins.word_timings.empty()) {
    double lo = ins.word_timings.front().start - 2.0;
    double hi = ins.word_timings.back().end + 2.0;
    if (*ins.gesture_time < lo || *ins.gesture_time > hi)
      throw InvalidSpecError("gesture_time outside the utterance span +/- 2 s");
  }
}

// What goes after "# Gesture: ". Labels and classified observations print
// their human-readable label, descriptions are passed through verbatim, and
// everything absent or unrecognized prints "none detected".
inline std::string gesture_line_text(
    const std::optional<GestureRepresentation>& g) {
  if (!g) return "none detected";
  if (const auto* l = std::get_if<GestureRepresentation::Label>(&g->rep))
    return l->value == GestureClass::Unknown ? "none detected"
                                             : gesture_label(l->value);
  if (const auto* d = std::get_if<GestureRepresentation::Description>(&g->rep))
    return d->text;
  const auto& obs = std::get<GestureRepresentation::Numeric>(g->rep).observation;
  return obs.cls == GestureClass::Unknown ? "none detected"
                                          : gesture_label(obs.cls);
}

inline std::string textualize_instruction(const Instruction& ins) {
  return "# Instruction " + std::to_string(ins.index) + ": " +
         ins.speech_text + "\n# Gesture: " + gesture_line_text(ins.gesture) +
         "\n";
}

struct Prompt {
  std::string preamble;
  std::string instruction_block;
  std::vector<std::string> stop;
  double temperature = 0.0;
  int max_tokens = 256;

  std::string text() const { return preamble + instruction_block; }
};

struct PromptContext {
  PrimitiveCatalog catalog = PrimitiveCatalog::defaults();
  std::string header;                 // leading prose, '#'-commented
  std::vector<std::string> few_shot;  // complete example blocks
};

inline std::string function_signature(const FunctionSpec& spec) {
  std::string s = spec.name + "(";
  for (std::size_t i = 0; i < spec.params.size(); ++i) {
    if (i) s += ", ";
    s += value_kind_name(spec.params[i]);
  }
  s += ")";
  if (spec.returns != ValueKind::Void)
    s += std::string(" -> ") + value_kind_name(spec.returns);
  return s;
}

inline std::string catalog_docs(const PrimitiveCatalog& catalog) {
  std::string out = "# Perception API:\n";
  for (const auto& [name, spec] : catalog.all())
    if (spec.perception)
      out += "#   " + function_signature(spec) + "  -- " + spec.doc + "\n";
  out += "# Action primitives:\n";
  for (const auto& [name, spec] : catalog.all())
    if (!spec.perception)
      out += "#   " + function_signature(spec) + "  -- " + spec.doc + "\n";
  return out;
}

inline Prompt assemble_prompt(const PromptContext& ctx,
                              const std::string& instruction_block) {
  if (ctx.few_shot.empty())
    throw InvalidSpecError("prompt context needs at least one few-shot example");
  Prompt p;
  p.preamble = ctx.header;
  if (!p.preamble.empty() && p.preamble.back() != '\n') p.preamble += '\n';
  p.preamble += catalog_docs(ctx.catalog);
  p.preamble += '\n';
  for (const auto& ex : ctx.few_shot) {
    p.preamble += ex;
    if (ex.empty() || ex.back() != '\n') p.preamble += '\n';
    p.preamble += '\n';
  }
  p.instruction_block = instruction_block;
  p.stop = {"\n# Instruction"};
  return p;
}

inline PromptContext default_prompt_context() {
  PromptContext ctx;
  ctx.header =
      "# You control a single robot arm above a table.\n"
      "# For each instruction block below, write straight-line code that\n"
      "# completes the request using only the listed functions.\n";
  ctx.few_shot = {
      "# Instruction 0: move over here\n"
      "# Gesture: fist\n"
      "target_pos = detect_hand_center_pos()\n"
      "move_gripper_to_pos(target_pos)\n",
      "# Instruction 0: give me that wrench\n"
      "# Gesture: pointing\n"
      "wrench_pos = detect_referred_obj_pos('wrench')\n"
      "pick_up_obj_at_pos(wrench_pos)\n"
      "target_pos = detect_hand_center_pos()\n"
      "move_gripper_to_pos(target_pos)\n"
      "open_gripper()\n"};
  return ctx;
}

// 64-bit FNV-1a, printed as 16 lowercase hex digits. Keys the replay store.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[16];
  const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  return std::string(buf, 16);
}

inline std::string prompt_digest(const Prompt& p) { return fnv1a_hex(p.text()); }

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const Prompt& prompt) = 0;
  virtual std::string name() const = 0;
};

// Digest-keyed transcript store: a directory of files named by the prompt
// digest, each holding the raw completion. Never fabricates on a miss.
class ReplayBackend : public CompletionBackend {
 public:
  explicit ReplayBackend(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::string complete(const Prompt& prompt) override {
    std::string digest = prompt_digest(prompt);
    std::ifstream in(dir_ / digest, std::ios::binary);
    if (!in) throw TranscriptMissError(digest);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void record(const Prompt& prompt, const std::string& completion) {
    std::filesystem::create_directories(dir_);
    std::ofstream out(dir_ / prompt_digest(prompt), std::ios::binary);
    out << completion;
  }

  std::string name() const override { return "replay"; }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

namespace detail {

// Coarse gesture category the rule table keys on. PalmDown has no classifier
// class and only ever arrives as a description.
enum class RuleGesture {
  None,
  Other,
  PalmDown,
  Pointing,
  PalmUp,
  PalmOut,
  Fist,
  ThumbsUp,
  ThumbsDown,
  Ok,
  Pinch,
  Beckoning,
  CirclingH,
  CirclingV,
  Hammering,
  PickUp,
  Release,
  Twisting,
};

inline RuleGesture rule_gesture_of(GestureClass c) {
  switch (c) {
    case GestureClass::Pointing: return RuleGesture::Pointing;
    case GestureClass::OpenPalmUp: return RuleGesture::PalmUp;
    case GestureClass::OpenPalmOut: return RuleGesture::PalmOut;
    case GestureClass::Fist: return RuleGesture::Fist;
    case GestureClass::ThumbsUp: return RuleGesture::ThumbsUp;
    case GestureClass::ThumbsDown: return RuleGesture::ThumbsDown;
    case GestureClass::Ok: return RuleGesture::Ok;
    case GestureClass::Pinch: return RuleGesture::Pinch;
    case GestureClass::Beckoning: return RuleGesture::Beckoning;
    case GestureClass::CirclingHorizontal: return RuleGesture::CirclingH;
    case GestureClass::CirclingVertical: return RuleGesture::CirclingV;
    case GestureClass::Hammering: return RuleGesture::Hammering;
    case GestureClass::PickUpMotion: return RuleGesture::PickUp;
    case GestureClass::ReleaseMotion: return RuleGesture::Release;
    case GestureClass::Twisting: return RuleGesture::Twisting;
    case GestureClass::Unknown: return RuleGesture::None;
  }
  return RuleGesture::None;
}

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Map the "# Gesture:" text back to a category: exact labels first, then
// distinctive description phrases (most specific first).
inline RuleGesture gesture_text_category(std::string_view raw) {
  std::string text = lowercase(std::string(raw));
  if (text.empty() || text == "none detected") return RuleGesture::None;
  if (auto c = parse_gesture(text)) return rule_gesture_of(*c);
  auto has = [&](const char* s) { return text.find(s) != std::string::npos; };
  if (has("inward and outward repeatedly")) return RuleGesture::Beckoning;
  if (has("circular motion horizontally")) return RuleGesture::CirclingH;
  if (has("circular motion vertically")) return RuleGesture::CirclingV;
  if (has("up and down")) return RuleGesture::Hammering;
  if (has("first faces upward")) return RuleGesture::PickUp;
  if (has("first faces downward")) return RuleGesture::Release;
  if (has("points upward")) return RuleGesture::ThumbsUp;
  if (has("points down")) return RuleGesture::ThumbsDown;
  if (has("thumb and index") && has("forms a circle")) return RuleGesture::Ok;
  if (has("thumb and index") && has("separate")) return RuleGesture::Release;
  if (has("thumb and index") && has("touch each other")) return RuleGesture::Pinch;
  if (has("rotates")) return RuleGesture::Twisting;
  if (has("index finger extends out")) return RuleGesture::Pointing;
  if (has("open palm faces outward")) return RuleGesture::PalmOut;
  if (has("open palm faces upward")) return RuleGesture::PalmUp;
  if (has("open palm faces downward")) return RuleGesture::PalmDown;
  if (has("closed palm")) return RuleGesture::Fist;
  return RuleGesture::Other;
}

inline std::vector<std::string> speech_words(std::string_view speech) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : speech) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

inline bool is_determiner(const std::string& w) {
  return w == "the" || w == "that" || w == "this" || w == "those" ||
         w == "these" || w == "a" || w == "an";
}

// The noun phrase a deictic query should search for: everything after the
// last determiner ("pick up this water jug" -> "water jug"), else the last
// word that is not a filler.
inline std::string extract_object_phrase(const std::vector<std::string>& words) {
  std::ptrdiff_t last_det = -1;
  for (std::size_t i = 0; i < words.size(); ++i)
    if (is_determiner(words[i])) last_det = static_cast<std::ptrdiff_t>(i);
  std::string out;
  if (last_det >= 0)
    for (std::size_t i = static_cast<std::size_t>(last_det) + 1;
         i < words.size(); ++i) {
      if (!out.empty()) out += ' ';
      out += words[i];
    }
  if (out.empty()) {
    auto filler = [](const std::string& w) {
      for (const char* f : {"up", "it", "me", "to", "of", "please", "over",
                            "here", "and", "or", "is", "are", "am", "i", "you",
                            "my", "your", "can", "could", "would", "do", "did",
                            "now", "with", "at", "on", "in", "by", "for",
                            "into", "away", "all", "much", "little", "bit",
                            "way", "some"})
        if (w == f) return true;
      return is_determiner(w);
    };
    for (auto it = words.rbegin(); it != words.rend(); ++it)
      if (!filler(*it)) return *it;
  }
  return out;
}

inline std::string phrase_identifier(const std::string& phrase) {
  std::string id;
  for (char ch : phrase) {
    if (std::isalnum(static_cast<unsigned char>(ch)))
      id += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    else if (!id.empty() && id.back() != '_')
      id += '_';
  }
  while (!id.empty() && id.back() == '_') id.pop_back();
  if (id.empty()) return "obj";
  if (std::isdigit(static_cast<unsigned char>(id[0]))) id = "obj_" + id;
  return id;
}

inline std::string fetch_object_code(const std::string& phrase) {
  std::string var = phrase_identifier(phrase) + "_pos";
  return var + " = detect_referred_obj_pos('" + phrase + "')\n" +
         "pick_up_obj_at_pos(" + var + ")\n" +
         "target_pos = detect_hand_center_pos()\n"
         "move_gripper_to_pos(target_pos)\n"
         "open_gripper()\n";
}

inline std::string pick_object_code(const std::string& phrase) {
  std::string var = phrase_identifier(phrase) + "_pos";
  return var + " = detect_referred_obj_pos('" + phrase + "')\n" +
         "pick_up_obj_at_pos(" + var + ")\n";
}

inline const char* kMoveToHandCode =
    "target_pos = detect_hand_center_pos()\n"
    "move_gripper_to_pos(target_pos)\n";

inline const char* kHandoverCode =
    "target_pos = detect_hand_center_pos()\n"
    "move_gripper_to_pos(target_pos)\n"
    "open_gripper()\n";

inline const char* kTouchPickCode =
    "obj_pos = detect_hand_center_pos()\n"
    "pick_up_obj_at_pos(obj_pos)\n";

inline const char* kPlaceCode =
    "target_pos = detect_referred_location()\n"
    "place_obj_at_pos(target_pos)\n";

inline const char* kDirectionCode =
    "move_dir = detect_referred_direction()\n"
    "move_gripper_by_dir(move_dir, 0.1)\n";

inline const char* kDrawCode =
    "move_dir = detect_referred_direction()\n"
    "move_gripper_by_dir(move_dir, 0.05)\n";

inline const char* kDrawerCode =
    "drawer_pos = detect_referred_obj_pos('drawer')\n"
    "open_drawer_at_pos(drawer_pos)\n";

inline const char* kThrowAwayCode =
    "obj_pos = detect_referred_location()\n"
    "pick_up_obj_at_pos(obj_pos)\n"
    "trash_pos = detect_referred_obj_pos('trash can')\n"
    "place_obj_at_pos(trash_pos)\n";

// The deterministic decision table. Keyword+gesture rows first (most specific
// wins), then gesture-only defaults, then the say() fallback.
inline std::string rule_plan_text(const std::string& speech,
                                  const std::string& gesture_text) {
  RuleGesture g = gesture_text_category(gesture_text);
  std::vector<std::string> words = speech_words(speech);
  auto has_word = [&](std::initializer_list<const char*> any) {
    for (const char* w : any)
      for (const auto& s : words)
        if (s == w) return true;
    return false;
  };
  bool pointing_like = g == RuleGesture::Pointing ||
                       g == RuleGesture::CirclingH ||
                       g == RuleGesture::CirclingV;

  if (has_word({"stop"})) return "stop()\n";
  if (g == RuleGesture::PalmUp && has_word({"here", "hand", "me"}))
    return kHandoverCode;
  if ((g == RuleGesture::Fist || g == RuleGesture::Beckoning) &&
      (words.empty() || has_word({"here", "come", "over"})))
    return kMoveToHandCode;
  if (g == RuleGesture::PalmDown && has_word({"pick", "grab", "take"}))
    return kTouchPickCode;
  if (pointing_like) {
    std::string phrase = extract_object_phrase(words);
    if (phrase.empty()) phrase = "object";
    if (has_word({"open"}) && has_word({"drawer"})) return kDrawerCode;
    if (has_word({"give", "hand", "fetch", "bring"}))
      return fetch_object_code(phrase);
    if (has_word({"put", "place"})) return kPlaceCode;
    if (has_word({"move"}) && has_word({"way", "direction"}))
      return kDirectionCode;
    if (has_word({"throw"})) return kThrowAwayCode;
    if (has_word({"draw"})) return kDrawCode;
    if (has_word({"pick", "grab", "take"})) return pick_object_code(phrase);
  }
  if (has_word({"grasp"})) return "close_gripper()\n";
  if (has_word({"drop", "release"})) return "open_gripper()\n";
  if (has_word({"turn"}) && (g == RuleGesture::CirclingH ||
                             g == RuleGesture::CirclingV ||
                             g == RuleGesture::Twisting))
    return "twist_gripper()\n";
  if (has_word({"tool"}) && g == RuleGesture::Hammering)
    return fetch_object_code("hammer");
  if (has_word({"tool"}) && g == RuleGesture::Twisting)
    return fetch_object_code("screwdriver");
  switch (g) {
    case RuleGesture::ThumbsUp:
    case RuleGesture::Ok:
    case RuleGesture::Pinch:
    case RuleGesture::PickUp:
      return "close_gripper()\n";
    case RuleGesture::ThumbsDown:
      return "say('how should I correct it')\n";
    case RuleGesture::PalmOut:
      return "stop()\n";
    case RuleGesture::Release:
      return "open_gripper()\n";
    case RuleGesture::Twisting:
      return "twist_gripper()\n";
    case RuleGesture::PalmUp:
      return kHandoverCode;
    case RuleGesture::Fist:
    case RuleGesture::Beckoning:
      return kMoveToHandCode;
    default:
      break;
  }
  return "say('I did not understand')\n";
}

// Pull (speech, gesture text) back out of the two-comment instruction block.
inline std::pair<std::string, std::string> parse_instruction_block(
    const std::string& block) {
  std::string speech, gesture = "none detected";
  std::istringstream in(block);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("# Instruction", 0) == 0) {
      auto colon = line.find(": ");
      if (colon != std::string::npos) speech = line.substr(colon + 2);
    } else if (line.rfind("# Gesture: ", 0) == 0) {
      gesture = line.substr(11);
    }
  }
  return {speech, gesture};
}

}  // namespace detail

inline std::string rule_plan(const Instruction& ins) {
  return detail::rule_plan_text(ins.speech_text,
                                gesture_line_text(ins.gesture));
}

class RulePlanner : public CompletionBackend {
 public:
  std::string complete(const Prompt& prompt) override {
    auto [speech, gesture] =
        detail::parse_instruction_block(prompt.instruction_block);
    return detail::rule_plan_text(speech, gesture);
  }

  std::string name() const override { return "rule"; }
};

struct PlanResult {
  Prompt prompt;
  std::string digest;
  std::string completion;  // raw backend text
  PolicyProgram program;   // instruction block + completion, parsed
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

// textualize -> prompt -> complete -> parse -> validate. Parse errors
// propagate as PolicyParseError; validation failures are returned as values.
inline PlanResult plan_instruction(const PromptContext& ctx,
                                   const Instruction& ins,
                                   CompletionBackend& backend) {
  PlanResult r;
  std::string block = textualize_instruction(ins);
  r.prompt = assemble_prompt(ctx, block);
  r.digest = prompt_digest(r.prompt);
  r.completion = backend.complete(r.prompt);
  r.program = parse_policy(block + r.completion);
  r.violations = validate_policy(r.program, ctx.catalog);
  return r;
}

// True when the program calls any perception function, i.e. it cannot run
// without a detected hand.
inline bool uses_perception(const PolicyProgram& prog,
                            const PrimitiveCatalog& catalog) {
  bool found = false;
  for_each_call(prog, [&](const Call& c) {
    const FunctionSpec* spec = catalog.find(c.name);
    if (spec && spec->perception) found = true;
  });
  return found;
}

}  // namespace giraf
