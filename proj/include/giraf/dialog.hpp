#pragma once

#include <string>
#include <variant>

#include "giraf/error.hpp"
#include "giraf/geometry.hpp"
#include "giraf/planner.hpp"

namespace giraf {

enum class DialogPhase {
  Idle,
  Confirming,
  Planning,
  Indicating,
  AwaitingYesNo,
  Executing,
  Done,
  Aborted,
  Errored,
};

inline const char* dialog_phase_name(DialogPhase p) {
  switch (p) {
    case DialogPhase::Idle: return "Idle";
    case DialogPhase::Confirming: return "Confirming";
    case DialogPhase::Planning: return "Planning";
    case DialogPhase::Indicating: return "Indicating";
    case DialogPhase::AwaitingYesNo: return "AwaitingYesNo";
    case DialogPhase::Executing: return "Executing";
    case DialogPhase::Done: return "Done";
    case DialogPhase::Aborted: return "Aborted";
    case DialogPhase::Errored: return "Errored";
  }
  return "Idle";
}

namespace event {

struct InstructionReceived {
  Instruction instruction;
};
struct ConfirmationDone {};
struct PlanReady {
  Vec3 target;
};
struct PlanFailed {
  std::string reason;
};
struct IndicationDone {};
struct UserYes {};
struct UserNo {};
struct ExecutionFinished {
  bool success = false;
};
struct Reset {};

}  // namespace event

using DialogEvent =
    std::variant<event::InstructionReceived, event::ConfirmationDone,
                 event::PlanReady, event::PlanFailed, event::IndicationDone,
                 event::UserYes, event::UserNo, event::ExecutionFinished,
                 event::Reset>;

// What the machine asks the embodiment to do in response to an event. The
// world may only be touched after a BeginExecution effect.
struct DialogEffect {
  enum class Type { None, Utter, MoveAndPoint, BeginExecution };
  Type type = Type::None;
  std::string utterance;
  Vec3 target{};

  static DialogEffect none() { return {}; }
  static DialogEffect utter(std::string text) {
    return {Type::Utter, std::move(text), {}};
  }
  static DialogEffect move_and_point(const Vec3& target) {
    return {Type::MoveAndPoint, {}, target};
  }
  static DialogEffect begin_execution() {
    return {Type::BeginExecution, {}, {}};
  }
};

// Confirmation protocol: repeat the instruction, plan, indicate the resolved
// target with the gripper, wait for yes/no, then execute. Abort apologizes,
// plan failures report, and three failed attempts end the session.
class DialogMachine {
 public:
  explicit DialogMachine(int max_trials = 3) : max_trials_(max_trials) {}

  DialogPhase phase() const { return phase_; }
  int trial() const { return trial_; }
  int max_trials() const { return max_trials_; }
  bool success() const { return success_; }

  DialogEffect step(const DialogEvent& e) {
    return std::visit([this](const auto& ev) { return handle(ev); }, e);
  }

 private:
  DialogEffect handle(const event::InstructionReceived& ev) {
    require(phase_ == DialogPhase::Idle, "InstructionReceived");
    phase_ = DialogPhase::Confirming;
    return DialogEffect::utter(ev.instruction.speech_text);
  }

  DialogEffect handle(const event::ConfirmationDone&) {
    require(phase_ == DialogPhase::Confirming, "ConfirmationDone");
    phase_ = DialogPhase::Planning;
    return DialogEffect::none();
  }

  DialogEffect handle(const event::PlanReady& ev) {
    require(phase_ == DialogPhase::Planning, "PlanReady");
    phase_ = DialogPhase::Indicating;
    return DialogEffect::move_and_point(ev.target);
  }

  DialogEffect handle(const event::PlanFailed& ev) {
    require(phase_ == DialogPhase::Planning, "PlanFailed");
    phase_ = DialogPhase::Errored;
    return DialogEffect::utter("I could not produce a plan: " + ev.reason);
  }

  DialogEffect handle(const event::IndicationDone&) {
    require(phase_ == DialogPhase::Indicating, "IndicationDone");
    phase_ = DialogPhase::AwaitingYesNo;
    return DialogEffect::utter("is this what you meant?");
  }

  DialogEffect handle(const event::UserYes&) {
    require(phase_ == DialogPhase::AwaitingYesNo, "UserYes");
    phase_ = DialogPhase::Executing;
    return DialogEffect::begin_execution();
  }

  DialogEffect handle(const event::UserNo&) {
    require(phase_ == DialogPhase::AwaitingYesNo, "UserNo");
    phase_ = DialogPhase::Aborted;
    return DialogEffect::utter("sorry, I will abort");
  }

  DialogEffect handle(const event::ExecutionFinished& ev) {
    require(phase_ == DialogPhase::Executing, "ExecutionFinished");
    phase_ = DialogPhase::Done;
    success_ = ev.success;
    return DialogEffect::none();
  }

  DialogEffect handle(const event::Reset&) {
    require(phase_ == DialogPhase::Aborted || phase_ == DialogPhase::Errored,
            "Reset");
    if (trial_ >= max_trials_) {
      phase_ = DialogPhase::Done;
      success_ = false;
      return DialogEffect::utter("I give up after " +
                                 std::to_string(max_trials_) + " attempts");
    }
    ++trial_;
    phase_ = DialogPhase::Idle;
    return DialogEffect::none();
  }

  void require(bool ok, const char* ev_name) {
    if (!ok)
      throw IllegalTransitionError(std::string(ev_name) +
                                   " is not legal in state " +
                                   dialog_phase_name(phase_));
  }

  DialogPhase phase_ = DialogPhase::Idle;
  int trial_ = 1;
  int max_trials_ = 3;
  bool success_ = false;
};

}  // namespace giraf
