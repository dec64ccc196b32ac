#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "giraf/dialog.hpp"
#include "giraf/rng.hpp"

using namespace giraf;

namespace {

Instruction pick_cup() {
  Instruction ins;
  ins.speech_text = "pick up the cup";
  return ins;
}

// One full successful pass up to AwaitingYesNo.
void drive_to_confirmation(DialogMachine& m) {
  m.step(event::InstructionReceived{pick_cup()});
  m.step(event::ConfirmationDone{});
  m.step(event::PlanReady{Vec3{0.1, 0.2, 0.9}});
  m.step(event::IndicationDone{});
}

}  // namespace

TEST_CASE("happy path emits repeat, indication and execution in order",
          "[dialog]") {
  DialogMachine m;
  CHECK(m.phase() == DialogPhase::Idle);
  CHECK(m.trial() == 1);

  DialogEffect repeat = m.step(event::InstructionReceived{pick_cup()});
  CHECK(m.phase() == DialogPhase::Confirming);
  CHECK(repeat.type == DialogEffect::Type::Utter);
  CHECK(repeat.utterance == "pick up the cup");  // verbatim repeat

  CHECK(m.step(event::ConfirmationDone{}).type == DialogEffect::Type::None);
  CHECK(m.phase() == DialogPhase::Planning);

  Vec3 target{0.1, 0.2, 0.9};
  DialogEffect point = m.step(event::PlanReady{target});
  CHECK(m.phase() == DialogPhase::Indicating);
  CHECK(point.type == DialogEffect::Type::MoveAndPoint);
  CHECK(point.target == target);

  DialogEffect ask = m.step(event::IndicationDone{});
  CHECK(m.phase() == DialogPhase::AwaitingYesNo);
  CHECK(ask.type == DialogEffect::Type::Utter);

  DialogEffect go = m.step(event::UserYes{});
  CHECK(m.phase() == DialogPhase::Executing);
  CHECK(go.type == DialogEffect::Type::BeginExecution);

  m.step(event::ExecutionFinished{true});
  CHECK(m.phase() == DialogPhase::Done);
  CHECK(m.success());
  CHECK(m.trial() == 1);
}

TEST_CASE("a 'no' aborts with an apology and no execution", "[dialog]") {
  DialogMachine m;
  drive_to_confirmation(m);
  DialogEffect apology = m.step(event::UserNo{});
  CHECK(m.phase() == DialogPhase::Aborted);
  CHECK(apology.type == DialogEffect::Type::Utter);
  CHECK(apology.utterance.find("sorry") != std::string::npos);
}

TEST_CASE("plan failure reports the reason", "[dialog]") {
  DialogMachine m;
  m.step(event::InstructionReceived{pick_cup()});
  m.step(event::ConfirmationDone{});
  DialogEffect report = m.step(event::PlanFailed{"line 3, col 9: bad token"});
  CHECK(m.phase() == DialogPhase::Errored);
  CHECK(report.type == DialogEffect::Type::Utter);
  CHECK(report.utterance.find("line 3, col 9") != std::string::npos);
}

TEST_CASE("trial counter caps at three attempts", "[dialog]") {
  DialogMachine m;

  drive_to_confirmation(m);
  m.step(event::UserNo{});
  CHECK(m.trial() == 1);
  m.step(event::Reset{});
  CHECK(m.phase() == DialogPhase::Idle);
  CHECK(m.trial() == 2);

  drive_to_confirmation(m);
  m.step(event::UserNo{});
  m.step(event::Reset{});
  CHECK(m.trial() == 3);

  drive_to_confirmation(m);
  m.step(event::UserNo{});
  DialogEffect give_up = m.step(event::Reset{});
  CHECK(m.phase() == DialogPhase::Done);
  CHECK_FALSE(m.success());
  CHECK(give_up.type == DialogEffect::Type::Utter);
  CHECK(m.trial() == 3);
}

TEST_CASE("illegal transitions throw and leave the machine unchanged",
          "[dialog]") {
  DialogMachine m;
  CHECK_THROWS_AS(m.step(event::UserYes{}), IllegalTransitionError);
  CHECK_THROWS_AS(m.step(event::ExecutionFinished{true}),
                  IllegalTransitionError);
  CHECK_THROWS_AS(m.step(event::Reset{}), IllegalTransitionError);
  CHECK(m.phase() == DialogPhase::Idle);

  m.step(event::InstructionReceived{pick_cup()});
  CHECK_THROWS_AS(m.step(event::InstructionReceived{pick_cup()}),
                  IllegalTransitionError);
  CHECK_THROWS_AS(m.step(event::PlanReady{Vec3{}}), IllegalTransitionError);
  CHECK(m.phase() == DialogPhase::Confirming);

  m.step(event::ConfirmationDone{});
  m.step(event::PlanReady{Vec3{}});
  CHECK_THROWS_AS(m.step(event::UserYes{}), IllegalTransitionError);
  CHECK(m.phase() == DialogPhase::Indicating);

  // Done is terminal.
  m.step(event::IndicationDone{});
  m.step(event::UserYes{});
  m.step(event::ExecutionFinished{true});
  CHECK_THROWS_AS(m.step(event::InstructionReceived{pick_cup()}),
                  IllegalTransitionError);
  CHECK(m.phase() == DialogPhase::Done);
}

TEST_CASE("random event walks never execute before a confirmed yes",
          "[dialog][property]") {
  auto rng = make_rng(20260823);
  for (int walk = 0; walk < 300; ++walk) {
    DialogMachine m;
    bool confirmed_this_attempt = false;
    bool awaiting_seen = false;
    for (int step = 0; step < 60 && m.phase() != DialogPhase::Done; ++step) {
      DialogPhase before = m.phase();
      int pick = static_cast<int>(rng() % 9);
      DialogEvent ev;
      switch (pick) {
        case 0: ev = event::InstructionReceived{pick_cup()}; break;
        case 1: ev = event::ConfirmationDone{}; break;
        case 2: ev = event::PlanReady{Vec3{0, 0, 1}}; break;
        case 3: ev = event::PlanFailed{"synthetic failure"}; break;
        case 4: ev = event::IndicationDone{}; break;
        case 5: ev = event::UserYes{}; break;
        case 6: ev = event::UserNo{}; break;
        case 7: ev = event::ExecutionFinished{true}; break;
        default: ev = event::Reset{}; break;
      }
      DialogEffect eff;
      try {
        eff = m.step(ev);
      } catch (const IllegalTransitionError&) {
        CHECK(m.phase() == before);  // strong guarantee
        continue;
      }
      if (m.phase() == DialogPhase::Confirming) confirmed_this_attempt = true;
      if (m.phase() == DialogPhase::AwaitingYesNo) awaiting_seen = true;
      if (m.phase() == DialogPhase::Idle) {
        confirmed_this_attempt = false;  // Reset starts a fresh attempt
        awaiting_seen = false;
      }
      if (eff.type == DialogEffect::Type::BeginExecution) {
        // Execution can only start from an awaited yes in a confirmed attempt.
        CHECK(before == DialogPhase::AwaitingYesNo);
        CHECK(m.phase() == DialogPhase::Executing);
        CHECK(confirmed_this_attempt);
        CHECK(awaiting_seen);
      }
      CHECK(m.trial() >= 1);
      CHECK(m.trial() <= m.max_trials());
    }
  }
}
