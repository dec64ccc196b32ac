#pragma once

// Shared program-text fixtures used across the policy, planner and sim tests.

namespace fixtures {

inline const char* kWaterJugListing =
    "# Instruction 0: pick up the water jug\n"
    "# Gesture: index finger extends out while others curl inward\n"
    "water_jug_pos = detect_referred_obj_pos('water jug')\n"
    "pick_up_obj_at_pos(water_jug_pos)\n"
    "\n"
    "# Instruction 1: hand it to me\n"
    "# Gesture: an open palm faces upward\n"
    "target_pos = detect_hand_center_pos()\n"
    "move_gripper_to_pos(target_pos)\n"
    "open_gripper()\n";

inline const char* kFistListing =
    "# Instruction 0: move over here\n"
    "# Gesture: fist\n"
    "target_pos = detect_hand_center_pos()\n"
    "move_gripper_to_pos(target_pos)\n";

}  // namespace fixtures
