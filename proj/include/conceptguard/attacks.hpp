#pragma once

#include "conceptguard/synth.hpp"

#include <optional>

namespace conceptguard {

enum class AttackKind { Erasure, Introduction, Confounding };

struct AttackSpec {
    AttackKind kind = AttackKind::Confounding;
    int budget = 1;       // max concepts altered
    double gamma = 0.5;   // attack band center; altered values land at gamma -/+ 0.1
    uint64_t seed = 0;
    // optional target restrictions; erasure draws from erase_targets,
    // introduction from introduce_targets, confounding from both
    std::optional<std::vector<int>> erase_targets;
    std::optional<std::vector<int>> introduce_targets;
};

struct AttackResult {
    std::vector<double> activation; // perturbed copy
    int achieved = 0;               // concepts actually altered
    std::vector<int> altered;       // indices in application order
    int rolled_back = 0;            // flips undone to keep the prediction fixed
};

// Perturbs concept activations while keeping the category prediction fixed:
// candidate flips (active slots for erasure, inactive for introduction, both
// for confounding) are tried in order of least margin damage; any flip that
// would change the prediction is rolled back. Erased slots are set to
// clamp(gamma - 0.1), introduced ones to clamp(gamma + 0.1).
AttackResult attack(const Instance& inst, const AttackSpec& spec,
                    const NearestSignaturePredictor& predictor);

struct AttackCheck {
    int crossings = 0;           // concepts whose thresholded value changed
    bool within_budget = false;
    bool directions_ok = false;  // erased slots went down, introduced went up
    bool prediction_unchanged = false;
    bool success = false;
};

AttackCheck attack_success_check(const Instance& inst, std::span<const double> attacked,
                                 const AttackSpec& spec,
                                 const NearestSignaturePredictor& predictor);

} // namespace conceptguard
