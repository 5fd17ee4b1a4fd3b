#pragma once

#include "conceptguard/factor_graph.hpp"

#include <vector>

namespace conceptguard {

// One candidate intervention: flip the listed concept slots and accept the
// resulting change in weighted satisfaction. Category slots are never
// intervened on.
struct InterventionCase {
    int factor_id = 0;
    std::vector<int> flip_concepts; // sorted concept indices, nonempty
    double gain = 0.0;              // weighted potential difference when applied
};

struct RepairConfig {
    int max_passes = 3;
};

struct RepairStats {
    long cases_enumerated = 0;
    int passes = 0;
    int candidates_considered = 0;
};

struct InterventionPlan {
    std::vector<InterventionCase> applied; // in application order, gain recomputed
    std::vector<uint8_t> mask;             // 1 where a concept was intervened on
    std::vector<uint8_t> z;                // replacement bit for intervened slots
    std::vector<double> rectified;         // z where masked, original activation elsewhere
    double satisfaction_before = 0.0;
    double satisfaction_after = 0.0;
    RepairStats stats;
};

// All nonempty flip subsets of the factor's concept variables, in mask order
// (2^p - 1 cases for p concept neighbors). Gains are left at 0.
std::vector<InterventionCase> enumerate_cases(const FactorGraph& g, int factor_id);

// Weighted potential difference of applying the case to the assignment,
// summed over the factors sharing a variable with the case's factor (other
// factors cannot change, because every flipped slot neighbors that factor).
double potential_difference(const FactorGraph& g, const Assignment& a,
                            const InterventionCase& c);

// Greedy interactive switch: per pass, every violated factor proposes its
// best-gain flip set; proposals are applied in gain order (ties to the lower
// factor id), skipping any that touch a slot already flipped this pass or
// whose recomputed gain is no longer positive. Later passes may revise
// earlier interventions, which cannot loop because every applied flip must
// strictly raise the satisfaction. Stops when a pass applies nothing or
// after max_passes.
InterventionPlan repair(const FactorGraph& g, std::span<const double> activation,
                        int predicted_category, const RepairConfig& cfg = {});

} // namespace conceptguard
