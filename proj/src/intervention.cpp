#include "conceptguard/intervention.hpp"

#include "conceptguard/scoring.hpp"

#include <algorithm>

namespace conceptguard {

namespace {

void apply_flips(Assignment& a, const std::vector<int>& flips) {
    for (int j : flips)
        a.concepts[static_cast<size_t>(j)] ^= 1u;
}

} // namespace

std::vector<InterventionCase> enumerate_cases(const FactorGraph& g, int factor_id) {
    const Factor& f = g.factor(factor_id);
    const std::vector<int>& cv = f.concept_vars;
    std::vector<InterventionCase> cases;
    if (cv.empty())
        return cases;
    uint32_t total = 1u << cv.size();
    cases.reserve(total - 1);
    for (uint32_t mask = 1; mask < total; ++mask) {
        InterventionCase c;
        c.factor_id = factor_id;
        for (size_t i = 0; i < cv.size(); ++i) {
            if ((mask >> i) & 1u)
                c.flip_concepts.push_back(cv[i]);
        }
        cases.push_back(std::move(c));
    }
    return cases;
}

double potential_difference(const FactorGraph& g, const Assignment& a,
                            const InterventionCase& c) {
    const std::vector<int>& scope = g.neighbor_factors(c.factor_id);
    double before = 0.0;
    for (int fid : scope) {
        if (g.evaluate_potential(fid, a))
            before += g.factor(fid).weight;
    }
    Assignment flipped = a;
    apply_flips(flipped, c.flip_concepts);
    double after = 0.0;
    for (int fid : scope) {
        if (g.evaluate_potential(fid, flipped))
            after += g.factor(fid).weight;
    }
    return after - before;
}

InterventionPlan repair(const FactorGraph& g, std::span<const double> activation,
                        int predicted_category, const RepairConfig& cfg) {
    if (cfg.max_passes < 1)
        throw std::invalid_argument("repair needs max_passes >= 1");
    Assignment working = binarize(activation, predicted_category, g.schema());
    InterventionPlan plan;
    plan.satisfaction_before = satisfaction_weight(g, working);
    size_t m = working.concepts.size();
    plan.mask.assign(m, 0);
    plan.z.assign(m, 0);

    std::vector<uint8_t> intervened(m, 0);
    for (int pass = 0; pass < cfg.max_passes; ++pass) {
        // Slots are locked for the rest of the pass once flipped, but a later
        // pass may revise them: a pass-one flip bundled with a locally good
        // case can turn out wrong once its neighborhood is repaired, and the
        // factor demanding the old value back must be allowed to re-propose.
        // Strictly positive recomputed gains keep this loop-free.
        std::vector<uint8_t> touched(m, 0);
        // each violated factor proposes its best flip set
        std::vector<InterventionCase> proposals;
        for (const Factor& f : g.factors()) {
            if (g.evaluate_potential(f.id, working))
                continue;
            if (f.concept_vars.empty())
                continue;
            std::vector<InterventionCase> cases = enumerate_cases(g, f.id);
            plan.stats.cases_enumerated += static_cast<long>(cases.size());
            const InterventionCase* best = nullptr;
            double bestGain = 0.0;
            for (InterventionCase& c : cases) {
                c.gain = potential_difference(g, working, c);
                if (!best || c.gain > bestGain) {
                    best = &c;
                    bestGain = c.gain;
                }
            }
            if (best && bestGain > 0.0)
                proposals.push_back(*best);
        }
        plan.stats.candidates_considered += static_cast<int>(proposals.size());
        std::stable_sort(proposals.begin(), proposals.end(),
                         [](const InterventionCase& a, const InterventionCase& b) {
                             if (a.gain != b.gain)
                                 return a.gain > b.gain;
                             return a.factor_id < b.factor_id;
                         });

        bool appliedAny = false;
        for (InterventionCase& c : proposals) {
            bool overlap = std::any_of(c.flip_concepts.begin(), c.flip_concepts.end(),
                                       [&](int j) { return touched[static_cast<size_t>(j)]; });
            if (overlap)
                continue;
            double gain = potential_difference(g, working, c);
            if (gain <= 0.0)
                continue; // stale after earlier applications this pass
            apply_flips(working, c.flip_concepts);
            for (int j : c.flip_concepts) {
                touched[static_cast<size_t>(j)] = 1;
                intervened[static_cast<size_t>(j)] = 1;
            }
            c.gain = gain;
            plan.applied.push_back(c);
            appliedAny = true;
        }
        ++plan.stats.passes;
        if (!appliedAny)
            break;
    }

    plan.satisfaction_after = satisfaction_weight(g, working);
    plan.rectified.assign(activation.begin(), activation.end());
    for (size_t j = 0; j < m; ++j) {
        if (intervened[j]) {
            plan.mask[j] = 1;
            plan.z[j] = working.concepts[j];
            plan.rectified[j] = working.concepts[j] ? 1.0 : 0.0;
        }
    }
    return plan;
}

} // namespace conceptguard
