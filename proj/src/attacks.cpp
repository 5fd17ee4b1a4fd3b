#include "conceptguard/attacks.hpp"

#include "conceptguard/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conceptguard {

namespace {

std::vector<uint8_t> threshold(std::span<const double> activation) {
    std::vector<uint8_t> bits(activation.size());
    for (size_t j = 0; j < activation.size(); ++j)
        bits[j] = activation[j] > 0.5 ? 1 : 0;
    return bits;
}

bool allowed(int j, const std::optional<std::vector<int>>& targets) {
    if (!targets)
        return true;
    return std::find(targets->begin(), targets->end(), j) != targets->end();
}

} // namespace

AttackResult attack(const Instance& inst, const AttackSpec& spec,
                    const NearestSignaturePredictor& predictor) {
    if (spec.budget < 0)
        throw std::invalid_argument("attack budget must be >= 0");
    if (!(spec.gamma > 0.0) || !(spec.gamma < 1.0))
        throw std::invalid_argument("gamma must sit in (0,1)");

    AttackResult res;
    res.activation.assign(inst.activation.begin(), inst.activation.end());
    std::vector<uint8_t> bits = threshold(res.activation);
    int original = predictor.predict(bits);

    // candidate flips allowed by the attack kind and target lists
    std::vector<int> candidates;
    for (size_t j = 0; j < bits.size(); ++j) {
        int idx = static_cast<int>(j);
        if (bits[j]) {
            if ((spec.kind == AttackKind::Erasure || spec.kind == AttackKind::Confounding) &&
                allowed(idx, spec.erase_targets))
                candidates.push_back(idx);
        } else {
            if ((spec.kind == AttackKind::Introduction || spec.kind == AttackKind::Confounding) &&
                allowed(idx, spec.introduce_targets))
                candidates.push_back(idx);
        }
    }

    // least margin damage first; the seeded shuffle breaks ties randomly but
    // reproducibly, stable_sort keeps that order within equal margins
    Rng rng(derive_seed(spec.seed, 0xa77c));
    rng.shuffle(candidates);
    std::vector<int> postMargin(bits.size(), 0);
    for (int j : candidates) {
        bits[static_cast<size_t>(j)] ^= 1u;
        postMargin[static_cast<size_t>(j)] = predictor.margin(bits);
        bits[static_cast<size_t>(j)] ^= 1u;
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        return postMargin[static_cast<size_t>(a)] > postMargin[static_cast<size_t>(b)];
    });

    double lowValue = std::max(0.0, spec.gamma - 0.1);
    double highValue = std::min(1.0, spec.gamma + 0.1);
    for (int j : candidates) {
        if (res.achieved >= spec.budget)
            break;
        size_t sj = static_cast<size_t>(j);
        bits[sj] ^= 1u;
        if (predictor.predict(bits) != original) {
            bits[sj] ^= 1u; // prediction must stay fixed
            ++res.rolled_back;
            continue;
        }
        res.activation[sj] = bits[sj] ? highValue : lowValue;
        res.altered.push_back(j);
        ++res.achieved;
    }
    return res;
}

AttackCheck attack_success_check(const Instance& inst, std::span<const double> attacked,
                                 const AttackSpec& spec,
                                 const NearestSignaturePredictor& predictor) {
    if (attacked.size() != inst.activation.size())
        throw std::invalid_argument("activation length mismatch");
    AttackCheck check;
    std::vector<uint8_t> before = threshold(inst.activation);
    std::vector<uint8_t> after = threshold(attacked);
    check.directions_ok = true;
    for (size_t j = 0; j < before.size(); ++j) {
        if (before[j] != after[j])
            ++check.crossings;
        if (attacked[j] != inst.activation[j]) {
            bool loweredActive = before[j] && attacked[j] < inst.activation[j];
            bool raisedInactive = !before[j] && attacked[j] > inst.activation[j];
            if (!loweredActive && !raisedInactive)
                check.directions_ok = false;
        }
    }
    check.within_budget = check.crossings <= spec.budget;
    check.prediction_unchanged = predictor.predict(after) == predictor.predict(before);
    check.success = check.within_budget && check.directions_ok && check.prediction_unchanged;
    return check;
}

} // namespace conceptguard
