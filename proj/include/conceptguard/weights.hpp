#pragma once

#include "conceptguard/factor_graph.hpp"

#include <span>
#include <vector>

namespace conceptguard {

enum class WeightMode { Prior, Mle };

struct WeightConfig {
    WeightMode mode = WeightMode::Prior;
    double learning_rate = 0.05;
    int epochs = 200;
    double clamp_lo = 0.01;
    double clamp_hi = 1.0;
    double init = 0.5;
};

// Rule confidences taken verbatim as weights; a rule without a confidence is
// an error in this mode.
std::vector<double> prior_weights(const RuleSet& rules);

struct NllGrad {
    double nll = 0.0;
    std::vector<double> grad; // d nll / d w_i
};

// Negative log likelihood of the observed assignments under the conditional
// model, plus its exact gradient: for each factor, the model expectation of
// the potential given the sample's category minus the observed potential,
// summed over samples. Per-category enumerations are cached within the call.
// The graph supplies structure only; weights come from w.
NllGrad nll_and_gradient(const FactorGraph& g, const std::vector<Assignment>& data,
                         std::span<const double> w);

struct FitResult {
    std::vector<double> weights;
    double nll = 0.0;   // at the returned weights
    int epochs_run = 0;
};

// Fixed-step projected gradient descent from cfg.init, weights clamped to
// [clamp_lo, clamp_hi] after every step. Returns the best iterate seen.
FitResult mle_fit(const FactorGraph& g, const std::vector<Assignment>& data,
                  const WeightConfig& cfg = {});

} // namespace conceptguard
