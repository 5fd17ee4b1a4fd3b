#pragma once

#include "conceptguard/factor_graph.hpp"

#include <stdexcept>

namespace conceptguard {

// Exact enumeration walks all 2^M concept assignments; beyond this many
// concepts the walk is refused rather than silently approximated.
inline constexpr int kEnumerationCap = 20;

class EnumerationCapExceeded : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// How the best reachable satisfaction score is obtained. AllSatisfied uses
// the total weight (every potential 1), Exact enumerates concept assignments
// under the fixed category.
enum class MaxMode { AllSatisfied, Exact };

enum class Verdict { Comprehensible, LogicError };

// S = sum of w_i * psi_i under the assignment.
double satisfaction_weight(const FactorGraph& g, const Assignment& a);

// log of sum over all 2^M concept assignments of exp(S), category fixed.
double log_partition(const FactorGraph& g, int category);

// exp(S) / partition, computed in log space. Requires M <= kEnumerationCap.
double conditional_probability(const FactorGraph& g, const Assignment& a);

double max_satisfaction(const FactorGraph& g, int category, MaxMode mode);

// Satisfaction relative to an all-satisfying reference: exp(S - W), where W
// is the total factor weight. Equals 1 exactly when every rule holds.
double instance_lsm(const FactorGraph& g, const Assignment& a);

struct IdentifyOptions {
    double delta = 0.9; // flag when exp(S) < delta * exp(S_max)
    MaxMode max_mode = MaxMode::AllSatisfied;
};

struct IdentifyReport {
    Verdict verdict = Verdict::Comprehensible;
    double satisfaction = 0.0;
    double max_satisfaction = 0.0;
    double ratio = 0.0; // exp(S - S_max)
    double lsm = 0.0;
};

// Flags assignments whose probability falls below delta times the best
// reachable probability; the shared partition cancels, so only the
// satisfaction gap matters. The comparison is >= so that a fully satisfying
// assignment passes at every delta in [0,1].
IdentifyReport identify(const FactorGraph& g, const Assignment& a,
                        const IdentifyOptions& opts = {});

} // namespace conceptguard
