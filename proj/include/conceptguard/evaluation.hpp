#pragma once

#include "conceptguard/attacks.hpp"
#include "conceptguard/intervention.hpp"
#include "conceptguard/scoring.hpp"
#include "conceptguard/synth.hpp"

#include <optional>
#include <string>
#include <vector>

namespace conceptguard {

// All percentage metrics are scaled to [0,100].

// Mean fraction of concept slots whose thresholded activation matches the
// ground truth bits.
double e_acc(const std::vector<std::vector<double>>& activations,
             const std::vector<std::vector<uint8_t>>& truths);

double p_acc(const std::vector<int>& predictions, const std::vector<int>& truth_categories);

// Mean of exp(S - W) across instances.
double lsm_mean(const FactorGraph& g, const std::vector<std::vector<double>>& activations,
                const std::vector<int>& predicted);

struct DetectionCounts {
    int clean_total = 0;
    int clean_passed = 0;
    int attacked_total = 0;
    int attacked_flagged = 0;
};

struct DetectionRates {
    std::optional<double> identification_rate; // flagged / attacked, absent without attacks
    std::optional<double> success_rate;        // passed / clean, absent without clean runs
};

DetectionRates detection_rates(const DetectionCounts& counts);

// ---- certified bounds ------------------------------------------------------

class BoundDomainError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Probability bands for the four factor characteristics: T_P = P(psi=1 |
// slot correct), T_N = P(psi=0 | slot wrong), F_P = P(psi=1 | slot wrong),
// F_N = P(psi=0 | slot correct). Point rates plus lower/upper interval ends.
struct CharacteristicBands {
    double T_P = 1.0, T_N = 1.0, F_P = 0.0, F_N = 0.0;
    double L_T_P = 1.0, U_T_P = 1.0;
    double L_T_N = 1.0, U_T_N = 1.0;
    double L_F_P = 0.0, U_F_P = 0.0;
    double L_F_N = 0.0, U_F_N = 0.0;
};

// Lower bound on the expected satisfaction advantage of the correct slot
// value, conditioned on that value c (0 or 1). At binary c only the branch
// whose multiplier is nonzero contributes, which sidesteps the endpoint
// singularity of the symbolic correction term.
double lemma2_lower_bound(const CharacteristicBands& bands, int c);

// tau = log(U_T (1 - L_F) / (L_F (1 - U_T))), the per-factor increment range.
double tau_characteristic(double U_T, double L_F);

// Product over concept slots of 1 - exp(-2 L_c^2 / sum tau_i^2), clamped to
// [0,1]. L_values holds one Lemma 2 bound per slot; taus one entry per factor.
double theorem1_bound(std::span<const double> L_values, std::span<const double> taus);

// f(N) = 1 - exp(-2 N (theta_T - theta_F)); exactly 0 at N = 0, strictly
// increasing in N when theta_T > theta_F. A negative result signals that the
// theta assumption is violated.
double theorem2_bound(int n_factors, double theta_T, double theta_F);

// ---- empirical characteristics ---------------------------------------------

struct CharSample {
    std::vector<uint8_t> truth;     // ground truth concept bits
    std::vector<double> activation; // possibly attacked
    int predicted = -1;
};

struct CharacteristicCell {
    int factor_id = 0;
    int concept_index = 0;
    long support_true = 0; // samples where the slot matches the truth
    long support_false = 0;
    std::optional<double> T_P, T_N, F_P, F_N; // absent without support
};

struct CharacteristicsReport {
    std::vector<CharacteristicCell> cells;
    // count-pooled over all cells; absent when nothing has support
    std::optional<double> theta_T; // pooled T_P
    std::optional<double> theta_F; // pooled F_P
    std::optional<double> pooled_T_N, pooled_F_N;
};

CharacteristicsReport estimate_characteristics(const FactorGraph& g,
                                               const std::vector<CharSample>& samples);

// ---- pipeline evaluation and sweeps ----------------------------------------

struct PipelineOptions {
    IdentifyOptions identify;
    RepairConfig repair;
    bool repair_enabled = true;
};

struct InstanceOutcome {
    bool flagged = false;
    double ratio = 0.0;
    double satisfaction_before = 0.0; // against the pipeline graph
    double satisfaction_after = 0.0;
    std::vector<double> rectified;
    int predicted = -1;   // prediction on the evaluated activation
    int repredicted = -1; // prediction on the rectified activation
    int applied_interventions = 0;
};

struct MetricsRow {
    int n = 0;
    int flagged = 0;
    double lsm_before = 0.0, lsm_after = 0.0;
    double e_acc_before = 0.0, e_acc_after = 0.0;
    double p_acc_before = 0.0, p_acc_after = 0.0;
    std::optional<double> identification_rate;
    std::optional<double> success_rate;
};

struct RunEvaluation {
    MetricsRow metrics;
    std::vector<InstanceOutcome> outcomes;
};

// Identify (and repair, when enabled and flagged) every instance against
// pipeline_graph; score LSM and accuracy metrics against metric_graph. The
// two differ during sweeps, where only a subset of the knowledge drives the
// pipeline but quality is still judged against all of it. attacked holds one
// activation vector per instance, or is empty for a clean run.
RunEvaluation evaluate_run(const FactorGraph& pipeline_graph, const FactorGraph& metric_graph,
                           const NearestSignaturePredictor& predictor,
                           const std::vector<Instance>& instances,
                           const std::vector<std::vector<double>>& attacked,
                           const PipelineOptions& opts, int workers = 0);

enum class FamilyFilter { All, CategoryConcept, ConceptConcept, None };

std::string family_filter_name(FamilyFilter f);

struct SweepConfig {
    std::vector<double> ratios{0.25, 0.5, 0.75, 1.0};
    std::vector<FamilyFilter> families{FamilyFilter::All, FamilyFilter::CategoryConcept,
                                       FamilyFilter::ConceptConcept, FamilyFilter::None};
    int repeats = 5;
    uint64_t seed = 0;
};

struct SweepRow {
    FamilyFilter family = FamilyFilter::All;
    double ratio = 1.0;
    int repeat = 0;
    int factors_used = 0;
    MetricsRow metrics;
};

// For each (family, ratio, repeat): keep the family's rules, draw a seeded
// random subset of ceil(ratio * family size), rebuild the pipeline graph and
// evaluate against the full graph's metrics. family None yields the empty
// graph regardless of ratio.
std::vector<SweepRow> sweep_and_ablation(const RuleSet& rules, const RuleSchema& schema,
                                         std::span<const double> weights,
                                         const NearestSignaturePredictor& predictor,
                                         const std::vector<Instance>& instances,
                                         const std::vector<std::vector<double>>& attacked,
                                         const PipelineOptions& opts, const SweepConfig& cfg,
                                         int workers = 0);

} // namespace conceptguard
