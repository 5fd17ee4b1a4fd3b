#include "conceptguard/evaluation.hpp"

#include "conceptguard/parallel.hpp"
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

// log argument guard shared by the bound calculators; name identifies the
// offending characteristic in the error
double checked_log_ratio(double num, double den, const std::string& name) {
    if (!(num > 0.0))
        throw BoundDomainError("log argument vanished: numerator of " + name);
    if (!(den > 0.0))
        throw BoundDomainError("log argument vanished: denominator of " + name);
    return std::log(num / den);
}

} // namespace

double e_acc(const std::vector<std::vector<double>>& activations,
             const std::vector<std::vector<uint8_t>>& truths) {
    if (activations.size() != truths.size())
        throw std::invalid_argument("activation/truth count mismatch");
    if (activations.empty())
        throw std::invalid_argument("empty dataset");
    double acc = 0.0;
    for (size_t i = 0; i < activations.size(); ++i) {
        if (activations[i].size() != truths[i].size())
            throw std::invalid_argument("activation/truth length mismatch");
        int match = 0;
        for (size_t j = 0; j < activations[i].size(); ++j) {
            uint8_t bit = activations[i][j] > 0.5 ? 1 : 0;
            match += bit == truths[i][j];
        }
        acc += static_cast<double>(match) / static_cast<double>(activations[i].size());
    }
    return 100.0 * acc / static_cast<double>(activations.size());
}

double p_acc(const std::vector<int>& predictions, const std::vector<int>& truth_categories) {
    if (predictions.size() != truth_categories.size())
        throw std::invalid_argument("prediction/truth count mismatch");
    if (predictions.empty())
        throw std::invalid_argument("empty dataset");
    int hits = 0;
    for (size_t i = 0; i < predictions.size(); ++i)
        hits += predictions[i] == truth_categories[i];
    return 100.0 * static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double lsm_mean(const FactorGraph& g, const std::vector<std::vector<double>>& activations,
                const std::vector<int>& predicted) {
    if (activations.size() != predicted.size())
        throw std::invalid_argument("activation/prediction count mismatch");
    if (activations.empty())
        throw std::invalid_argument("empty dataset");
    double acc = 0.0;
    for (size_t i = 0; i < activations.size(); ++i)
        acc += instance_lsm(g, binarize(activations[i], predicted[i], g.schema()));
    return 100.0 * acc / static_cast<double>(activations.size());
}

DetectionRates detection_rates(const DetectionCounts& counts) {
    DetectionRates rates;
    if (counts.attacked_total > 0)
        rates.identification_rate = 100.0 * counts.attacked_flagged / counts.attacked_total;
    if (counts.clean_total > 0)
        rates.success_rate = 100.0 * counts.clean_passed / counts.clean_total;
    return rates;
}

double lemma2_lower_bound(const CharacteristicBands& b, int c) {
    if (c != 0 && c != 1)
        throw std::invalid_argument("conditioning value must be 0 or 1");
    double bound = 0.0;
    if (c == 1) {
        bound += b.T_P * checked_log_ratio(b.L_T_P, 1.0 - b.U_F_P, "L_T_P / (1-U_F_P)");
        bound += (1.0 - b.T_P) *
                 checked_log_ratio(1.0 - b.U_T_P, 1.0 - b.L_F_P, "(1-U_T_P) / (1-L_F_P)");
        bound -= b.F_N * checked_log_ratio(b.U_T_N, b.L_F_N, "U_T_N / L_F_N");
        bound += (1.0 - b.F_N) *
                 checked_log_ratio(1.0 - b.L_T_N, 1.0 - b.U_F_N, "(1-L_T_N) / (1-U_F_N)");
    } else {
        bound += b.T_N * checked_log_ratio(b.L_T_N, b.U_F_N, "L_T_N / U_F_N");
        bound += (1.0 - b.T_N) *
                 checked_log_ratio(1.0 - b.U_T_N, 1.0 - b.L_F_N, "(1-U_T_N) / (1-L_F_N)");
        bound -= b.F_P * checked_log_ratio(b.U_T_P, b.L_F_P, "U_T_P / L_F_P");
        bound += (1.0 - b.F_P) *
                 checked_log_ratio(1.0 - b.L_T_P, 1.0 - b.U_F_P, "(1-L_T_P) / (1-U_F_P)");
    }
    if (!std::isfinite(bound))
        throw BoundDomainError("non-finite bound value");
    return bound;
}

double tau_characteristic(double U_T, double L_F) {
    double tau = checked_log_ratio(U_T * (1.0 - L_F), L_F * (1.0 - U_T),
                                   "U_T(1-L_F) / (L_F(1-U_T))");
    if (!std::isfinite(tau))
        throw BoundDomainError("non-finite tau");
    return tau;
}

double theorem1_bound(std::span<const double> L_values, std::span<const double> taus) {
    if (taus.empty())
        throw std::invalid_argument("tau list must not be empty");
    double sumSq = 0.0;
    for (double t : taus) {
        if (!std::isfinite(t))
            throw BoundDomainError("non-finite tau");
        sumSq += t * t;
    }
    if (!(sumSq > 0.0))
        throw BoundDomainError("tau squared sum vanished");
    double product = 1.0;
    for (double L : L_values) {
        if (!std::isfinite(L))
            throw BoundDomainError("non-finite Lemma 2 bound");
        product *= 1.0 - std::exp(-2.0 * L * L / sumSq);
    }
    return std::clamp(product, 0.0, 1.0);
}

double theorem2_bound(int n_factors, double theta_T, double theta_F) {
    if (n_factors < 0)
        throw std::invalid_argument("factor count must be >= 0");
    if (!std::isfinite(theta_T) || !std::isfinite(theta_F))
        throw BoundDomainError("non-finite theta");
    return 1.0 - std::exp(-2.0 * static_cast<double>(n_factors) * (theta_T - theta_F));
}

CharacteristicsReport estimate_characteristics(const FactorGraph& g,
                                               const std::vector<CharSample>& samples) {
    CharacteristicsReport report;
    long totTrue = 0, totFalse = 0, totSatTrue = 0, totSatFalse = 0;
    for (const Factor& f : g.factors()) {
        for (int cv : f.concept_vars) {
            CharacteristicCell cell;
            cell.factor_id = f.id;
            cell.concept_index = cv;
            long satTrue = 0, satFalse = 0;
            for (const CharSample& s : samples) {
                Assignment a = binarize(s.activation, s.predicted, g.schema());
                bool sat = g.evaluate_potential(f.id, a);
                bool correct = a.concepts[static_cast<size_t>(cv)] ==
                               s.truth[static_cast<size_t>(cv)];
                if (correct) {
                    ++cell.support_true;
                    satTrue += sat;
                } else {
                    ++cell.support_false;
                    satFalse += sat;
                }
            }
            if (cell.support_true > 0) {
                cell.T_P = static_cast<double>(satTrue) / cell.support_true;
                cell.F_N = 1.0 - *cell.T_P;
            }
            if (cell.support_false > 0) {
                cell.F_P = static_cast<double>(satFalse) / cell.support_false;
                cell.T_N = 1.0 - *cell.F_P;
            }
            totTrue += cell.support_true;
            totFalse += cell.support_false;
            totSatTrue += satTrue;
            totSatFalse += satFalse;
            report.cells.push_back(std::move(cell));
        }
    }
    if (totTrue > 0) {
        report.theta_T = static_cast<double>(totSatTrue) / totTrue;
        report.pooled_F_N = 1.0 - *report.theta_T;
    }
    if (totFalse > 0) {
        report.theta_F = static_cast<double>(totSatFalse) / totFalse;
        report.pooled_T_N = 1.0 - *report.theta_F;
    }
    return report;
}

RunEvaluation evaluate_run(const FactorGraph& pipeline_graph, const FactorGraph& metric_graph,
                           const NearestSignaturePredictor& predictor,
                           const std::vector<Instance>& instances,
                           const std::vector<std::vector<double>>& attacked,
                           const PipelineOptions& opts, int workers) {
    bool attackedRun = !attacked.empty();
    if (attackedRun && attacked.size() != instances.size())
        throw std::invalid_argument("attacked activation count mismatch");

    RunEvaluation ev;
    ev.outcomes.resize(instances.size());
    parallel_for(instances.size(), workers, [&](size_t i) {
        const std::vector<double>& act =
            attackedRun ? attacked[i] : instances[i].activation;
        InstanceOutcome& out = ev.outcomes[i];
        out.predicted = predictor.predict(threshold(act));
        IdentifyReport rep = identify(pipeline_graph,
                                      binarize(act, out.predicted, pipeline_graph.schema()),
                                      opts.identify);
        out.flagged = rep.verdict == Verdict::LogicError;
        out.ratio = rep.ratio;
        out.satisfaction_before = rep.satisfaction;
        out.satisfaction_after = rep.satisfaction;
        if (out.flagged && opts.repair_enabled) {
            InterventionPlan plan = repair(pipeline_graph, act, out.predicted, opts.repair);
            out.rectified = std::move(plan.rectified);
            out.satisfaction_after = plan.satisfaction_after;
            out.applied_interventions = static_cast<int>(plan.applied.size());
        } else {
            out.rectified = act;
        }
        out.repredicted = predictor.predict(threshold(out.rectified));
    });

    // fixed-order aggregation keeps reports identical across worker counts
    MetricsRow& row = ev.metrics;
    row.n = static_cast<int>(instances.size());
    std::vector<std::vector<double>> before, after;
    std::vector<std::vector<uint8_t>> truths;
    std::vector<int> predBefore, predAfter, truthCats;
    for (size_t i = 0; i < instances.size(); ++i) {
        const InstanceOutcome& out = ev.outcomes[i];
        row.flagged += out.flagged;
        before.push_back(attackedRun ? attacked[i] : instances[i].activation);
        after.push_back(out.rectified);
        truths.push_back(instances[i].true_concepts);
        predBefore.push_back(out.predicted);
        predAfter.push_back(out.repredicted);
        truthCats.push_back(instances[i].true_category);
    }
    if (row.n > 0) {
        row.lsm_before = lsm_mean(metric_graph, before, predBefore);
        // rectified explanations still explain the unchanged prediction
        row.lsm_after = lsm_mean(metric_graph, after, predBefore);
        row.e_acc_before = e_acc(before, truths);
        row.e_acc_after = e_acc(after, truths);
        row.p_acc_before = p_acc(predBefore, truthCats);
        row.p_acc_after = p_acc(predAfter, truthCats);
        DetectionCounts counts;
        if (attackedRun) {
            counts.attacked_total = row.n;
            counts.attacked_flagged = row.flagged;
        } else {
            counts.clean_total = row.n;
            counts.clean_passed = row.n - row.flagged;
        }
        DetectionRates rates = detection_rates(counts);
        row.identification_rate = rates.identification_rate;
        row.success_rate = rates.success_rate;
    }
    return ev;
}

std::string family_filter_name(FamilyFilter f) {
    switch (f) {
    case FamilyFilter::All: return "all";
    case FamilyFilter::CategoryConcept: return "category";
    case FamilyFilter::ConceptConcept: return "concept";
    case FamilyFilter::None: return "none";
    }
    return "?";
}

std::vector<SweepRow> sweep_and_ablation(const RuleSet& rules, const RuleSchema& schema,
                                         std::span<const double> weights,
                                         const NearestSignaturePredictor& predictor,
                                         const std::vector<Instance>& instances,
                                         const std::vector<std::vector<double>>& attacked,
                                         const PipelineOptions& opts, const SweepConfig& cfg,
                                         int workers) {
    if (weights.size() != rules.rules.size())
        throw std::invalid_argument("weight count does not match rule count");
    for (double r : cfg.ratios) {
        if (!(r > 0.0) || !(r <= 1.0))
            throw std::invalid_argument("sweep ratios must sit in (0,1]");
    }
    FactorGraph full = FactorGraph::build(rules, schema, weights);

    std::vector<SweepRow> rows;
    uint64_t cell = 0;
    for (FamilyFilter family : cfg.families) {
        // rule ids eligible under the family filter
        std::vector<int> eligible;
        for (const Rule& r : rules.rules) {
            bool keep = family == FamilyFilter::All ||
                        (family == FamilyFilter::CategoryConcept &&
                         r.family == RuleFamily::CategoryConcept) ||
                        (family == FamilyFilter::ConceptConcept &&
                         r.family == RuleFamily::ConceptConcept);
            if (keep)
                eligible.push_back(r.id);
        }
        std::vector<double> ratios = family == FamilyFilter::None
                                         ? std::vector<double>{1.0}
                                         : cfg.ratios;
        for (double ratio : ratios) {
            for (int repeat = 0; repeat < cfg.repeats; ++repeat, ++cell) {
                std::vector<int> chosen;
                if (family != FamilyFilter::None && !eligible.empty()) {
                    size_t take = static_cast<size_t>(
                        std::ceil(ratio * static_cast<double>(eligible.size())));
                    take = std::min(take, eligible.size());
                    std::vector<int> pool = eligible;
                    Rng rng(derive_seed(cfg.seed, cell));
                    rng.shuffle(pool);
                    chosen.assign(pool.begin(), pool.begin() + take);
                    std::sort(chosen.begin(), chosen.end());
                }
                RuleSet subset;
                std::vector<double> subWeights;
                for (int id : chosen) {
                    Rule r = rules.rules[static_cast<size_t>(id)];
                    r.id = static_cast<int>(subset.rules.size());
                    subset.rules.push_back(std::move(r));
                    subWeights.push_back(weights[static_cast<size_t>(id)]);
                }
                FactorGraph sub = FactorGraph::build(subset, schema, subWeights);
                SweepRow row;
                row.family = family;
                row.ratio = family == FamilyFilter::None ? 0.0 : ratio;
                row.repeat = repeat;
                row.factors_used = sub.num_factors();
                row.metrics =
                    evaluate_run(sub, full, predictor, instances, attacked, opts, workers)
                        .metrics;
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

} // namespace conceptguard
