// Acceptance gate: ten end-to-end criteria with pinned tolerances, each
// printed as one [PASS]/[FAIL] line. Any failure makes the process exit
// nonzero. Oracles here are coded independently of the library internals:
// scores come from a plain recursive formula walk, partitions from direct
// summation, optima from exhaustive enumeration.

#include "conceptguard/experiment.hpp"
#include "conceptguard/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace conceptguard;
namespace fs = std::filesystem;

namespace {

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string strf(const char* fmt, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, fmt);
    vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

struct Result {
    bool ok = false;
    std::string detail;
};

// ---- independent evaluation helpers ----------------------------------------

bool eval_node(const Formula& f, const Assignment& a) {
    if (const auto* leaf = std::get_if<Formula::Leaf>(&f.node)) {
        if (leaf->var.kind == VarKind::Concept)
            return a.concepts[static_cast<size_t>(leaf->var.index)] != 0;
        return leaf->var.index == a.category;
    }
    if (const auto* neg = std::get_if<Formula::Not>(&f.node))
        return !eval_node(*neg->arg, a);
    const auto& bin = std::get<Formula::Binary>(f.node);
    bool l = eval_node(*bin.lhs, a);
    bool r = eval_node(*bin.rhs, a);
    switch (bin.op) {
    case Connective::And: return l && r;
    case Connective::Or: return l || r;
    case Connective::Xor: return l != r;
    case Connective::Iff: return l == r;
    }
    return false;
}

double raw_score(const FactorGraph& g, const Assignment& a) {
    double s = 0.0;
    for (const Factor& f : g.factors())
        if (eval_node(*f.formula, a))
            s += f.weight;
    return s;
}

Assignment assignment_from_mask(uint32_t mask, int m, int category) {
    Assignment a;
    a.concepts.resize(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        a.concepts[static_cast<size_t>(i)] = (mask >> i) & 1u;
    a.category = category;
    return a;
}

// ---- random rule material ---------------------------------------------------

FormulaPtr random_formula(Rng& rng, int nc, int ny, int depth) {
    if (depth == 0 || rng.bernoulli(0.3)) {
        VarRef v;
        if (ny > 0 && rng.bernoulli(0.3))
            v = VarRef{VarKind::Category, rng.index(ny)};
        else
            v = VarRef{VarKind::Concept, rng.index(nc)};
        FormulaPtr f = make_leaf(v);
        if (rng.bernoulli(0.3))
            f = make_not(f);
        return f;
    }
    static constexpr Connective ops[] = {Connective::And, Connective::Or, Connective::Xor,
                                         Connective::Iff};
    FormulaPtr f = make_binary(ops[rng.index(4)], random_formula(rng, nc, ny, depth - 1),
                               random_formula(rng, nc, ny, depth - 1));
    if (rng.bernoulli(0.15))
        f = make_not(f);
    return f;
}

bool formula_is_constant(const Formula& f) {
    std::vector<VarRef> vars = formula_vars(f);
    int n = static_cast<int>(vars.size());
    bool first = false;
    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
        auto value = [&](VarRef v) {
            for (int i = 0; i < n; ++i)
                if (vars[static_cast<size_t>(i)] == v)
                    return ((mask >> i) & 1u) != 0;
            return false;
        };
        bool val = eval_formula(f, value);
        if (mask == 0)
            first = val;
        else if (val != first)
            return false;
    }
    return true;
}

// validated, non-degenerate, 1..max_rules factors (depth <= 2 keeps arity <= 4)
RuleSet random_valid_rules(Rng& rng, const RuleSchema& schema, int max_rules) {
    for (;;) {
        int target = 1 + rng.index(max_rules);
        RuleSet rs;
        for (int i = 0; i < target; ++i) {
            FormulaPtr f = random_formula(rng, schema.num_concepts, schema.num_categories, 2);
            if (formula_is_constant(*f))
                continue;
            Rule r;
            r.id = static_cast<int>(rs.rules.size());
            r.formula = f;
            r.family = infer_family(*f);
            rs.rules.push_back(std::move(r));
        }
        if (rs.rules.empty())
            continue;
        ValidateOptions vo;
        vo.dedup = true;
        RuleSet valid = validate_rules(rs, schema, vo);
        if (!valid.rules.empty())
            return valid;
    }
}

// ---- shared default-config pipeline (criteria 2 and 3) ----------------------

PipelineOptions options_from(const ExperimentConfig& cfg) {
    PipelineOptions opts;
    opts.identify.delta = cfg.identify.delta;
    opts.identify.max_mode = cfg.identify.max_mode;
    opts.repair.max_passes = cfg.repair.max_passes;
    opts.repair_enabled = cfg.repair.enabled;
    return opts;
}

std::vector<std::vector<double>> attack_all(const Workbench& wb, const ExperimentConfig& cfg,
                                            int budget, const std::vector<Instance>& slice) {
    std::vector<std::vector<double>> acts(slice.size());
    uint64_t budget_seed = derive_seed(cfg.attack.seed, static_cast<uint64_t>(budget));
    for (size_t i = 0; i < slice.size(); ++i) {
        AttackSpec spec;
        spec.kind = cfg.attack.kind;
        spec.budget = budget;
        spec.gamma = cfg.attack.gamma;
        spec.seed = derive_seed(budget_seed, i);
        acts[i] = attack(slice[i], spec, wb.predictor).activation;
    }
    return acts;
}

struct DefaultRun {
    ExperimentConfig cfg; // stock defaults: K=12, M=10, k=4, 1000+1000, B in 1..4
    Workbench wb;
    RunEvaluation clean;
    std::vector<RunEvaluation> budgets;
    double seconds = 0.0;
};

const DefaultRun& default_run() {
    static const DefaultRun instance = [] {
        DefaultRun d;
        double t0 = now_s();
        d.wb = prepare(d.cfg);
        PipelineOptions opts = options_from(d.cfg);
        std::vector<Instance> clean = d.wb.clean_slice();
        std::vector<Instance> target = d.wb.attacked_slice();
        d.clean = evaluate_run(d.wb.graph, d.wb.graph, d.wb.predictor, clean, {}, opts, 0);
        for (int b : d.cfg.attack.budgets) {
            std::vector<std::vector<double>> acts = attack_all(d.wb, d.cfg, b, target);
            d.budgets.push_back(
                evaluate_run(d.wb.graph, d.wb.graph, d.wb.predictor, target, acts, opts, 0));
        }
        d.seconds = now_s() - t0;
        return d;
    }();
    return instance;
}

// ---- shared ablation sweep (criteria 7 and 8) -------------------------------

struct SweepShared {
    double lsm_all = 0.0, lsm_cat = 0.0, lsm_con = 0.0, lsm_none = 0.0;
    double eacc_full = 0.0, eacc_quarter = 0.0;
    int seeds = 0;
};

const SweepShared& shared_sweep() {
    static const SweepShared instance = [] {
        SweepShared s;
        const int kSeeds = 5;
        for (int rep = 0; rep < kSeeds; ++rep) {
            ExperimentConfig cfg;
            cfg.dataset.clean = 0;
            cfg.dataset.attacked = 300;
            cfg.dataset.seed = 500 + static_cast<uint64_t>(rep);
            cfg.attack.budgets = {4};
            Workbench wb = prepare(cfg);
            std::vector<Instance> target = wb.attacked_slice();
            std::vector<std::vector<double>> acts = attack_all(wb, cfg, 4, target);
            SweepConfig sc;
            sc.ratios = {0.25, 1.0};
            sc.families = {FamilyFilter::All, FamilyFilter::CategoryConcept,
                           FamilyFilter::ConceptConcept, FamilyFilter::None};
            sc.repeats = 1;
            sc.seed = 900 + static_cast<uint64_t>(rep);
            std::vector<SweepRow> rows =
                sweep_and_ablation(wb.rules, wb.dataset.schema, wb.weights, wb.predictor,
                                   target, acts, options_from(cfg), sc, 0);
            for (const SweepRow& row : rows) {
                if (row.family == FamilyFilter::None) {
                    s.lsm_none += row.metrics.lsm_after;
                    continue;
                }
                if (row.ratio != 1.0) {
                    if (row.family == FamilyFilter::All)
                        s.eacc_quarter += row.metrics.e_acc_after;
                    continue;
                }
                switch (row.family) {
                case FamilyFilter::All:
                    s.lsm_all += row.metrics.lsm_after;
                    s.eacc_full += row.metrics.e_acc_after;
                    break;
                case FamilyFilter::CategoryConcept: s.lsm_cat += row.metrics.lsm_after; break;
                case FamilyFilter::ConceptConcept: s.lsm_con += row.metrics.lsm_after; break;
                case FamilyFilter::None: break;
                }
            }
        }
        s.lsm_all /= kSeeds;
        s.lsm_cat /= kSeeds;
        s.lsm_con /= kSeeds;
        s.lsm_none /= kSeeds;
        s.eacc_full /= kSeeds;
        s.eacc_quarter /= kSeeds;
        s.seeds = kSeeds;
        return s;
    }();
    return instance;
}

// ---- criterion 1: probability oracle ----------------------------------------

Result c1_oracle_equivalence() {
    double t0 = now_s();
    double max_rel = 0.0;
    double max_sum_dev = 0.0;
    Rng rng(41);
    for (int iter = 0; iter < 200; ++iter) {
        int m = 2 + iter % 9; // 2..10 concepts
        RuleSchema schema;
        schema.num_concepts = m;
        schema.num_categories = 1 + rng.index(4);
        RuleSet rules = random_valid_rules(rng, schema, 20);
        std::vector<double> w(rules.rules.size());
        for (double& x : w)
            x = rng.unit();
        FactorGraph g = FactorGraph::build(rules, schema, w);

        int category = rng.index(schema.num_categories);
        long double z = 0.0L;
        for (uint32_t mask = 0; mask < (1u << m); ++mask)
            z += expl(static_cast<long double>(
                raw_score(g, assignment_from_mask(mask, m, category))));

        Assignment probe = assignment_from_mask(
            static_cast<uint32_t>(rng.below(1u << m)), m, category);
        double want = static_cast<double>(
            expl(static_cast<long double>(raw_score(g, probe))) / z);
        double got = conditional_probability(g, probe);
        max_rel = std::max(max_rel, std::fabs(got - want) / want);

        if (m <= 6) {
            double sum = 0.0;
            for (uint32_t mask = 0; mask < (1u << m); ++mask) {
                Assignment a = assignment_from_mask(mask, m, category);
                double p = conditional_probability(g, a);
                sum += p;
                double pw = static_cast<double>(
                    expl(static_cast<long double>(raw_score(g, a))) / z);
                max_rel = std::max(max_rel, std::fabs(p - pw) / pw);
            }
            max_sum_dev = std::max(max_sum_dev, std::fabs(sum - 1.0));
        }
    }
    double secs = now_s() - t0;
    bool ok = max_rel <= 1e-12 && max_sum_dev <= 1e-9 && secs < 30.0;
    return {ok, strf("200 graphs, max rel err %.2e (<=1e-12), max sum dev %.2e (<=1e-9), %.1fs",
                     max_rel, max_sum_dev, secs)};
}

// ---- criterion 2: detection rates on the stock configuration ----------------

Result c2_detection_rates() {
    const DefaultRun& d = default_run();
    if (!d.clean.metrics.success_rate)
        return {false, "clean run reported no success rate"};
    double sr = *d.clean.metrics.success_rate;
    bool ok = sr == 100.0;
    std::string irs;
    for (size_t i = 0; i < d.budgets.size(); ++i) {
        const auto& ir = d.budgets[i].metrics.identification_rate;
        if (!ir)
            return {false, "attacked run reported no identification rate"};
        ok = ok && *ir >= 95.0;
        irs += strf("%s%.1f", i ? "/" : "", *ir);
    }
    ok = ok && d.seconds < 60.0;
    return {ok, strf("SR=%.1f (==100), IR by budget %s (>=95), %.1fs (<60)", sr, irs.c_str(),
                     d.seconds)};
}

// ---- criterion 3: repair never degrades --------------------------------------

Result c3_repair_non_degradation() {
    const DefaultRun& d = default_run();
    int violations = 0;
    bool lsm_up = true;
    double eacc_before = 0.0, eacc_after = 0.0, pacc_before = 0.0, pacc_after = 0.0;
    for (const RunEvaluation& ev : d.budgets) {
        for (const InstanceOutcome& out : ev.outcomes) {
            if (!out.flagged)
                continue;
            if (out.satisfaction_after < out.satisfaction_before)
                ++violations;
            if (out.applied_interventions > 0 &&
                !(out.satisfaction_after > out.satisfaction_before))
                ++violations;
        }
        lsm_up = lsm_up && ev.metrics.lsm_after > ev.metrics.lsm_before;
        eacc_before += ev.metrics.e_acc_before;
        eacc_after += ev.metrics.e_acc_after;
        pacc_before += ev.metrics.p_acc_before;
        pacc_after += ev.metrics.p_acc_after;
    }
    double nb = static_cast<double>(d.budgets.size());
    bool acc_ok = eacc_after >= eacc_before && pacc_after >= pacc_before;
    bool ok = violations == 0 && lsm_up && acc_ok;
    return {ok, strf("satisfaction violations %d, LSM up at every budget %s, "
                     "E-ACC %.2f->%.2f, P-ACC %.2f->%.2f (aggregate)",
                     violations, lsm_up ? "yes" : "no", eacc_before / nb, eacc_after / nb,
                     pacc_before / nb, pacc_after / nb)};
}

// ---- criterion 4: repair optimality on exhaustively solvable worlds ----------

Result c4_small_repair_optimality() {
    const int kCases = 100;
    const int m = 6;
    int optimal = 0;
    int cases = 0;
    double gap_sum = 0.0;
    double gap_max = 0.0;
    for (uint64_t seed = 1; cases < kCases; ++seed) {
        SynthDataset ds = gen_dataset(5, m, 3, 4, seed);
        apply_concept_predictor(ds, 0.1, derive_seed(seed, 101));
        RuleSet rules = derive_rules(ds.signatures, m, 0.0, derive_seed(seed, 202));
        FactorGraph g = FactorGraph::build(rules, ds.schema, prior_weights(rules));
        NearestSignaturePredictor pred(ds.signatures, m);
        for (size_t i = 0; i < ds.instances.size() && cases < kCases; ++i) {
            const Instance& inst = ds.instances[i];
            AttackSpec spec;
            spec.budget = 1 + static_cast<int>(seed % 3);
            spec.seed = derive_seed(seed, 303 + i);
            AttackResult res = attack(inst, spec, pred);
            if (res.achieved == 0)
                continue;
            InterventionPlan plan = repair(g, res.activation, inst.predicted_category);
            double best = 0.0;
            for (uint32_t mask = 0; mask < (1u << m); ++mask)
                best = std::max(best, raw_score(g, assignment_from_mask(
                                          mask, m, inst.predicted_category)));
            double gap = best - plan.satisfaction_after;
            ++cases;
            if (gap <= 1e-9) {
                ++optimal;
            } else {
                gap_sum += gap;
                gap_max = std::max(gap_max, gap);
            }
        }
    }
    bool ok = optimal >= 90;
    int misses = cases - optimal;
    return {ok, strf("exhaustive-best reached on %d/%d cases (>=90); misses %d, "
                     "mean gap %.3g, max gap %.3g",
                     optimal, cases, misses, misses ? gap_sum / misses : 0.0, gap_max)};
}

// ---- criterion 5: likelihood gradient and clamp ------------------------------

Result c5_gradient_and_clamp() {
    Rng rng(53);
    double max_rel = 0.0;
    const double h = 1e-5;
    for (int iter = 0; iter < 50; ++iter) {
        RuleSchema schema;
        schema.num_concepts = 8;
        schema.num_categories = 2 + iter % 3;
        RuleSet rules = random_valid_rules(rng, schema, 10);
        size_t n = rules.rules.size();
        std::vector<double> w(n);
        for (double& x : w)
            x = rng.uniform(0.05, 0.95);
        FactorGraph g = FactorGraph::build(rules, schema, w);

        std::vector<Assignment> data;
        for (int s = 0; s < 12; ++s) {
            Assignment a;
            a.concepts.resize(8);
            for (auto& bit : a.concepts)
                bit = rng.bernoulli(0.5) ? 1 : 0;
            a.category = rng.index(schema.num_categories);
            data.push_back(std::move(a));
        }

        NllGrad ng = nll_and_gradient(g, data, w);
        for (size_t i = 0; i < n; ++i) {
            std::vector<double> wp = w, wm = w;
            wp[i] += h;
            wm[i] -= h;
            double fd = (nll_and_gradient(g, data, wp).nll -
                         nll_and_gradient(g, data, wm).nll) /
                        (2 * h);
            double rel = std::fabs(ng.grad[i] - fd) / std::max(1.0, std::fabs(fd));
            max_rel = std::max(max_rel, rel);
        }
    }

    // all-satisfying data must drive every weight to the upper clamp
    SynthDataset ds = gen_dataset(6, 8, 3, 40, 99);
    RuleSet rules = derive_rules(ds.signatures, 8, 0.0, 123);
    std::vector<double> ones(rules.rules.size(), 1.0);
    FactorGraph g = FactorGraph::build(rules, ds.schema, ones);
    std::vector<Assignment> data;
    for (const Instance& inst : ds.instances)
        data.push_back(Assignment{inst.true_concepts, inst.true_category});
    WeightConfig wc;
    wc.learning_rate = 0.5;
    wc.epochs = 400;
    FitResult fit = mle_fit(g, data, wc);
    int clamped = 0;
    for (double x : fit.weights)
        if (x == wc.clamp_hi)
            ++clamped;
    bool ok = max_rel < 1e-5 && clamped == static_cast<int>(fit.weights.size());
    return {ok, strf("50 graphs, max gradient rel err %.2e (<1e-5); upper clamp reached on "
                     "%d/%zu weights",
                     max_rel, clamped, fit.weights.size())};
}

// ---- criterion 6: certified recovery bound -----------------------------------

Result c6_certified_bound() {
    bool zero_ok = theorem2_bound(0, 0.9, 0.2) == 0.0;
    bool monotone = true;
    double prev = theorem2_bound(0, 0.6, 0.55);
    for (int n = 1; n <= 50; ++n) {
        double cur = theorem2_bound(n, 0.6, 0.55);
        monotone = monotone && cur > prev;
        prev = cur;
    }

    int configs_ok = 0;
    const int kConfigs = 20;
    double min_margin = 1e9;
    for (int s = 0; s < kConfigs; ++s) {
        ExperimentConfig cfg;
        cfg.schema.categories = 8 + 2 * (s % 3);
        cfg.dataset.clean = 0;
        cfg.dataset.attacked = 150;
        cfg.dataset.seed = 1000 + static_cast<uint64_t>(s);
        cfg.rules.seed = 11 + static_cast<uint64_t>(s);
        cfg.attack.budgets = {1 + s % 2};
        cfg.attack.seed = 23 + static_cast<uint64_t>(s);
        BoundsReport rep = cmd_bounds(cfg, "", 1);
        if (!rep.theta_T || !rep.theta_F)
            continue;
        double bound = theorem2_bound(rep.n_factors, *rep.theta_T, *rep.theta_F);
        double margin = rep.empirical_concept_acc - (bound - 0.02);
        min_margin = std::min(min_margin, margin);
        if (margin >= 0.0)
            ++configs_ok;
    }
    bool ok = zero_ok && monotone && configs_ok == kConfigs;
    return {ok, strf("f(0)=0 %s, strictly increasing %s, empirical acc >= bound-0.02 on "
                     "%d/%d configs (min margin %.4f)",
                     zero_ok ? "exact" : "VIOLATED", monotone ? "yes" : "no", configs_ok,
                     kConfigs, min_margin)};
}

// ---- criterion 7: knowledge family ablation ordering -------------------------

Result c7_ablation_ordering() {
    const SweepShared& s = shared_sweep();
    bool chain_cat = s.lsm_all >= s.lsm_cat && s.lsm_cat >= s.lsm_none;
    bool chain_con = s.lsm_all >= s.lsm_con && s.lsm_con >= s.lsm_none;
    return {chain_cat && chain_con,
            strf("mean LSM over %d seeds: all=%.2f cat=%.2f con=%.2f none=%.2f "
                 "(all>=cat>=none %s, all>=con>=none %s)",
                 s.seeds, s.lsm_all, s.lsm_cat, s.lsm_con, s.lsm_none,
                 chain_cat ? "yes" : "no", chain_con ? "yes" : "no")};
}

// ---- criterion 8: knowledge ratio sweep --------------------------------------

Result c8_ratio_sweep() {
    const SweepShared& s = shared_sweep();
    double margin = s.eacc_full - s.eacc_quarter;
    return {margin > 0.0, strf("mean E-ACC over %d seeds: ratio 1.0 %.2f vs ratio 0.25 %.2f "
                               "(margin %.2f > 0)",
                               s.seeds, s.eacc_full, s.eacc_quarter, margin)};
}

// ---- criterion 9: quadratic complexity guard ---------------------------------

FactorGraph nand_graph(int m) {
    RuleSet rs;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            Rule r;
            r.id = static_cast<int>(rs.rules.size());
            r.formula = make_not(make_binary(Connective::And,
                                             make_leaf({VarKind::Concept, i}),
                                             make_leaf({VarKind::Concept, j})));
            r.family = RuleFamily::ConceptConcept;
            rs.rules.push_back(std::move(r));
        }
    }
    RuleSchema schema;
    schema.num_concepts = m;
    schema.num_categories = 1;
    rs = validate_rules(rs, schema);
    std::vector<double> w(rs.rules.size(), 1.0);
    return FactorGraph::build(rs, schema, w);
}

volatile double g_sink = 0.0;

double time_repair(const FactorGraph& g, const std::vector<double>& act) {
    g_sink = repair(g, act, 0).satisfaction_after; // warm up
    double best = 1e9;
    for (int round = 0; round < 3; ++round) {
        int reps = 4;
        for (;;) {
            double t0 = now_s();
            for (int r = 0; r < reps; ++r)
                g_sink = repair(g, act, 0).satisfaction_after;
            double elapsed = now_s() - t0;
            if (elapsed >= 0.05) {
                best = std::min(best, elapsed / reps);
                break;
            }
            reps *= 4;
        }
    }
    return best;
}

Result c9_complexity_guard() {
    bool cases_ok = true;
    double t[3] = {0, 0, 0};
    const int ms[3] = {10, 20, 40};
    long worst_cases = 0;
    for (int k = 0; k < 3; ++k) {
        int m = ms[k];
        FactorGraph g = nand_graph(m);
        for (const Factor& f : g.factors())
            if (f.concept_vars.size() != 2)
                return {false, "fixture is not a binary-factor graph"};
        long cap = 12L * m * (m - 1);

        std::vector<double> hot(static_cast<size_t>(m), 0.9); // every pair violated
        InterventionPlan plan = repair(g, hot, 0);
        cases_ok = cases_ok && plan.stats.cases_enumerated <= cap;
        worst_cases = std::max(worst_cases, plan.stats.cases_enumerated);

        std::vector<double> light(static_cast<size_t>(m), 0.1); // two spurious bits
        light[0] = light[1] = light[2] = 0.9;
        plan = repair(g, light, 0);
        cases_ok = cases_ok && plan.stats.cases_enumerated <= cap;
        if (plan.satisfaction_after != g.total_weight())
            return {false, strf("repair left a %d-concept fixture unsatisfied", m)};

        t[k] = time_repair(g, light);
    }
    // doubling M may at most quadruple the time, within 2x tolerance
    double r1 = t[1] / t[0];
    double r2 = t[2] / t[1];
    bool time_ok = r1 <= 8.0 && r2 <= 8.0;
    return {cases_ok && time_ok,
            strf("cases max %ld within 12*M*(M-1); repair time %.3f/%.3f/%.3f ms for "
                 "M=10/20/40, growth ratios %.2f, %.2f (<=8)",
                 worst_cases, t[0] * 1e3, t[1] * 1e3, t[2] * 1e3, r1, r2)};
}

// ---- criterion 10: determinism and grammar round-trip ------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Result c10_determinism_roundtrip() {
    ExperimentConfig cfg;
    cfg.schema = {8, 9, 3};
    cfg.dataset.clean = 40;
    cfg.dataset.attacked = 40;
    cfg.dataset.seed = 77;
    cfg.attack.budgets = {1, 2};
    fs::path base = fs::temp_directory_path() / "conceptguard_acceptance";
    fs::remove_all(base);
    fs::create_directories(base / "a");
    fs::create_directories(base / "b");
    run_experiment(cfg, base / "a");
    run_experiment(cfg, base / "b");
    int identical = 0;
    const char* files[] = {"report.csv", "report.json", "instances.jsonl", "rules.rules",
                           "weights.txt"};
    for (const char* f : files)
        if (slurp(base / "a" / f) == slurp(base / "b" / f))
            ++identical;
    fs::remove_all(base);

    Rng rng(2024);
    int round_trips = 0;
    const int kSets = 1000;
    for (int iter = 0; iter < kSets; ++iter) {
        RuleSet rs;
        int n = 1 + rng.index(10);
        for (int i = 0; i < n; ++i) {
            Rule r;
            r.id = i;
            r.formula = random_formula(rng, 6, 3, 3);
            r.family = infer_family(*r.formula);
            if (rng.bernoulli(0.7))
                r.confidence = rng.uniform(0.001, 1.0);
            rs.rules.push_back(std::move(r));
        }
        std::string text = format_rules(rs);
        RuleSet back = parse_rules(text);
        bool same = back.rules.size() == rs.rules.size() && format_rules(back) == text;
        for (size_t i = 0; same && i < rs.rules.size(); ++i) {
            const Rule& a = rs.rules[i];
            const Rule& b = back.rules[i];
            same = a.id == b.id && a.family == b.family && a.confidence == b.confidence &&
                   canonical_key(*a.formula) == canonical_key(*b.formula) &&
                   format_formula(*a.formula) == format_formula(*b.formula);
        }
        if (same)
            ++round_trips;
    }
    bool ok = identical == 5 && round_trips == kSets;
    return {ok, strf("%d/5 report files byte-identical across reruns; %d/%d random rule "
                     "sets round-trip exactly",
                     identical, round_trips, kSets)};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Result()> body;
    };
    const Criterion criteria[] = {
        {"oracle equivalence", c1_oracle_equivalence},
        {"detection rates", c2_detection_rates},
        {"repair non-degradation", c3_repair_non_degradation},
        {"small-instance repair optimality", c4_small_repair_optimality},
        {"gradient and clamp", c5_gradient_and_clamp},
        {"certified recovery bound", c6_certified_bound},
        {"knowledge ablation ordering", c7_ablation_ordering},
        {"knowledge ratio sweep", c8_ratio_sweep},
        {"complexity guard", c9_complexity_guard},
        {"determinism and round-trip", c10_determinism_roundtrip},
    };
    int failed = 0;
    int index = 0;
    for (const Criterion& c : criteria) {
        ++index;
        double t0 = now_s();
        Result r;
        try {
            r = c.body();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        if (!r.ok)
            ++failed;
        printf("[%s] %2d. %s: %s (%.1fs)\n", r.ok ? "PASS" : "FAIL", index, c.name,
               r.detail.c_str(), now_s() - t0);
        fflush(stdout);
    }
    printf("acceptance: %d/10 criteria passed\n", 10 - failed);
    return failed ? 1 : 0;
}
