#pragma once

#include "conceptguard/evaluation.hpp"
#include "conceptguard/weights.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace conceptguard {

// Everything a run needs, loadable from one JSON document. Field names in
// the file mirror the nested structure, e.g. {"attack": {"budgets": [1,2]}}.
struct ExperimentConfig {
    struct Schema {
        int categories = 12;
        int concepts = 10;
        int signature_size = 4;
    } schema;
    struct Dataset {
        int clean = 1000;
        int attacked = 1000;
        double noise = 0.1;
        uint64_t seed = 7;
    } dataset;
    struct Rules {
        double omission = 0.0;
        uint64_t seed = 11;
        std::string path; // nonempty: load instead of deriving
    } rules;
    struct Weights {
        WeightMode mode = WeightMode::Prior;
        double learning_rate = 0.05;
        int epochs = 200;
        std::string path; // nonempty: load instead of prior/fit
    } weights;
    struct Attack {
        AttackKind kind = AttackKind::Confounding;
        std::vector<int> budgets{1, 2, 3, 4};
        double gamma = 0.5;
        uint64_t seed = 23;
    } attack;
    struct Identify {
        double delta = 0.9;
        MaxMode max_mode = MaxMode::AllSatisfied;
    } identify;
    struct Repair {
        int max_passes = 3;
        bool enabled = true;
    } repair;
    struct Sweep {
        std::vector<double> ratios{0.25, 0.5, 0.75, 1.0};
        std::vector<FamilyFilter> families{FamilyFilter::All, FamilyFilter::CategoryConcept,
                                           FamilyFilter::ConceptConcept, FamilyFilter::None};
        int repeats = 5;
        uint64_t seed = 31;
    } sweep;
    struct Output {
        std::string dir;
        int workers = 0; // <= 0: hardware concurrency
    } output;
};

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

ExperimentConfig load_config(const std::filesystem::path& path);

// parse a config given directly as JSON text
ExperimentConfig parse_config(const std::string& json_text);

// dotted-path override, e.g. "dataset.noise=0.2" or "attack.budgets=[1,2]".
// Values parse as JSON when possible, otherwise as a string.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

std::string config_to_json(const ExperimentConfig& cfg); // pretty-printed echo

void validate_config(const ExperimentConfig& cfg); // throws ConfigError

// Materialized inputs shared by the subcommands: benign dataset with noise
// applied, rules, weights and the graph built from them.
struct Workbench {
    SynthDataset dataset;
    RuleSet rules;
    std::vector<double> weights;
    FactorGraph graph;
    NearestSignaturePredictor predictor;
    int clean_count = 0; // boundary between the clean and attacked slices

    std::vector<Instance> clean_slice() const;    // first clean_count instances
    std::vector<Instance> attacked_slice() const; // remaining instances
};

Workbench prepare(const ExperimentConfig& cfg);

struct BudgetReport {
    int budget = 0;
    std::string eps_label; // paper-style label for budgets 1..4, "-" otherwise
    MetricsRow metrics;
    double mean_gain = 0.0;      // mean satisfaction gain over repaired instances
    double mean_achieved = 0.0;  // mean concepts actually altered by the attack
};

struct RunReport {
    MetricsRow clean;
    std::vector<BudgetReport> budgets;
};

struct PhaseTimes {
    double prepare_s = 0.0;
    double attack_s = 0.0;
    double evaluate_s = 0.0;
    double total_s = 0.0;
};

// attack -> identify -> repair -> metrics for the clean slice and every
// budget. When out_dir is nonempty, writes report.csv, report.json and
// instances.jsonl (plus rules.rules and weights.txt) there; outputs are
// byte-identical for identical configs.
RunReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                         PhaseTimes* times = nullptr);

// Dataset/rule generation only; writes instances.jsonl, rules.rules,
// weights.txt and signatures.json, and returns a Table-style count summary.
std::string cmd_gen(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Maximum likelihood weights on the benign assignments; writes weights.txt.
FitResult cmd_learn_weights(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct BoundsReport {
    int n_factors = 0;
    int budget = 0;
    std::optional<double> theta_T, theta_F;
    double empirical_concept_acc = 0.0; // post-repair, fraction in [0,1]
    std::vector<double> bound_by_n;     // theorem2 over N = 0..n_sweep
    bool assumption_ok = false;
    std::string lemma2_note;   // value or domain-error text
    std::string theorem1_note; // value or domain-error text
};

// Characteristics from the first configured budget's attacked slice, then
// the certified-bound table; writes bounds.csv and bounds.json.
BoundsReport cmd_bounds(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                        int n_sweep = 50);

// Knowledge-ratio and family ablation grid; writes sweep.csv and sweep.json.
std::vector<SweepRow> cmd_sweep(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir);

// weights.txt round-trip helpers ("<rule_id> <weight>" per line)
std::vector<double> read_weights_file(const std::filesystem::path& path, size_t expected);
void write_weights_file(const std::filesystem::path& path, std::span<const double> w);

std::string eps_label_for_budget(int budget);

} // namespace conceptguard
