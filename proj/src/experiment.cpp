#include "conceptguard/experiment.hpp"

#include "conceptguard/parallel.hpp"
#include "conceptguard/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace conceptguard {

using nlohmann::json;

namespace {

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string weight_mode_name(WeightMode m) {
    return m == WeightMode::Prior ? "prior" : "mle";
}

WeightMode weight_mode_from(const std::string& s) {
    if (s == "prior")
        return WeightMode::Prior;
    if (s == "mle")
        return WeightMode::Mle;
    throw ConfigError("unknown weight mode '" + s + "'");
}

std::string attack_kind_name(AttackKind k) {
    switch (k) {
    case AttackKind::Erasure: return "erasure";
    case AttackKind::Introduction: return "introduction";
    case AttackKind::Confounding: return "confounding";
    }
    return "?";
}

AttackKind attack_kind_from(const std::string& s) {
    if (s == "erasure")
        return AttackKind::Erasure;
    if (s == "introduction")
        return AttackKind::Introduction;
    if (s == "confounding")
        return AttackKind::Confounding;
    throw ConfigError("unknown attack kind '" + s + "'");
}

std::string max_mode_name(MaxMode m) {
    return m == MaxMode::AllSatisfied ? "all_satisfied" : "exact";
}

MaxMode max_mode_from(const std::string& s) {
    if (s == "all_satisfied")
        return MaxMode::AllSatisfied;
    if (s == "exact")
        return MaxMode::Exact;
    throw ConfigError("unknown max mode '" + s + "'");
}

FamilyFilter family_filter_from(const std::string& s) {
    if (s == "all")
        return FamilyFilter::All;
    if (s == "category")
        return FamilyFilter::CategoryConcept;
    if (s == "concept")
        return FamilyFilter::ConceptConcept;
    if (s == "none")
        return FamilyFilter::None;
    throw ConfigError("unknown family filter '" + s + "'");
}

json config_json(const ExperimentConfig& c) {
    json j;
    j["schema"] = {{"categories", c.schema.categories},
                   {"concepts", c.schema.concepts},
                   {"signature_size", c.schema.signature_size}};
    j["dataset"] = {{"clean", c.dataset.clean},
                    {"attacked", c.dataset.attacked},
                    {"noise", c.dataset.noise},
                    {"seed", c.dataset.seed}};
    j["rules"] = {{"omission", c.rules.omission},
                  {"seed", c.rules.seed},
                  {"path", c.rules.path}};
    j["weights"] = {{"mode", weight_mode_name(c.weights.mode)},
                    {"learning_rate", c.weights.learning_rate},
                    {"epochs", c.weights.epochs},
                    {"path", c.weights.path}};
    j["attack"] = {{"kind", attack_kind_name(c.attack.kind)},
                   {"budgets", c.attack.budgets},
                   {"gamma", c.attack.gamma},
                   {"seed", c.attack.seed}};
    j["identify"] = {{"delta", c.identify.delta},
                     {"max_mode", max_mode_name(c.identify.max_mode)}};
    j["repair"] = {{"max_passes", c.repair.max_passes}, {"enabled", c.repair.enabled}};
    json fams = json::array();
    for (FamilyFilter f : c.sweep.families)
        fams.push_back(family_filter_name(f));
    j["sweep"] = {{"ratios", c.sweep.ratios},
                  {"families", fams},
                  {"repeats", c.sweep.repeats},
                  {"seed", c.sweep.seed}};
    j["output"] = {{"dir", c.output.dir}, {"workers", c.output.workers}};
    return j;
}

template <class T>
void read_field(const json& j, const char* key, T& into) {
    if (j.contains(key))
        into = j.at(key).get<T>();
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (!j.is_object())
        throw ConfigError("config root must be an object");
    if (auto it = j.find("schema"); it != j.end()) {
        read_field(*it, "categories", c.schema.categories);
        read_field(*it, "concepts", c.schema.concepts);
        read_field(*it, "signature_size", c.schema.signature_size);
    }
    if (auto it = j.find("dataset"); it != j.end()) {
        read_field(*it, "clean", c.dataset.clean);
        read_field(*it, "attacked", c.dataset.attacked);
        read_field(*it, "noise", c.dataset.noise);
        read_field(*it, "seed", c.dataset.seed);
    }
    if (auto it = j.find("rules"); it != j.end()) {
        read_field(*it, "omission", c.rules.omission);
        read_field(*it, "seed", c.rules.seed);
        read_field(*it, "path", c.rules.path);
    }
    if (auto it = j.find("weights"); it != j.end()) {
        if (it->contains("mode"))
            c.weights.mode = weight_mode_from(it->at("mode").get<std::string>());
        read_field(*it, "learning_rate", c.weights.learning_rate);
        read_field(*it, "epochs", c.weights.epochs);
        read_field(*it, "path", c.weights.path);
    }
    if (auto it = j.find("attack"); it != j.end()) {
        if (it->contains("kind"))
            c.attack.kind = attack_kind_from(it->at("kind").get<std::string>());
        read_field(*it, "budgets", c.attack.budgets);
        read_field(*it, "gamma", c.attack.gamma);
        read_field(*it, "seed", c.attack.seed);
    }
    if (auto it = j.find("identify"); it != j.end()) {
        read_field(*it, "delta", c.identify.delta);
        if (it->contains("max_mode"))
            c.identify.max_mode = max_mode_from(it->at("max_mode").get<std::string>());
    }
    if (auto it = j.find("repair"); it != j.end()) {
        read_field(*it, "max_passes", c.repair.max_passes);
        read_field(*it, "enabled", c.repair.enabled);
    }
    if (auto it = j.find("sweep"); it != j.end()) {
        read_field(*it, "ratios", c.sweep.ratios);
        if (it->contains("families")) {
            c.sweep.families.clear();
            for (const auto& f : it->at("families"))
                c.sweep.families.push_back(family_filter_from(f.get<std::string>()));
        }
        read_field(*it, "repeats", c.sweep.repeats);
        read_field(*it, "seed", c.sweep.seed);
    }
    if (auto it = j.find("output"); it != j.end()) {
        read_field(*it, "dir", c.output.dir);
        read_field(*it, "workers", c.output.workers);
    }
    return c;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt6(*v) : std::string();
}

std::string fmt_shortest(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out)
        throw std::runtime_error("failed writing " + path.string());
}

json metrics_json(const MetricsRow& m) {
    json j;
    j["n"] = m.n;
    j["flagged"] = m.flagged;
    j["lsm_before"] = m.lsm_before;
    j["lsm_after"] = m.lsm_after;
    j["e_acc_before"] = m.e_acc_before;
    j["e_acc_after"] = m.e_acc_after;
    j["p_acc_before"] = m.p_acc_before;
    j["p_acc_after"] = m.p_acc_after;
    if (m.identification_rate)
        j["identification_rate"] = *m.identification_rate;
    if (m.success_rate)
        j["success_rate"] = *m.success_rate;
    return j;
}

void metrics_csv(std::string& out, const MetricsRow& m) {
    out += std::to_string(m.n);
    out += ',';
    out += std::to_string(m.flagged);
    out += ',';
    out += fmt_opt(m.identification_rate);
    out += ',';
    out += fmt_opt(m.success_rate);
    out += ',';
    out += fmt6(m.lsm_before);
    out += ',';
    out += fmt6(m.lsm_after);
    out += ',';
    out += fmt6(m.e_acc_before);
    out += ',';
    out += fmt6(m.e_acc_after);
    out += ',';
    out += fmt6(m.p_acc_before);
    out += ',';
    out += fmt6(m.p_acc_after);
}

json instance_json(const Instance& inst, int id, const char* slice) {
    json j;
    j["kind"] = "benign";
    j["id"] = id;
    j["slice"] = slice;
    j["true_category"] = inst.true_category;
    j["true_concepts"] = inst.true_concepts;
    j["activation"] = inst.activation;
    j["predicted"] = inst.predicted_category;
    return j;
}

} // namespace

std::vector<Instance> Workbench::clean_slice() const {
    auto n = std::min(dataset.instances.size(),
                      static_cast<size_t>(std::max(clean_count, 0)));
    return {dataset.instances.begin(),
            dataset.instances.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<Instance> Workbench::attacked_slice() const {
    auto n = std::min(dataset.instances.size(),
                      static_cast<size_t>(std::max(clean_count, 0)));
    return {dataset.instances.begin() + static_cast<std::ptrdiff_t>(n),
            dataset.instances.end()};
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded())
        throw ConfigError("config is not valid JSON");
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like dotted.key=value: " + assignment);
    std::string key = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);

    json root = config_json(cfg);
    json* node = &root;
    size_t start = 0;
    while (true) {
        size_t dot = key.find('.', start);
        std::string part = key.substr(start, dot - start);
        if (part.empty())
            throw ConfigError("bad override key '" + key + "'");
        if (!node->is_object() || !node->contains(part))
            throw ConfigError("unknown config field '" + key + "'");
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            if (parsed.is_discarded())
                parsed = value; // treat as plain string
            (*node)[part] = parsed;
            break;
        }
        node = &node->at(part);
        start = dot + 1;
    }
    try {
        cfg = config_from_json(root);
    } catch (const json::exception& e) {
        throw ConfigError("override '" + assignment + "' produced an invalid config: " +
                          e.what());
    }
}

std::string config_to_json(const ExperimentConfig& cfg) {
    return config_json(cfg).dump(2) + "\n";
}

void validate_config(const ExperimentConfig& cfg) {
    const auto& s = cfg.schema;
    if (s.categories < 1 || s.concepts < 1 || s.signature_size < 1 ||
        s.signature_size > s.concepts)
        throw ConfigError("schema shape is infeasible");
    if (cfg.dataset.clean < 0 || cfg.dataset.attacked < 0)
        throw ConfigError("dataset sizes must be >= 0");
    if (!(cfg.dataset.noise >= 0.0) || cfg.dataset.noise >= 1.0)
        throw ConfigError("dataset.noise must sit in [0,1)");
    if (!(cfg.rules.omission >= 0.0) || cfg.rules.omission >= 1.0)
        throw ConfigError("rules.omission must sit in [0,1)");
    if (cfg.weights.learning_rate <= 0.0 || cfg.weights.epochs < 0)
        throw ConfigError("weights optimizer settings are invalid");
    for (int b : cfg.attack.budgets)
        if (b < 0)
            throw ConfigError("attack budgets must be >= 0");
    if (!(cfg.attack.gamma > 0.0) || !(cfg.attack.gamma < 1.0))
        throw ConfigError("attack.gamma must sit in (0,1)");
    if (!(cfg.identify.delta >= 0.0) || !(cfg.identify.delta <= 1.0))
        throw ConfigError("identify.delta must sit in [0,1]");
    if (cfg.repair.max_passes < 1)
        throw ConfigError("repair.max_passes must be >= 1");
    for (double r : cfg.sweep.ratios)
        if (!(r > 0.0) || !(r <= 1.0))
            throw ConfigError("sweep.ratios must sit in (0,1]");
    if (cfg.sweep.repeats < 1)
        throw ConfigError("sweep.repeats must be >= 1");
}

std::vector<double> read_weights_file(const std::filesystem::path& path, size_t expected) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read weights file " + path.string());
    std::vector<double> w(expected, 0.0);
    std::vector<bool> seen(expected, false);
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ss(line);
        size_t id;
        double value;
        if (!(ss >> id >> value) || id >= expected)
            throw std::runtime_error("bad weights line " + std::to_string(lineNo) + " in " +
                                     path.string());
        w[id] = value;
        seen[id] = true;
    }
    for (size_t i = 0; i < expected; ++i)
        if (!seen[i])
            throw std::runtime_error("weights file misses rule " + std::to_string(i));
    return w;
}

void write_weights_file(const std::filesystem::path& path, std::span<const double> w) {
    std::string text;
    for (size_t i = 0; i < w.size(); ++i) {
        text += std::to_string(i);
        text += ' ';
        text += fmt_shortest(w[i]);
        text += '\n';
    }
    write_text(path, text);
}

std::string eps_label_for_budget(int budget) {
    switch (budget) {
    case 1: return "4";
    case 2: return "8";
    case 3: return "16";
    case 4: return "32";
    default: return "-";
    }
}

Workbench prepare(const ExperimentConfig& cfg) {
    validate_config(cfg);
    Workbench wb;
    int total = cfg.dataset.clean + cfg.dataset.attacked;
    wb.dataset = gen_dataset(cfg.schema.categories, cfg.schema.concepts,
                             cfg.schema.signature_size, total, cfg.dataset.seed);
    apply_concept_predictor(wb.dataset, cfg.dataset.noise, derive_seed(cfg.dataset.seed, 0xb01));
    wb.clean_count = cfg.dataset.clean;

    if (!cfg.rules.path.empty()) {
        std::ifstream in(cfg.rules.path);
        if (!in)
            throw std::runtime_error("cannot read rules file " + cfg.rules.path);
        std::stringstream buf;
        buf << in.rdbuf();
        wb.rules = validate_rules(parse_rules(buf.str()), wb.dataset.schema);
    } else {
        wb.rules = derive_rules(wb.dataset.signatures, cfg.schema.concepts,
                                cfg.rules.omission, cfg.rules.seed);
    }

    if (!cfg.weights.path.empty()) {
        wb.weights = read_weights_file(cfg.weights.path, wb.rules.rules.size());
    } else if (cfg.weights.mode == WeightMode::Prior) {
        wb.weights = prior_weights(wb.rules);
    } else {
        // fit on the benign ground-truth assignments
        std::vector<double> ones(wb.rules.rules.size(), 1.0);
        FactorGraph g = FactorGraph::build(wb.rules, wb.dataset.schema, ones);
        std::vector<Assignment> data;
        data.reserve(wb.dataset.instances.size());
        for (const Instance& inst : wb.dataset.instances)
            data.push_back(Assignment{inst.true_concepts, inst.true_category});
        WeightConfig wc;
        wc.mode = WeightMode::Mle;
        wc.learning_rate = cfg.weights.learning_rate;
        wc.epochs = cfg.weights.epochs;
        wb.weights = mle_fit(g, data, wc).weights;
    }

    wb.graph = FactorGraph::build(wb.rules, wb.dataset.schema, wb.weights);
    wb.predictor = NearestSignaturePredictor(wb.dataset.signatures, cfg.schema.concepts);
    return wb;
}

namespace {

PipelineOptions pipeline_options(const ExperimentConfig& cfg) {
    PipelineOptions opts;
    opts.identify.delta = cfg.identify.delta;
    opts.identify.max_mode = cfg.identify.max_mode;
    opts.repair.max_passes = cfg.repair.max_passes;
    opts.repair_enabled = cfg.repair.enabled;
    return opts;
}

std::vector<std::vector<double>> attack_slice(const Workbench& wb,
                                              const ExperimentConfig& cfg, int budget,
                                              const std::vector<Instance>& slice,
                                              std::vector<int>* achieved_out) {
    std::vector<std::vector<double>> acts(slice.size());
    std::vector<int> achieved(slice.size(), 0);
    uint64_t budgetSeed = derive_seed(cfg.attack.seed, static_cast<uint64_t>(budget));
    parallel_for(slice.size(), cfg.output.workers, [&](size_t i) {
        AttackSpec spec;
        spec.kind = cfg.attack.kind;
        spec.budget = budget;
        spec.gamma = cfg.attack.gamma;
        spec.seed = derive_seed(budgetSeed, i);
        AttackResult res = attack(slice[i], spec, wb.predictor);
        acts[i] = std::move(res.activation);
        achieved[i] = res.achieved;
    });
    if (achieved_out)
        *achieved_out = std::move(achieved);
    return acts;
}

} // namespace

RunReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                         PhaseTimes* times) {
    double t0 = now_s();
    Workbench wb = prepare(cfg);
    double t1 = now_s();

    PipelineOptions opts = pipeline_options(cfg);
    std::vector<Instance> clean = wb.clean_slice();
    std::vector<Instance> target = wb.attacked_slice();

    RunReport report;
    std::string jsonl;
    json reportJson;
    reportJson["config"] = json::parse(config_to_json(cfg));
    json rows = json::array();

    std::string csv =
        "label,budget,eps_analogue,n,flagged,identification_rate,success_rate,"
        "lsm_before,lsm_after,e_acc_before,e_acc_after,p_acc_before,p_acc_after,"
        "mean_gain,mean_achieved\n";

    double attackTime = 0.0;
    double evalTime = 0.0;

    // clean slice: identification only decides, repair still applies to the
    // (rare) flagged ones; passed instances flow through untouched
    if (!clean.empty()) {
        double e0 = now_s();
        RunEvaluation ev = evaluate_run(wb.graph, wb.graph, wb.predictor, clean, {}, opts,
                                        cfg.output.workers);
        evalTime += now_s() - e0;
        report.clean = ev.metrics;
        json row = metrics_json(ev.metrics);
        row["label"] = "clean";
        row["budget"] = 0;
        row["eps_analogue"] = "-";
        rows.push_back(row);
        csv += "clean,0,-,";
        metrics_csv(csv, ev.metrics);
        csv += ",,\n";
        for (size_t i = 0; i < clean.size(); ++i) {
            jsonl += instance_json(clean[i], static_cast<int>(i), "clean").dump();
            jsonl += '\n';
        }
    }

    for (size_t i = 0; i < target.size(); ++i) {
        jsonl += instance_json(target[i], static_cast<int>(i), "attacked").dump();
        jsonl += '\n';
    }

    for (int budget : cfg.attack.budgets) {
        double a0 = now_s();
        std::vector<int> achieved;
        std::vector<std::vector<double>> acts = attack_slice(wb, cfg, budget, target, &achieved);
        attackTime += now_s() - a0;

        double e0 = now_s();
        RunEvaluation ev = evaluate_run(wb.graph, wb.graph, wb.predictor, target, acts, opts,
                                        cfg.output.workers);
        evalTime += now_s() - e0;

        BudgetReport br;
        br.budget = budget;
        br.eps_label = eps_label_for_budget(budget);
        br.metrics = ev.metrics;
        int repaired = 0;
        double gainSum = 0.0;
        double achievedSum = 0.0;
        for (size_t i = 0; i < ev.outcomes.size(); ++i) {
            const InstanceOutcome& out = ev.outcomes[i];
            if (out.flagged && out.applied_interventions > 0) {
                ++repaired;
                gainSum += out.satisfaction_after - out.satisfaction_before;
            }
            achievedSum += achieved[i];
            json rec;
            rec["kind"] = "attacked";
            rec["id"] = static_cast<int>(i);
            rec["budget"] = budget;
            rec["activation"] = acts[i];
            rec["achieved"] = achieved[i];
            rec["flagged"] = out.flagged;
            rec["ratio"] = out.ratio;
            rec["rectified"] = out.rectified;
            rec["repredicted"] = out.repredicted;
            rec["applied"] = out.applied_interventions;
            jsonl += rec.dump();
            jsonl += '\n';
        }
        br.mean_gain = repaired > 0 ? gainSum / repaired : 0.0;
        br.mean_achieved =
            target.empty() ? 0.0 : achievedSum / static_cast<double>(target.size());

        json row = metrics_json(ev.metrics);
        row["label"] = "B=" + std::to_string(budget);
        row["budget"] = budget;
        row["eps_analogue"] = br.eps_label;
        row["mean_gain"] = br.mean_gain;
        row["mean_achieved"] = br.mean_achieved;
        rows.push_back(row);

        csv += "B=" + std::to_string(budget) + ',' + std::to_string(budget) + ',' +
               br.eps_label + ',';
        metrics_csv(csv, ev.metrics);
        csv += ',' + fmt6(br.mean_gain) + ',' + fmt6(br.mean_achieved) + '\n';

        report.budgets.push_back(std::move(br));
    }

    reportJson["rows"] = rows;

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text(out_dir / "report.csv", csv);
        write_text(out_dir / "report.json", reportJson.dump(2) + "\n");
        write_text(out_dir / "instances.jsonl", jsonl);
        write_text(out_dir / "rules.rules", format_rules(wb.rules));
        write_weights_file(out_dir / "weights.txt", wb.weights);
    }

    if (times) {
        times->prepare_s = t1 - t0;
        times->attack_s = attackTime;
        times->evaluate_s = evalTime;
        times->total_s = now_s() - t0;
    }
    return report;
}

std::string cmd_gen(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    Workbench wb = prepare(cfg);

    int categoryRules = 0;
    int conceptRules = 0;
    for (const Rule& r : wb.rules.rules)
        (r.family == RuleFamily::CategoryConcept ? categoryRules : conceptRules) += 1;

    std::string jsonl;
    for (size_t i = 0; i < wb.dataset.instances.size(); ++i) {
        const char* slice = static_cast<int>(i) < cfg.dataset.clean ? "clean" : "attacked";
        jsonl += instance_json(wb.dataset.instances[i], static_cast<int>(i), slice).dump();
        jsonl += '\n';
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text(out_dir / "instances.jsonl", jsonl);
        write_text(out_dir / "rules.rules", format_rules(wb.rules));
        write_weights_file(out_dir / "weights.txt", wb.weights);
        json sigs = json::array();
        for (const CategorySignature& s : wb.dataset.signatures)
            sigs.push_back({{"category", s.category}, {"concepts", s.concepts}});
        write_text(out_dir / "signatures.json", sigs.dump(2) + "\n");
    }

    std::ostringstream summary;
    summary << "dataset          | value\n";
    summary << "instances        | " << wb.dataset.instances.size() << "\n";
    summary << "categories       | " << cfg.schema.categories << "\n";
    summary << "concepts         | " << cfg.schema.concepts << "\n";
    summary << "category-concept | " << categoryRules << "\n";
    summary << "concept-concept  | " << conceptRules << "\n";
    summary << "logical factors  | " << wb.rules.rules.size() << "\n";
    summary << "variables        | " << (cfg.schema.categories + cfg.schema.concepts) << "\n";
    return summary.str();
}

FitResult cmd_learn_weights(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    Workbench wb = prepare(cfg);
    std::vector<double> ones(wb.rules.rules.size(), 1.0);
    FactorGraph g = FactorGraph::build(wb.rules, wb.dataset.schema, ones);
    std::vector<Assignment> data;
    data.reserve(wb.dataset.instances.size());
    for (const Instance& inst : wb.dataset.instances)
        data.push_back(Assignment{inst.true_concepts, inst.true_category});
    WeightConfig wc;
    wc.mode = WeightMode::Mle;
    wc.learning_rate = cfg.weights.learning_rate;
    wc.epochs = cfg.weights.epochs;
    FitResult fit = mle_fit(g, data, wc);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_weights_file(out_dir / "weights.txt", fit.weights);
    }
    return fit;
}

BoundsReport cmd_bounds(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                        int n_sweep) {
    Workbench wb = prepare(cfg);
    if (cfg.attack.budgets.empty())
        throw ConfigError("bounds need at least one attack budget");
    int budget = cfg.attack.budgets.front();
    PipelineOptions opts = pipeline_options(cfg);

    std::vector<Instance> target = wb.attacked_slice();
    if (target.empty())
        throw ConfigError("bounds need a nonempty attacked slice");
    std::vector<std::vector<double>> acts = attack_slice(wb, cfg, budget, target, nullptr);

    // characteristics on the attacked, unrepaired explanations
    std::vector<CharSample> samples;
    samples.reserve(target.size());
    for (size_t i = 0; i < target.size(); ++i) {
        CharSample s;
        s.truth = target[i].true_concepts;
        s.activation = acts[i];
        s.predicted = target[i].predicted_category;
        samples.push_back(std::move(s));
    }
    CharacteristicsReport chars = estimate_characteristics(wb.graph, samples);

    RunEvaluation ev =
        evaluate_run(wb.graph, wb.graph, wb.predictor, target, acts, opts, cfg.output.workers);
    double accSum = 0.0;
    for (size_t i = 0; i < target.size(); ++i) {
        const std::vector<double>& rect = ev.outcomes[i].rectified;
        int match = 0;
        for (size_t j = 0; j < rect.size(); ++j) {
            uint8_t bit = rect[j] > 0.5 ? 1 : 0;
            match += bit == target[i].true_concepts[j];
        }
        accSum += static_cast<double>(match) / static_cast<double>(rect.size());
    }

    BoundsReport rep;
    rep.n_factors = wb.graph.num_factors();
    rep.budget = budget;
    rep.theta_T = chars.theta_T;
    rep.theta_F = chars.theta_F;
    rep.empirical_concept_acc = accSum / static_cast<double>(target.size());
    rep.assumption_ok = chars.theta_T && chars.theta_F && *chars.theta_T > *chars.theta_F;

    double thetaT = chars.theta_T.value_or(0.0);
    double thetaF = chars.theta_F.value_or(0.0);
    for (int n = 0; n <= n_sweep; ++n)
        rep.bound_by_n.push_back(theorem2_bound(n, thetaT, thetaF));

    // Lemma 2 / Theorem 1 under the deterministic-band reading (L = U at the
    // pooled rates); characteristic degeneracies surface as domain notes.
    try {
        CharacteristicBands bands;
        if (!chars.theta_T || !chars.pooled_T_N)
            throw BoundDomainError("missing pooled characteristics");
        bands.T_P = *chars.theta_T;
        bands.F_N = chars.pooled_F_N.value_or(1.0 - bands.T_P);
        bands.T_N = *chars.pooled_T_N;
        bands.F_P = chars.theta_F.value_or(1.0 - bands.T_N);
        bands.L_T_P = bands.U_T_P = bands.T_P;
        bands.L_T_N = bands.U_T_N = bands.T_N;
        bands.L_F_P = bands.U_F_P = bands.F_P;
        bands.L_F_N = bands.U_F_N = bands.F_N;
        double L1 = lemma2_lower_bound(bands, 1);
        double L0 = lemma2_lower_bound(bands, 0);
        rep.lemma2_note = "c=1: " + fmt6(L1) + ", c=0: " + fmt6(L0);
        double tau = tau_characteristic(bands.U_T_P, bands.L_F_P);
        std::vector<double> taus(static_cast<size_t>(rep.n_factors), tau);
        std::vector<double> Ls(static_cast<size_t>(wb.graph.num_concepts()),
                               std::min(L0, L1));
        rep.theorem1_note = fmt6(theorem1_bound(Ls, taus));
    } catch (const BoundDomainError& e) {
        if (rep.lemma2_note.empty())
            rep.lemma2_note = std::string("domain error: ") + e.what();
        rep.theorem1_note = std::string("domain error: ") + e.what();
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::string csv = "n_factors,bound,assumption_ok,empirical,empirical_ge_bound\n";
        for (int n = 0; n < static_cast<int>(rep.bound_by_n.size()); ++n) {
            double bound = rep.bound_by_n[static_cast<size_t>(n)];
            csv += std::to_string(n) + ',' + fmt6(bound) + ',' +
                   (rep.assumption_ok ? "1" : "0") + ',' + fmt6(rep.empirical_concept_acc) +
                   ',' + (rep.empirical_concept_acc >= bound ? "1" : "0") + '\n';
        }
        write_text(out_dir / "bounds.csv", csv);

        json j;
        j["config"] = json::parse(config_to_json(cfg));
        j["n_factors"] = rep.n_factors;
        j["budget"] = rep.budget;
        if (rep.theta_T)
            j["theta_T"] = *rep.theta_T;
        if (rep.theta_F)
            j["theta_F"] = *rep.theta_F;
        j["assumption_ok"] = rep.assumption_ok;
        j["empirical_concept_acc"] = rep.empirical_concept_acc;
        j["bound_by_n"] = rep.bound_by_n;
        j["lemma2"] = rep.lemma2_note;
        j["theorem1"] = rep.theorem1_note;
        write_text(out_dir / "bounds.json", j.dump(2) + "\n");
    }
    return rep;
}

std::vector<SweepRow> cmd_sweep(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir) {
    Workbench wb = prepare(cfg);
    if (cfg.attack.budgets.empty())
        throw ConfigError("sweep needs at least one attack budget");
    int budget = cfg.attack.budgets.back(); // strongest configured attack
    std::vector<Instance> target = wb.attacked_slice();
    std::vector<std::vector<double>> acts = attack_slice(wb, cfg, budget, target, nullptr);

    SweepConfig sc;
    sc.ratios = cfg.sweep.ratios;
    sc.families = cfg.sweep.families;
    sc.repeats = cfg.sweep.repeats;
    sc.seed = cfg.sweep.seed;

    std::vector<SweepRow> rows =
        sweep_and_ablation(wb.rules, wb.dataset.schema, wb.weights, wb.predictor, target, acts,
                           pipeline_options(cfg), sc, cfg.output.workers);

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::string csv =
            "family,ratio,repeat,factors_used,n,flagged,identification_rate,success_rate,"
            "lsm_before,lsm_after,e_acc_before,e_acc_after,p_acc_before,p_acc_after\n";
        json jrows = json::array();
        for (const SweepRow& row : rows) {
            csv += family_filter_name(row.family) + ',' + fmt6(row.ratio) + ',' +
                   std::to_string(row.repeat) + ',' + std::to_string(row.factors_used) + ',';
            metrics_csv(csv, row.metrics);
            csv += '\n';
            json j = metrics_json(row.metrics);
            j["family"] = family_filter_name(row.family);
            j["ratio"] = row.ratio;
            j["repeat"] = row.repeat;
            j["factors_used"] = row.factors_used;
            jrows.push_back(j);
        }
        write_text(out_dir / "sweep.csv", csv);
        json j;
        j["config"] = json::parse(config_to_json(cfg));
        j["budget"] = budget;
        j["rows"] = jrows;
        write_text(out_dir / "sweep.json", j.dump(2) + "\n");
    }
    return rows;
}

} // namespace conceptguard
