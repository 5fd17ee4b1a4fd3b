// python facade over the pipeline: build a world from a JSON config, then
// predict / identify / attack / repair individual activations or run whole
// experiments into an output directory.
#include "conceptguard/experiment.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

namespace py = pybind11;
using namespace conceptguard;

namespace {

class Pipeline {
public:
    explicit Pipeline(const std::string& config_json) {
        cfg_ = config_json.empty() ? ExperimentConfig{} : parse_config(config_json);
        validate_config(cfg_);
        wb_ = prepare(cfg_);
        opts_.identify.delta = cfg_.identify.delta;
        opts_.identify.max_mode = cfg_.identify.max_mode;
        opts_.repair.max_passes = cfg_.repair.max_passes;
        opts_.repair_enabled = cfg_.repair.enabled;
    }

    std::string config_json() const { return config_to_json(cfg_); }
    int num_concepts() const { return wb_.graph.num_concepts(); }
    int num_categories() const { return wb_.graph.num_categories(); }
    int num_factors() const { return wb_.graph.num_factors(); }
    size_t num_instances() const { return wb_.dataset.instances.size(); }
    std::string rules_text() const { return format_rules(wb_.rules); }
    std::vector<double> weights() const { return wb_.weights; }

    py::dict instance(size_t i) const {
        const Instance& inst = wb_.dataset.instances.at(i);
        py::dict d;
        d["activation"] = inst.activation;
        d["true_concepts"] = inst.true_concepts;
        d["true_category"] = inst.true_category;
        d["predicted"] = inst.predicted_category;
        return d;
    }

    int predict(const std::vector<double>& activation) const {
        Assignment a = binarize(activation, 0, wb_.graph.schema());
        return wb_.predictor.predict(a.concepts);
    }

    py::dict identify_one(const std::vector<double>& activation, int predicted) const {
        Assignment a = binarize(activation, predicted, wb_.graph.schema());
        IdentifyReport rep = identify(wb_.graph, a, opts_.identify);
        py::dict d;
        d["flagged"] = rep.verdict == Verdict::LogicError;
        d["ratio"] = rep.ratio;
        d["lsm"] = rep.lsm;
        d["satisfaction"] = rep.satisfaction;
        d["max_satisfaction"] = rep.max_satisfaction;
        return d;
    }

    py::dict repair_one(const std::vector<double>& activation, int predicted) const {
        InterventionPlan plan = repair(wb_.graph, activation, predicted, opts_.repair);
        py::dict d;
        d["rectified"] = plan.rectified;
        d["mask"] = plan.mask;
        d["z"] = plan.z;
        d["satisfaction_before"] = plan.satisfaction_before;
        d["satisfaction_after"] = plan.satisfaction_after;
        py::list applied;
        for (const InterventionCase& c : plan.applied) {
            py::dict e;
            e["factor"] = c.factor_id;
            e["flip_concepts"] = c.flip_concepts;
            e["gain"] = c.gain;
            applied.append(e);
        }
        d["applied"] = applied;
        return d;
    }

    py::dict attack_one(size_t index, int budget, uint64_t seed) const {
        AttackSpec spec;
        spec.kind = cfg_.attack.kind;
        spec.budget = budget;
        spec.gamma = cfg_.attack.gamma;
        spec.seed = seed;
        AttackResult res = attack(wb_.dataset.instances.at(index), spec, wb_.predictor);
        py::dict d;
        d["activation"] = res.activation;
        d["achieved"] = res.achieved;
        d["altered"] = res.altered;
        return d;
    }

private:
    ExperimentConfig cfg_;
    Workbench wb_;
    PipelineOptions opts_;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "logic-guided detection and repair of concept explanations";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<RuleError>(m, "RuleError", PyExc_ValueError);

    m.def("default_config", [] { return config_to_json(ExperimentConfig{}); },
          "default experiment config as pretty-printed JSON");

    m.def("canonicalize_rules",
          [](const std::string& text) { return format_rules(parse_rules(text)); },
          py::arg("text"), "parse rule text and print it back in canonical form");

    m.def(
        "run_experiment",
        [](const std::string& config_json, const std::string& out_dir) {
            ExperimentConfig cfg =
                config_json.empty() ? ExperimentConfig{} : parse_config(config_json);
            RunReport rep = run_experiment(cfg, out_dir);
            py::dict d;
            d["clean_lsm"] = rep.clean.lsm_before;
            d["clean_success_rate"] = rep.clean.success_rate
                                          ? py::cast(*rep.clean.success_rate)
                                          : py::none().cast<py::object>();
            py::list budgets;
            for (const BudgetReport& br : rep.budgets) {
                py::dict row;
                row["budget"] = br.budget;
                row["eps"] = br.eps_label;
                row["identification_rate"] =
                    br.metrics.identification_rate
                        ? py::cast(*br.metrics.identification_rate)
                        : py::none().cast<py::object>();
                row["e_acc_before"] = br.metrics.e_acc_before;
                row["e_acc_after"] = br.metrics.e_acc_after;
                row["p_acc_before"] = br.metrics.p_acc_before;
                row["p_acc_after"] = br.metrics.p_acc_after;
                budgets.append(row);
            }
            d["budgets"] = budgets;
            return d;
        },
        py::arg("config_json") = std::string(), py::arg("out_dir") = std::string(),
        "full pipeline run; writes reports when out_dir is nonempty");

    py::class_<Pipeline>(m, "Pipeline")
        .def(py::init<const std::string&>(), py::arg("config_json") = std::string())
        .def_property_readonly("num_concepts", &Pipeline::num_concepts)
        .def_property_readonly("num_categories", &Pipeline::num_categories)
        .def_property_readonly("num_factors", &Pipeline::num_factors)
        .def_property_readonly("num_instances", &Pipeline::num_instances)
        .def("config_json", &Pipeline::config_json)
        .def("rules_text", &Pipeline::rules_text)
        .def("weights", &Pipeline::weights)
        .def("instance", &Pipeline::instance, py::arg("index"))
        .def("predict", &Pipeline::predict, py::arg("activation"))
        .def("identify", &Pipeline::identify_one, py::arg("activation"), py::arg("predicted"))
        .def("repair", &Pipeline::repair_one, py::arg("activation"), py::arg("predicted"))
        .def("attack", &Pipeline::attack_one, py::arg("index"), py::arg("budget"),
             py::arg("seed"));
}
