#include "conceptguard/factor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conceptguard {

namespace {

uint16_t compile_truth(const Formula& f, const std::vector<VarRef>& vars) {
    uint16_t table = 0;
    for (uint32_t mask = 0; mask < (1u << vars.size()); ++mask) {
        bool val = eval_formula(f, [&](VarRef v) {
            size_t at = std::lower_bound(vars.begin(), vars.end(), v) - vars.begin();
            return (mask >> at) & 1u;
        });
        if (val)
            table |= static_cast<uint16_t>(1u << mask);
    }
    return table;
}

} // namespace

FactorGraph FactorGraph::build(const RuleSet& rules, const RuleSchema& schema,
                               std::span<const double> weights) {
    if (weights.size() != rules.rules.size())
        throw std::invalid_argument("weight count " + std::to_string(weights.size()) +
                                    " does not match rule count " +
                                    std::to_string(rules.rules.size()));
    FactorGraph g;
    g.schema_ = schema;
    g.concept_index_.resize(static_cast<size_t>(schema.num_concepts));
    g.category_index_.resize(static_cast<size_t>(schema.num_categories));

    for (size_t i = 0; i < rules.rules.size(); ++i) {
        const Rule& rule = rules.rules[i];
        double w = weights[i];
        if (!std::isfinite(w) || w < 0.0 || w > 1.0)
            throw std::invalid_argument("weight for rule " + std::to_string(rule.id) +
                                        " outside [0,1]");
        Factor f;
        f.id = static_cast<int>(i);
        f.formula = rule.formula;
        f.family = rule.family;
        f.weight = w;
        f.vars = formula_vars(*rule.formula);
        if (f.vars.size() > 4)
            throw std::invalid_argument("rule " + std::to_string(rule.id) +
                                        " arity exceeds 4; validate rules first");
        for (VarRef v : f.vars) {
            int limit = v.kind == VarKind::Concept ? schema.num_concepts : schema.num_categories;
            if (v.index < 0 || v.index >= limit)
                throw std::invalid_argument("rule " + std::to_string(rule.id) +
                                            " references a variable outside the schema");
            if (v.kind == VarKind::Concept) {
                f.concept_vars.push_back(v.index);
                g.concept_index_[static_cast<size_t>(v.index)].push_back(f.id);
            } else {
                g.category_index_[static_cast<size_t>(v.index)].push_back(f.id);
            }
        }
        f.truth = compile_truth(*rule.formula, f.vars);
        g.total_weight_ += w;
        g.factors_.push_back(std::move(f));
    }

    // neighbor lists: union of the per-variable incidence lists plus self
    g.neighbors_.resize(g.factors_.size());
    for (const Factor& f : g.factors_) {
        std::vector<int>& nb = g.neighbors_[static_cast<size_t>(f.id)];
        nb.push_back(f.id);
        for (VarRef v : f.vars) {
            const auto& incident = v.kind == VarKind::Concept
                                       ? g.concept_index_[static_cast<size_t>(v.index)]
                                       : g.category_index_[static_cast<size_t>(v.index)];
            nb.insert(nb.end(), incident.begin(), incident.end());
        }
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return g;
}

bool FactorGraph::evaluate_potential(int factor_id, const Assignment& a) const {
    const Factor& f = factors_[static_cast<size_t>(factor_id)];
    uint32_t local = 0;
    for (size_t i = 0; i < f.vars.size(); ++i) {
        if (a.value(f.vars[i]))
            local |= 1u << i;
    }
    return (f.truth >> local) & 1u;
}

Assignment binarize(std::span<const double> activation, int predicted_category,
                    const RuleSchema& schema) {
    if (static_cast<int>(activation.size()) != schema.num_concepts)
        throw std::invalid_argument("activation length " + std::to_string(activation.size()) +
                                    " does not match concept count " +
                                    std::to_string(schema.num_concepts));
    if (predicted_category < 0 || predicted_category >= schema.num_categories)
        throw std::invalid_argument("predicted category " + std::to_string(predicted_category) +
                                    " outside schema");
    Assignment a;
    a.concepts.resize(activation.size());
    for (size_t j = 0; j < activation.size(); ++j) {
        double v = activation[j];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw std::invalid_argument("activation " + std::to_string(j) + " outside [0,1]");
        a.concepts[j] = v > 0.5 ? 1 : 0;
    }
    a.category = predicted_category;
    return a;
}

} // namespace conceptguard
