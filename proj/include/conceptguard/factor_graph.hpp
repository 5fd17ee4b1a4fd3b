#pragma once

#include "conceptguard/rules.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace conceptguard {

// Joint assignment: one bit per concept slot plus the index of the single
// active category slot (the categorical block is one-hot by construction).
struct Assignment {
    std::vector<uint8_t> concepts;
    int category = 0;

    bool value(VarRef v) const {
        if (v.kind == VarKind::Concept)
            return concepts[static_cast<size_t>(v.index)] != 0;
        return v.index == category;
    }
};

// One weighted rule grounded into the graph. The potential is the 0/1 truth
// value of the formula; it is precompiled into a truth table over the
// factor's own variables so evaluation is a table lookup.
struct Factor {
    int id = 0;
    FormulaPtr formula;
    RuleFamily family = RuleFamily::ConceptConcept;
    double weight = 1.0;
    std::vector<VarRef> vars;         // distinct, sorted
    std::vector<int> concept_vars;    // concept indices only (intervention scope)
    uint16_t truth = 0;               // bit s = potential under local assignment s
};

class FactorGraph {
public:
    // weights must align with rule ids; every weight in [0,1]. Rules are
    // expected to be validated (arity <= 4, indices inside the schema).
    static FactorGraph build(const RuleSet& rules, const RuleSchema& schema,
                             std::span<const double> weights);

    int num_concepts() const { return schema_.num_concepts; }
    int num_categories() const { return schema_.num_categories; }
    int num_factors() const { return static_cast<int>(factors_.size()); }
    int num_variables() const { return schema_.num_concepts + schema_.num_categories; }

    const RuleSchema& schema() const { return schema_; }
    const Factor& factor(int id) const { return factors_[static_cast<size_t>(id)]; }
    const std::vector<Factor>& factors() const { return factors_; }

    double total_weight() const { return total_weight_; }

    bool evaluate_potential(int factor_id, const Assignment& a) const;

    // Factors sharing at least one variable with factor_id, plus the factor
    // itself. Sorted by id.
    const std::vector<int>& neighbor_factors(int factor_id) const {
        return neighbors_[static_cast<size_t>(factor_id)];
    }

    // Factors incident to a concept slot.
    const std::vector<int>& factors_of_concept(int concept_index) const {
        return concept_index_[static_cast<size_t>(concept_index)];
    }

    // Factors incident to a category slot.
    const std::vector<int>& factors_of_category(int category_index) const {
        return category_index_[static_cast<size_t>(category_index)];
    }

private:
    RuleSchema schema_;
    std::vector<Factor> factors_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<std::vector<int>> concept_index_;
    std::vector<std::vector<int>> category_index_;
    double total_weight_ = 0.0;
};

// Threshold concept activations at 0.5 (strictly greater means active) and
// attach the predicted category. Activations outside [0,1] signal an
// upstream bug and are rejected.
Assignment binarize(std::span<const double> activation, int predicted_category,
                    const RuleSchema& schema);

} // namespace conceptguard
