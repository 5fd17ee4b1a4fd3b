#include "conceptguard/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace conceptguard {

namespace {

// Applies fn(S) to the satisfaction score of every concept assignment under
// the fixed category. Factor potentials are table lookups over local bits.
template <class Fn>
void for_each_assignment_score(const FactorGraph& g, int category, Fn&& fn) {
    int m = g.num_concepts();
    Assignment a;
    a.concepts.assign(static_cast<size_t>(m), 0);
    a.category = category;
    uint64_t count = 1ull << m;
    for (uint64_t mask = 0; mask < count; ++mask) {
        for (int j = 0; j < m; ++j)
            a.concepts[static_cast<size_t>(j)] = static_cast<uint8_t>((mask >> j) & 1u);
        double s = 0.0;
        for (const Factor& f : g.factors()) {
            if (g.evaluate_potential(f.id, a))
                s += f.weight;
        }
        fn(s);
    }
}

void check_cap(const FactorGraph& g) {
    if (g.num_concepts() > kEnumerationCap)
        throw EnumerationCapExceeded("exact enumeration over " +
                                     std::to_string(g.num_concepts()) +
                                     " concepts exceeds the cap of " +
                                     std::to_string(kEnumerationCap));
}

void check_category(const FactorGraph& g, int category) {
    if (category < 0 || category >= g.num_categories())
        throw std::invalid_argument("category " + std::to_string(category) + " outside schema");
}

} // namespace

double satisfaction_weight(const FactorGraph& g, const Assignment& a) {
    double s = 0.0;
    for (const Factor& f : g.factors()) {
        if (g.evaluate_potential(f.id, a))
            s += f.weight;
    }
    return s;
}

double log_partition(const FactorGraph& g, int category) {
    check_cap(g);
    check_category(g, category);
    // log-sum-exp with running maximum to stay finite for any weights
    double maxScore = -std::numeric_limits<double>::infinity();
    std::vector<double> scores;
    scores.reserve(1ull << g.num_concepts());
    for_each_assignment_score(g, category, [&](double s) {
        scores.push_back(s);
        maxScore = std::max(maxScore, s);
    });
    double acc = 0.0;
    for (double s : scores)
        acc += std::exp(s - maxScore);
    return maxScore + std::log(acc);
}

double conditional_probability(const FactorGraph& g, const Assignment& a) {
    double s = satisfaction_weight(g, a);
    return std::exp(s - log_partition(g, a.category));
}

double max_satisfaction(const FactorGraph& g, int category, MaxMode mode) {
    if (mode == MaxMode::AllSatisfied)
        return g.total_weight();
    check_cap(g);
    check_category(g, category);
    double best = -std::numeric_limits<double>::infinity();
    for_each_assignment_score(g, category, [&](double s) { best = std::max(best, s); });
    return best;
}

double instance_lsm(const FactorGraph& g, const Assignment& a) {
    return std::exp(satisfaction_weight(g, a) - g.total_weight());
}

IdentifyReport identify(const FactorGraph& g, const Assignment& a, const IdentifyOptions& opts) {
    if (!(opts.delta >= 0.0) || !(opts.delta <= 1.0))
        throw std::invalid_argument("identification threshold outside [0,1]");
    IdentifyReport rep;
    rep.satisfaction = satisfaction_weight(g, a);
    rep.max_satisfaction = max_satisfaction(g, a.category, opts.max_mode);
    rep.ratio = std::exp(rep.satisfaction - rep.max_satisfaction);
    rep.lsm = std::exp(rep.satisfaction - g.total_weight());
    rep.verdict = rep.ratio >= opts.delta ? Verdict::Comprehensible : Verdict::LogicError;
    return rep;
}

} // namespace conceptguard
