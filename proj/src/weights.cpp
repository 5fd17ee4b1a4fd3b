#include "conceptguard/weights.hpp"

#include "conceptguard/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace conceptguard {

std::vector<double> prior_weights(const RuleSet& rules) {
    std::vector<double> w;
    w.reserve(rules.rules.size());
    for (const Rule& rule : rules.rules) {
        if (!rule.confidence)
            throw std::invalid_argument("rule " + std::to_string(rule.id) +
                                        " has no confidence; prior weighting needs one");
        w.push_back(*rule.confidence);
    }
    return w;
}

namespace {

struct CategoryStats {
    double log_partition = 0.0;
    std::vector<double> expected; // E[psi_i | category]
};

// Exact expectation by enumerating concept assignments under the category.
CategoryStats category_stats(const FactorGraph& g, int category, std::span<const double> w) {
    if (g.num_concepts() > kEnumerationCap)
        throw EnumerationCapExceeded("likelihood enumeration over " +
                                     std::to_string(g.num_concepts()) +
                                     " concepts exceeds the cap of " +
                                     std::to_string(kEnumerationCap));
    int m = g.num_concepts();
    int n = g.num_factors();
    uint64_t count = 1ull << m;

    Assignment a;
    a.concepts.assign(static_cast<size_t>(m), 0);
    a.category = category;

    std::vector<double> scores(count, 0.0);
    double maxScore = -std::numeric_limits<double>::infinity();
    for (uint64_t mask = 0; mask < count; ++mask) {
        for (int j = 0; j < m; ++j)
            a.concepts[static_cast<size_t>(j)] = static_cast<uint8_t>((mask >> j) & 1u);
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            if (g.evaluate_potential(i, a))
                s += w[static_cast<size_t>(i)];
        }
        scores[mask] = s;
        maxScore = std::max(maxScore, s);
    }
    double z = 0.0;
    for (double s : scores)
        z += std::exp(s - maxScore);

    CategoryStats stats;
    stats.log_partition = maxScore + std::log(z);
    stats.expected.assign(static_cast<size_t>(n), 0.0);
    for (uint64_t mask = 0; mask < count; ++mask) {
        for (int j = 0; j < m; ++j)
            a.concepts[static_cast<size_t>(j)] = static_cast<uint8_t>((mask >> j) & 1u);
        double p = std::exp(scores[mask] - stats.log_partition);
        for (int i = 0; i < n; ++i) {
            if (g.evaluate_potential(i, a))
                stats.expected[static_cast<size_t>(i)] += p;
        }
    }
    return stats;
}

} // namespace

NllGrad nll_and_gradient(const FactorGraph& g, const std::vector<Assignment>& data,
                         std::span<const double> w) {
    if (static_cast<int>(w.size()) != g.num_factors())
        throw std::invalid_argument("weight vector length does not match factor count");
    if (data.empty())
        throw std::invalid_argument("empty dataset");

    std::map<int, CategoryStats> cache;
    NllGrad out;
    out.grad.assign(w.size(), 0.0);
    for (const Assignment& sample : data) {
        if (static_cast<int>(sample.concepts.size()) != g.num_concepts() ||
            sample.category < 0 || sample.category >= g.num_categories())
            throw std::invalid_argument("sample does not match the graph schema");
        auto it = cache.find(sample.category);
        if (it == cache.end())
            it = cache.emplace(sample.category, category_stats(g, sample.category, w)).first;
        const CategoryStats& stats = it->second;

        double s = 0.0;
        for (int i = 0; i < g.num_factors(); ++i) {
            bool sat = g.evaluate_potential(i, sample);
            if (sat)
                s += w[static_cast<size_t>(i)];
            out.grad[static_cast<size_t>(i)] +=
                stats.expected[static_cast<size_t>(i)] - (sat ? 1.0 : 0.0);
        }
        out.nll += stats.log_partition - s;
    }
    return out;
}

FitResult mle_fit(const FactorGraph& g, const std::vector<Assignment>& data,
                  const WeightConfig& cfg) {
    if (cfg.learning_rate <= 0.0 || cfg.epochs < 0)
        throw std::invalid_argument("bad optimizer settings");
    if (!(cfg.clamp_lo <= cfg.clamp_hi) || cfg.clamp_lo < 0.0 || cfg.clamp_hi > 1.0)
        throw std::invalid_argument("clamp range must sit inside [0,1]");

    auto clamp = [&](double v) { return std::clamp(v, cfg.clamp_lo, cfg.clamp_hi); };
    std::vector<double> w(static_cast<size_t>(g.num_factors()), clamp(cfg.init));

    FitResult best;
    best.weights = w;
    best.nll = nll_and_gradient(g, data, w).nll;
    if (!std::isfinite(best.nll))
        throw std::runtime_error("non-finite likelihood at the initial weights");

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        NllGrad eval = nll_and_gradient(g, data, w);
        if (!std::isfinite(eval.nll))
            throw std::runtime_error("non-finite likelihood at epoch " + std::to_string(epoch));
        if (eval.nll < best.nll) {
            best.nll = eval.nll;
            best.weights = w;
        }
        for (size_t i = 0; i < w.size(); ++i)
            w[i] = clamp(w[i] - cfg.learning_rate * eval.grad[i]);
        best.epochs_run = epoch + 1;
    }
    // the last step may have improved on everything seen so far
    double finalNll = nll_and_gradient(g, data, w).nll;
    if (std::isfinite(finalNll) && finalNll < best.nll) {
        best.nll = finalNll;
        best.weights = w;
    }
    return best;
}

} // namespace conceptguard
