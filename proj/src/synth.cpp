#include "conceptguard/synth.hpp"

#include "conceptguard/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace conceptguard {

namespace {

// C(m, k) with saturation; only used for feasibility checks.
uint64_t choose(int m, int k) {
    if (k < 0 || k > m)
        return 0;
    uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        double next = static_cast<double>(r) * (m - k + i) / i;
        if (next > 1e18)
            return UINT64_MAX;
        r = r * static_cast<uint64_t>(m - k + i) / static_cast<uint64_t>(i);
    }
    return r;
}

std::vector<int> sample_subset(Rng& rng, int m, int k) {
    // partial Fisher-Yates over 0..m-1
    std::vector<int> pool(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        pool[static_cast<size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
        int j = i + rng.index(m - i);
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
    }
    std::vector<int> out(pool.begin(), pool.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

SynthDataset gen_dataset(int num_categories, int num_concepts, int signature_size,
                         int n_instances, uint64_t seed) {
    if (num_categories < 1 || num_concepts < 1 || signature_size < 1 ||
        signature_size > num_concepts || n_instances < 0)
        throw std::invalid_argument("bad synthetic dataset shape");
    if (choose(num_concepts, signature_size) < static_cast<uint64_t>(num_categories))
        throw std::invalid_argument("cannot draw " + std::to_string(num_categories) +
                                    " distinct signatures of size " +
                                    std::to_string(signature_size) + " from " +
                                    std::to_string(num_concepts) + " concepts");

    SynthDataset ds;
    ds.schema.num_concepts = num_concepts;
    ds.schema.num_categories = num_categories;

    Rng rng(derive_seed(seed, 0x5167));
    std::set<std::vector<int>> seen;
    while (static_cast<int>(ds.signatures.size()) < num_categories) {
        std::vector<int> s = sample_subset(rng, num_concepts, signature_size);
        if (!seen.insert(s).second)
            continue;
        CategorySignature sig;
        sig.category = static_cast<int>(ds.signatures.size());
        sig.concepts = std::move(s);
        ds.signatures.push_back(std::move(sig));
    }

    Rng labelRng(derive_seed(seed, 0x1b57));
    ds.instances.reserve(static_cast<size_t>(n_instances));
    for (int i = 0; i < n_instances; ++i) {
        Instance inst;
        inst.true_category = labelRng.index(num_categories);
        inst.true_concepts.assign(static_cast<size_t>(num_concepts), 0);
        for (int c : ds.signatures[static_cast<size_t>(inst.true_category)].concepts)
            inst.true_concepts[static_cast<size_t>(c)] = 1;
        inst.activation.assign(inst.true_concepts.begin(), inst.true_concepts.end());
        inst.predicted_category =
            predict_category(inst.activation, ds.signatures, num_concepts);
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

std::vector<double> simulate_concept_predictor(std::span<const uint8_t> true_concepts,
                                               double eta, uint64_t seed) {
    if (!(eta >= 0.0) || eta >= 1.0)
        throw std::invalid_argument("noise level must sit in [0,1)");
    Rng rng(seed);
    std::vector<double> out(true_concepts.size());
    for (size_t j = 0; j < true_concepts.size(); ++j) {
        double u = rng.uniform(-eta, eta);
        out[j] = std::clamp(static_cast<double>(true_concepts[j]) + u, 0.0, 1.0);
    }
    return out;
}

void apply_concept_predictor(SynthDataset& ds, double eta, uint64_t seed) {
    for (size_t i = 0; i < ds.instances.size(); ++i) {
        Instance& inst = ds.instances[i];
        inst.activation =
            simulate_concept_predictor(inst.true_concepts, eta, derive_seed(seed, i));
        inst.predicted_category =
            predict_category(inst.activation, ds.signatures, ds.schema.num_concepts);
    }
}

NearestSignaturePredictor::NearestSignaturePredictor(
    const std::vector<CategorySignature>& signatures, int num_concepts) {
    indicators.resize(signatures.size());
    for (size_t s = 0; s < signatures.size(); ++s) {
        indicators[s].assign(static_cast<size_t>(num_concepts), 0);
        for (int c : signatures[s].concepts)
            indicators[s][static_cast<size_t>(c)] = 1;
    }
}

int NearestSignaturePredictor::predict(std::span<const uint8_t> bits) const {
    int best = -1;
    int bestDist = INT32_MAX;
    for (size_t s = 0; s < indicators.size(); ++s) {
        int d = 0;
        for (size_t j = 0; j < bits.size(); ++j)
            d += bits[j] != indicators[s][j];
        if (d < bestDist) {
            bestDist = d;
            best = static_cast<int>(s);
        }
    }
    return best;
}

int NearestSignaturePredictor::margin(std::span<const uint8_t> bits) const {
    int best = INT32_MAX;
    int second = INT32_MAX;
    for (const auto& ind : indicators) {
        int d = 0;
        for (size_t j = 0; j < bits.size(); ++j)
            d += bits[j] != ind[j];
        if (d < best) {
            second = best;
            best = d;
        } else if (d < second) {
            second = d;
        }
    }
    return indicators.size() > 1 ? second - best : 0;
}

int predict_category_bits(std::span<const uint8_t> bits,
                          const std::vector<CategorySignature>& signatures,
                          int num_concepts) {
    NearestSignaturePredictor p(signatures, num_concepts);
    return p.predict(bits);
}

int predict_category(std::span<const double> activation,
                     const std::vector<CategorySignature>& signatures, int num_concepts) {
    std::vector<uint8_t> bits(activation.size());
    for (size_t j = 0; j < activation.size(); ++j)
        bits[j] = activation[j] > 0.5 ? 1 : 0;
    return predict_category_bits(bits, signatures, num_concepts);
}

RuleSet derive_rules(const std::vector<CategorySignature>& signatures, int num_concepts,
                     double omission_rate, uint64_t seed) {
    if (!(omission_rate >= 0.0) || omission_rate >= 1.0)
        throw std::invalid_argument("omission rate must sit in [0,1)");

    // occurrence census across signatures
    std::vector<int> occurs(static_cast<size_t>(num_concepts), 0);
    std::vector<std::vector<uint8_t>> member(
        signatures.size(), std::vector<uint8_t>(static_cast<size_t>(num_concepts), 0));
    for (size_t s = 0; s < signatures.size(); ++s) {
        for (int c : signatures[s].concepts) {
            occurs[static_cast<size_t>(c)] += 1;
            member[s][static_cast<size_t>(c)] = 1;
        }
    }

    RuleSet out;
    auto add = [&](FormulaPtr f) {
        Rule r;
        r.id = static_cast<int>(out.rules.size());
        r.formula = std::move(f);
        r.family = infer_family(*r.formula);
        r.confidence = 1.0;
        out.rules.push_back(std::move(r));
    };
    auto conceptLeaf = [](int j) { return make_leaf({VarKind::Concept, j}); };
    auto categoryLeaf = [](int j) { return make_leaf({VarKind::Category, j}); };

    // category-concept rules
    for (size_t s = 0; s < signatures.size(); ++s) {
        int y = signatures[s].category;
        for (int c = 0; c < num_concepts; ++c) {
            if (member[s][static_cast<size_t>(c)]) {
                if (occurs[static_cast<size_t>(c)] == 1) {
                    // concept occurs nowhere else, the biconditional holds
                    add(make_binary(Connective::Iff, conceptLeaf(c), categoryLeaf(y)));
                } else {
                    // shared concept: only the category->concept direction holds
                    add(make_binary(Connective::Or, conceptLeaf(c),
                                    make_not(categoryLeaf(y))));
                }
            } else {
                // concept absent from the signature: category excludes it
                add(make_binary(Connective::Or, make_not(conceptLeaf(c)),
                                make_not(categoryLeaf(y))));
            }
        }
    }

    // concept-concept rules for pairs that never co-occur
    for (int a = 0; a < num_concepts; ++a) {
        for (int b = a + 1; b < num_concepts; ++b) {
            if (occurs[static_cast<size_t>(a)] == 0 || occurs[static_cast<size_t>(b)] == 0)
                continue; // unused concepts carry no pair knowledge
            bool together = false;
            bool exactlyOneEverywhere = true;
            for (size_t s = 0; s < signatures.size(); ++s) {
                int hits = member[s][static_cast<size_t>(a)] + member[s][static_cast<size_t>(b)];
                if (hits == 2)
                    together = true;
                if (hits != 1)
                    exactlyOneEverywhere = false;
            }
            if (together)
                continue;
            if (exactlyOneEverywhere)
                add(make_binary(Connective::Xor, conceptLeaf(a), conceptLeaf(b)));
            else
                add(make_not(make_binary(Connective::And, conceptLeaf(a), conceptLeaf(b))));
        }
    }

    if (omission_rate > 0.0) {
        Rng rng(derive_seed(seed, 0x0315));
        RuleSet kept;
        for (Rule& r : out.rules) {
            if (rng.bernoulli(omission_rate))
                continue;
            r.id = static_cast<int>(kept.rules.size());
            kept.rules.push_back(std::move(r));
        }
        return kept;
    }
    return out;
}

} // namespace conceptguard
