#include "conceptguard/synth.hpp"

#include "conceptguard/factor_graph.hpp"
#include "conceptguard/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace conceptguard;

namespace {

// independent expectation of the derived rule multiset, built from set
// algebra on the signatures rather than the production census code
std::multiset<std::string> expected_rule_keys(const std::vector<CategorySignature>& sigs,
                                              int M) {
    std::multiset<std::string> keys;
    auto add = [&](const std::string& line) {
        keys.insert(canonical_key(*parse_rules(line).rules[0].formula));
    };
    std::map<int, int> occurrences;
    for (const auto& s : sigs)
        for (int c : s.concepts)
            occurrences[c] += 1;
    char line[64];
    for (const auto& s : sigs) {
        for (int c = 0; c < M; ++c) {
            bool member = std::find(s.concepts.begin(), s.concepts.end(), c) !=
                          s.concepts.end();
            if (member && occurrences[c] == 1)
                std::snprintf(line, sizeof line, "c%d <-> y%d", c, s.category);
            else if (member)
                std::snprintf(line, sizeof line, "c%d OR NOT y%d", c, s.category);
            else
                std::snprintf(line, sizeof line, "NOT c%d OR NOT y%d", c, s.category);
            add(line);
        }
    }
    for (int a = 0; a < M; ++a) {
        for (int b = a + 1; b < M; ++b) {
            if (!occurrences.count(a) || !occurrences.count(b))
                continue;
            bool together = false;
            bool exactlyOneEverywhere = true;
            for (const auto& s : sigs) {
                bool hasA = std::find(s.concepts.begin(), s.concepts.end(), a) !=
                            s.concepts.end();
                bool hasB = std::find(s.concepts.begin(), s.concepts.end(), b) !=
                            s.concepts.end();
                together |= hasA && hasB;
                exactlyOneEverywhere &= hasA != hasB;
            }
            if (together)
                continue;
            if (exactlyOneEverywhere)
                std::snprintf(line, sizeof line, "c%d XOR c%d", a, b);
            else
                std::snprintf(line, sizeof line, "NOT (c%d AND c%d)", a, b);
            add(line);
        }
    }
    return keys;
}

} // namespace

TEST_CASE("gen_dataset produces distinct signatures and aligned instances") {
    SynthDataset ds = gen_dataset(12, 10, 4, 500, 7);
    REQUIRE(ds.signatures.size() == 12);
    CHECK(ds.schema.num_concepts == 10);
    CHECK(ds.schema.num_categories == 12);
    std::set<std::vector<int>> distinct;
    for (const auto& s : ds.signatures) {
        CHECK(s.concepts.size() == 4);
        CHECK(std::is_sorted(s.concepts.begin(), s.concepts.end()));
        for (int c : s.concepts) {
            CHECK(c >= 0);
            CHECK(c < 10);
        }
        distinct.insert(s.concepts);
    }
    CHECK(distinct.size() == 12);

    REQUIRE(ds.instances.size() == 500);
    std::vector<int> counts(12, 0);
    for (const Instance& inst : ds.instances) {
        counts[static_cast<size_t>(inst.true_category)] += 1;
        const auto& sig = ds.signatures[static_cast<size_t>(inst.true_category)].concepts;
        for (int j = 0; j < 10; ++j) {
            bool member = std::find(sig.begin(), sig.end(), j) != sig.end();
            CHECK(inst.true_concepts[static_cast<size_t>(j)] == (member ? 1 : 0));
            // before noise injection the activation is the exact bit
            CHECK(inst.activation[static_cast<size_t>(j)] ==
                  static_cast<double>(inst.true_concepts[static_cast<size_t>(j)]));
        }
        CHECK(inst.predicted_category == inst.true_category);
    }
    for (int c : counts)
        CHECK(c > 500 / 12 / 3); // roughly uniform labels
}

TEST_CASE("gen_dataset rejects infeasible shapes") {
    CHECK_THROWS_AS(gen_dataset(20, 5, 3, 10, 1), std::invalid_argument); // C(5,3)=10 < 20
    CHECK_THROWS_AS(gen_dataset(1, 4, 5, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_dataset(0, 4, 2, 10, 1), std::invalid_argument);
    SynthDataset edge = gen_dataset(10, 5, 3, 5, 1); // exactly C(5,3)
    CHECK(edge.signatures.size() == 10);
}

TEST_CASE("concept predictor noise stays inside the safe bands") {
    std::vector<uint8_t> bits{1, 0, 1, 1, 0, 0, 1, 0};
    for (uint64_t seed = 0; seed < 50; ++seed) {
        auto act = simulate_concept_predictor(bits, 0.3, seed);
        REQUIRE(act.size() == bits.size());
        for (size_t j = 0; j < bits.size(); ++j) {
            if (bits[j]) {
                CHECK(act[j] >= 0.7);
                CHECK(act[j] <= 1.0);
            } else {
                CHECK(act[j] >= 0.0);
                CHECK(act[j] <= 0.3);
            }
            CHECK((act[j] > 0.5) == (bits[j] != 0)); // never crosses threshold
        }
    }
    auto a = simulate_concept_predictor(bits, 0.2, 99);
    auto b = simulate_concept_predictor(bits, 0.2, 99);
    CHECK(a == b);
    CHECK_THROWS_AS(simulate_concept_predictor(bits, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(simulate_concept_predictor(bits, -0.1, 0), std::invalid_argument);
}

TEST_CASE("dataset-level noise keeps predictions correct below eta 0.5") {
    SynthDataset ds = gen_dataset(8, 9, 3, 200, 3);
    apply_concept_predictor(ds, 0.45, 17);
    for (const Instance& inst : ds.instances) {
        CHECK(inst.predicted_category == inst.true_category);
        for (size_t j = 0; j < inst.activation.size(); ++j)
            CHECK((inst.activation[j] > 0.5) == (inst.true_concepts[j] != 0));
    }
    // per-instance streams: identical dataset-level seeds reproduce exactly
    SynthDataset again = gen_dataset(8, 9, 3, 200, 3);
    apply_concept_predictor(again, 0.45, 17);
    for (size_t i = 0; i < ds.instances.size(); ++i)
        CHECK(ds.instances[i].activation == again.instances[i].activation);
}

TEST_CASE("nearest signature prediction breaks ties toward the lower id") {
    std::vector<CategorySignature> sigs{{0, {0, 1}}, {1, {2, 3}}, {2, {0, 2}}};
    NearestSignaturePredictor p(sigs, 4);
    CHECK(p.predict(std::vector<uint8_t>{1, 1, 0, 0}) == 0);
    CHECK(p.predict(std::vector<uint8_t>{0, 0, 1, 1}) == 1);
    // {1,0,1,0} is distance 2 from sig0 and sig1, distance 0 from sig2
    CHECK(p.predict(std::vector<uint8_t>{1, 0, 1, 0}) == 2);
    // all-zeros is distance 2 from every signature: tie goes to category 0
    CHECK(p.predict(std::vector<uint8_t>{0, 0, 0, 0}) == 0);
    CHECK(p.margin(std::vector<uint8_t>{0, 0, 0, 0}) == 0);
    CHECK(p.margin(std::vector<uint8_t>{1, 1, 0, 0}) == 2);
    // activation-space entry point thresholds then matches
    std::vector<double> act{0.9, 0.8, 0.1, 0.2};
    CHECK(predict_category(act, sigs, 4) == 0);
}

TEST_CASE("derived rules match the set-algebra oracle") {
    for (uint64_t seed : {2ull, 5ull, 9ull}) {
        SynthDataset ds = gen_dataset(6, 8, 3, 0, seed);
        RuleSet rs = derive_rules(ds.signatures, 8, 0.0, 1);
        std::multiset<std::string> got;
        for (const Rule& r : rs.rules) {
            got.insert(canonical_key(*r.formula));
            REQUIRE(r.confidence.has_value());
            CHECK(*r.confidence == doctest::Approx(1.0));
        }
        CHECK(got == expected_rule_keys(ds.signatures, 8));
        // ids sequential
        for (size_t i = 0; i < rs.rules.size(); ++i)
            CHECK(rs.rules[i].id == static_cast<int>(i));
    }
}

TEST_CASE("every clean instance satisfies every derived rule") {
    for (uint64_t seed : {7ull, 13ull, 23ull}) {
        SynthDataset ds = gen_dataset(12, 10, 4, 150, seed);
        apply_concept_predictor(ds, 0.2, seed + 1);
        RuleSet rs = derive_rules(ds.signatures, 10, 0.0, 1);
        std::vector<double> w(rs.rules.size(), 1.0);
        FactorGraph g = FactorGraph::build(rs, ds.schema, w);
        for (const Instance& inst : ds.instances) {
            Assignment a = binarize(inst.activation, inst.predicted_category, ds.schema);
            for (int f = 0; f < g.num_factors(); ++f)
                CHECK(g.evaluate_potential(f, a));
        }
    }
}

TEST_CASE("omission drops rules reproducibly and resequences ids") {
    SynthDataset ds = gen_dataset(10, 9, 4, 0, 11);
    RuleSet full = derive_rules(ds.signatures, 9, 0.0, 5);
    RuleSet thinned = derive_rules(ds.signatures, 9, 0.4, 5);
    CHECK(thinned.rules.size() < full.rules.size());
    CHECK(thinned.rules.size() > 0);
    for (size_t i = 0; i < thinned.rules.size(); ++i)
        CHECK(thinned.rules[i].id == static_cast<int>(i));
    RuleSet again = derive_rules(ds.signatures, 9, 0.4, 5);
    CHECK(format_rules(again) == format_rules(thinned));
    // surviving rules form a subset of the full set
    std::multiset<std::string> fullKeys, thinKeys;
    for (const Rule& r : full.rules)
        fullKeys.insert(canonical_key(*r.formula));
    for (const Rule& r : thinned.rules)
        thinKeys.insert(canonical_key(*r.formula));
    CHECK(std::includes(fullKeys.begin(), fullKeys.end(), thinKeys.begin(), thinKeys.end()));
}
