#pragma once

#include "conceptguard/rules.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace conceptguard {

// The concept subset that defines a category in the synthetic world.
struct CategorySignature {
    int category = 0;
    std::vector<int> concepts; // sorted, size k
};

struct Instance {
    std::vector<uint8_t> true_concepts;
    int true_category = 0;
    std::vector<double> activation;  // simulated concept predictor output
    int predicted_category = -1;
};

struct SynthDataset {
    RuleSchema schema;
    std::vector<CategorySignature> signatures;
    std::vector<Instance> instances;
};

// K distinct signatures of size k over M concepts (requires C(M,k) >= K),
// then n instances with uniformly drawn categories. Activations start as the
// exact concept bits; add noise via apply_concept_predictor.
SynthDataset gen_dataset(int num_categories, int num_concepts, int signature_size,
                         int n_instances, uint64_t seed);

// Bounded predictor noise: activation = clamp(bit + u, 0, 1) with u uniform
// in [-eta, eta], so active concepts land in [1-eta, 1] and inactive ones in
// [0, eta]; for eta < 0.5 the 0.5 threshold is never crossed. Predictions
// are refreshed afterwards.
std::vector<double> simulate_concept_predictor(std::span<const uint8_t> true_concepts,
                                               double eta, uint64_t seed);
void apply_concept_predictor(SynthDataset& ds, double eta, uint64_t seed);

// Nearest signature by Hamming distance on thresholded activations, ties to
// the lowest category id.
int predict_category(std::span<const double> activation,
                     const std::vector<CategorySignature>& signatures, int num_concepts);
int predict_category_bits(std::span<const uint8_t> bits,
                          const std::vector<CategorySignature>& signatures, int num_concepts);

// Thin wrapper used by the attack search: prediction plus the Hamming margin
// between the two closest signatures.
struct NearestSignaturePredictor {
    std::vector<std::vector<uint8_t>> indicators;

    NearestSignaturePredictor() = default; // empty; predict() requires signatures
    NearestSignaturePredictor(const std::vector<CategorySignature>& signatures,
                              int num_concepts);
    int predict(std::span<const uint8_t> bits) const;
    // distance(second best) - distance(best); 0 on a tie
    int margin(std::span<const uint8_t> bits) const;
};

// Rules that hold across every signature, strongest form first. For a
// concept c in signature j: c <-> y_j when c occurs in no other signature,
// otherwise the implication y_j => c. For a concept c outside signature j:
// the exclusion y_j => NOT c. For a concept pair co-occurring in no
// signature: c_a XOR c_b when every signature contains exactly one of the
// two, otherwise NOT(c_a AND c_b). Each derived rule is then independently
// dropped with probability omission_rate; survivors carry confidence 1.
RuleSet derive_rules(const std::vector<CategorySignature>& signatures, int num_concepts,
                     double omission_rate, uint64_t seed);

} // namespace conceptguard
