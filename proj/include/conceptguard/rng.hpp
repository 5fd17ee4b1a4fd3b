#pragma once

#include <cstdint>
#include <vector>

namespace conceptguard {

// Deterministic generator used wherever a seed appears in the public API.
// Stdlib distributions are implementation defined, which would make reports
// differ between standard libraries; this keeps every draw a pure function
// of the seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // n must be > 0. Modulo bias is negligible at the scales used here.
    uint64_t below(uint64_t n) { return next() % n; }

    int index(int n) { return static_cast<int>(below(static_cast<uint64_t>(n))); }

    // uniform in [0, 1)
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    bool bernoulli(double p) { return unit() < p; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

// Stable per-stream seed derivation so parallel instance loops stay
// independent of worker count and iteration order.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    Rng g(base ^ (stream * 0xd1342543de82ef95ull + 0x6a09e667f3bcc909ull));
    g.next();
    return g.next();
}

} // namespace conceptguard
