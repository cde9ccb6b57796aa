#pragma once

#include <cstdint>
#include <vector>

namespace gladformer {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic sub-seed derivation, e.g. per fold / epoch / graph.
inline std::uint64_t splitmix_combine(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s =
        seed + 0x9E3779B97F4A7C15ull * (a + 1) + 0x94D049BB133111EBull * (b + 1);
    return splitmix64(s);
}

// Seeded generator with implementation-independent output so results are
// reproducible bit-for-bit regardless of standard library version.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(v[i], v[static_cast<std::size_t>(j)]);
        }
    }

    // Derive an independent stream; does not disturb this generator.
    Rng fork(std::uint64_t tag) const {
        std::uint64_t s = state_ ^ (0x632BE59BD9B4E019ull * (tag + 1));
        splitmix64(s);
        return Rng(s);
    }

  private:
    std::uint64_t state_;
};

}  // namespace gladformer
