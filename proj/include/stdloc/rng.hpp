#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace stdloc {

// splitmix64 step; used to derive independent substream seeds from a master
// seed plus arbitrary indices (node, sample, restart, ...). The chain is a
// pure function of its inputs, so reruns and worker counts cannot change it.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a = 0,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = seed;
    std::uint64_t z = splitmix64(s);
    s ^= a + 0x632be59bd9b4e019ULL;
    z ^= splitmix64(s);
    s ^= b + 0x9e3779b97f4a7c15ULL;
    z ^= splitmix64(s);
    s ^= c + 0xd1b54a32d192ed03ULL;
    z ^= splitmix64(s);
    return z;
}

// Standard-normal sampler with an explicit Box-Muller implementation on top
// of mt19937_64. std::normal_distribution is implementation-defined; this
// one produces the same byte stream on every platform.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1], u2 in [0,1)
        double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform in [0, n): used for GMM restart initialization.
    std::uint64_t uniform_index(std::uint64_t n) { return eng_() % n; }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace stdloc
