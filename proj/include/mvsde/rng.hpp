#pragma once

#include <cstdint>

namespace mvsde::rng {

// Purpose tags keep independent draws on disjoint streams of the same seed.
enum class Stream : std::uint64_t {
    Noise = 0x6e6f697365ULL,
    InitialLaw = 0x696e6974ULL,
    Certify = 0x63657274ULL,
    FloorA = 0x666c6f61ULL,
    FloorB = 0x666c6f62ULL,
    Property = 0x70726f70ULL,
};

/// SplitMix64 finalizer; bijective avalanche mix.
std::uint64_t mix64(std::uint64_t z);

/// Stateless counter-based word: the output depends only on the key tuple,
/// so draws are reproducible under any scheduling or worker count.
std::uint64_t keyed_word(std::uint64_t seed, std::uint64_t stream, std::uint64_t a,
                         std::uint64_t b, std::uint64_t c);

/// Uniform draw in the open interval (0,1).
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b,
                 std::uint64_t c);

/// Standard normal draw via inverse-CDF transform of the keyed uniform.
double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b,
              std::uint64_t c);

/// Standard normal quantile function (Wichura's PPND16 rational approximation).
/// Accurate to about 1e-15 relative error for p in (0,1).
double normal_quantile(double p);

inline std::uint64_t stream_id(Stream s) { return static_cast<std::uint64_t>(s); }

/// Small sequential convenience wrapper over the counter generator, used for
/// certification sampling and test data.
class SequenceSampler {
public:
    SequenceSampler(std::uint64_t seed, Stream stream)
        : seed_(seed), stream_(stream_idv(stream)) {}

    double uniform01() { return rng::uniform01(seed_, stream_, counter_++, 0, 0); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    double normal() { return rng::normal(seed_, stream_, counter_++, 0, 0); }
    std::uint64_t word() { return keyed_word(seed_, stream_, counter_++, 0, 0); }

private:
    static std::uint64_t stream_idv(Stream s) { return static_cast<std::uint64_t>(s); }
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace mvsde::rng
