#pragma once

#include <cstdint>
#include <limits>

namespace vlab {

inline constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent 64-bit key from a parent key and a child index.
inline constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t child)
{
    return mix64(parent ^ mix64(child + 0x632be59bd9b4e019ULL));
}

/**
 * Counter-based generator: the word produced for (call, draw) depends only on
 * the key and those two counters, so any trial or oracle call can be replayed
 * in isolation.
 */
class CounterRng {
public:
    CounterRng() = default;
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(derive_key(seed, stream)) {}

    std::uint64_t key() const { return key_; }

    std::uint64_t word(std::uint64_t call, std::uint64_t draw) const
    {
        return mix64(derive_key(key_, call) + draw * 0xd1342543de82ef95ULL);
    }

    /// Sequential view over the words of one call.
    class Stream {
    public:
        using result_type = std::uint64_t;
        Stream(const CounterRng& rng, std::uint64_t call) : rng_(&rng), call_(call) {}
        static constexpr result_type min() { return 0; }
        static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
        result_type operator()() { return rng_->word(call_, draw_++); }

        /// Uniform integer in [0, bound) by rejection; bound must be positive.
        std::uint64_t below(std::uint64_t bound)
        {
            const std::uint64_t limit = max() - max() % bound;
            for (;;) {
                std::uint64_t w = (*this)();
                if (w < limit) return w % bound;
            }
        }

    private:
        const CounterRng* rng_;
        std::uint64_t call_;
        std::uint64_t draw_ = 0;
    };

    Stream stream(std::uint64_t call) const { return Stream(*this, call); }

private:
    std::uint64_t key_ = 0;
};

/// Plain sequential generator for test-data and instance generation.
class SeqRng {
public:
    using result_type = std::uint64_t;
    explicit SeqRng(std::uint64_t seed) : rng_(seed, 0) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return rng_.word(counter_++, 0); }

    std::uint64_t below(std::uint64_t bound)
    {
        const std::uint64_t limit = max() - max() % bound;
        for (;;) {
            std::uint64_t w = (*this)();
            if (w < limit) return w % bound;
        }
    }
    std::int64_t between(std::int64_t lo, std::int64_t hi)
    {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }
    bool coin(std::uint64_t num = 1, std::uint64_t den = 2) { return below(den) < num; }

private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
};

} // namespace vlab
