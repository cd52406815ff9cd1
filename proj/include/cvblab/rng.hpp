#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cvb {

// Stateless key derivation (splitmix64 finalizer). Used to key a per-shot
// stream by (seed, stream index) so results do not depend on scheduling.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain = 0) {
    return mix64(mix64(seed ^ mix64(domain)) + stream);
}

class Rng {
  public:
    explicit Rng(std::uint64_t key) : engine_(key) {}
    Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain = 0)
        : engine_(stream_key(seed, stream, domain)) {}

    std::uint64_t next() { return engine_(); }
    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(uniform() * n); }
    bool bernoulli(double p) { return uniform() < p; }
    double normal() { return normal_(engine_); }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

// Bernoulli trials over a stream of locations via geometric skipping: draws one
// gap per event at rate p_max and thins to the per-location probability.
class EventSampler {
  public:
    EventSampler(Rng &rng, double p_max) : rng_(rng), p_max_(p_max) {
        log_q_ = p_max_ > 0 && p_max_ < 1 ? std::log1p(-p_max_) : 0.0;
        draw_gap();
    }

    bool fires(double p) {
        if (p <= 0) {
            return false;
        }
        if (p_max_ >= 1.0) {
            return rng_.bernoulli(p);
        }
        if (gap_ > 0) {
            --gap_;
            return false;
        }
        draw_gap();
        return p >= p_max_ || rng_.uniform() * p_max_ < p;
    }

    // Consumes n locations at once when none of them can fire; false otherwise.
    bool skip(std::uint64_t n) {
        if (p_max_ >= 1.0 || gap_ < n) {
            return false;
        }
        gap_ -= n;
        return true;
    }

  private:
    void draw_gap() {
        if (p_max_ <= 0) {
            gap_ = UINT64_MAX;
        } else if (p_max_ >= 1.0) {
            gap_ = 0;
        } else {
            const double u = 1.0 - rng_.uniform();
            const double g = std::floor(std::log(u) / log_q_);
            gap_ = g > 1e18 ? UINT64_MAX : static_cast<std::uint64_t>(g);
        }
    }

    Rng &rng_;
    double p_max_;
    double log_q_ = 0;
    std::uint64_t gap_ = 0;
};

}  // namespace cvb
