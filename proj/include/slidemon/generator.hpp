#pragma once
// Seeded synthetic stream generators.
//
// Elements are drawn per timestamp first; arrival delays come from a second,
// independent random stream. Two specs differing only in tardiness therefore
// produce the same timestamp multiset, just delivered in a different order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "types.hpp"

namespace slidemon {

enum class GeneratorKind { uniform, zipf, burst, churn_adversarial };

inline std::string to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::uniform: return "uniform";
        case GeneratorKind::zipf: return "zipf";
        case GeneratorKind::burst: return "burst";
        case GeneratorKind::churn_adversarial: return "adversarial";
    }
    return "?";
}

inline GeneratorKind parse_generator_kind(const std::string& s) {
    if (s == "uniform") return GeneratorKind::uniform;
    if (s == "zipf") return GeneratorKind::zipf;
    if (s == "burst") return GeneratorKind::burst;
    if (s == "adversarial" || s == "churn-adversarial" || s == "churn_adversarial")
        return GeneratorKind::churn_adversarial;
    throw InputError("unknown generator '" + s + "'");
}

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::uniform;
    double zipf_s = 1.0;
    // items are drawn from [0, universe)
    ItemId universe = 100;
    // mean items per tick; the fractional part is dithered
    double rate = 1.0;
    Tick duration = 1000;
    Tick tardiness = 0;
    std::uint64_t seed = 1;
    // phase length of the burst and adversarial generators
    Tick phase = 100;

    void validate() const {
        if (universe == 0) throw InputError("generator universe must be nonzero");
        if (kind == GeneratorKind::zipf || kind == GeneratorKind::burst) {
            if (!(zipf_s > 0.0) || !std::isfinite(zipf_s))
                throw InputError("zipf exponent must be positive and finite");
        }
        if (!(rate >= 0.0) || !std::isfinite(rate)) throw InputError("rate must be nonnegative");
        if (duration < 0) throw InputError("duration must be nonnegative");
        if (tardiness < 0) throw InputError("tardiness must be nonnegative");
        if (phase <= 0) throw InputError("phase must be positive");
    }
};

namespace detail {

// uniform double in [0,1) from the top 53 bits; identical on every platform
inline double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline ItemId uniform_item(std::mt19937_64& rng, ItemId universe) {
    return std::min<ItemId>(universe - 1, static_cast<ItemId>(unit(rng) * static_cast<double>(universe)));
}

class ZipfTable {
public:
    ZipfTable(ItemId universe, double s) : cdf_(universe) {
        double acc = 0.0;
        for (ItemId r = 0; r < universe; ++r) {
            acc += 1.0 / std::pow(static_cast<double>(r + 1), s);
            cdf_[r] = acc;
        }
        for (double& c : cdf_) c /= acc;
    }

    // item i has probability proportional to 1/(i+1)^s
    ItemId draw(std::mt19937_64& rng) const {
        const double u = unit(rng);
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) --it;
        return static_cast<ItemId>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

inline Count dithered(std::mt19937_64& rng, double rate) {
    const double whole = std::floor(rate);
    return static_cast<Count>(whole) + (unit(rng) < rate - whole ? 1 : 0);
}

}  // namespace detail

/// Arrival-ordered element sequence for one stream.
inline std::vector<TimedItem> generate_stream(const GeneratorSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::mt19937_64 delay_rng(spec.seed ^ 0x5DEECE66DULL);
    std::vector<TimedItem> out;
    out.reserve(static_cast<std::size_t>(spec.rate * static_cast<double>(spec.duration)) + 16);

    const bool needs_zipf = spec.kind == GeneratorKind::zipf || spec.kind == GeneratorKind::burst;
    const detail::ZipfTable zipf = needs_zipf ? detail::ZipfTable(spec.universe, spec.zipf_s)
                                              : detail::ZipfTable(1, 1.0);

    // adversarial flicker items hold shares 0.6%, 1.2%, ..., 4.8% so their
    // counts hover around 3*lambda*c for eps in [0.05, 0.2]
    constexpr int kFlickerItems = 8;
    const ItemId hot = 0;

    auto emit = [&](Tick ts, ItemId j) { out.push_back(TimedItem{j, ts, ts}); };

    for (Tick ts = 0; ts < spec.duration; ++ts) {
        switch (spec.kind) {
            case GeneratorKind::uniform: {
                for (Count n = detail::dithered(rng, spec.rate); n > 0; --n)
                    emit(ts, detail::uniform_item(rng, spec.universe));
                break;
            }
            case GeneratorKind::zipf: {
                for (Count n = detail::dithered(rng, spec.rate); n > 0; --n) emit(ts, zipf.draw(rng));
                break;
            }
            case GeneratorKind::burst: {
                // on/off square wave with the same mean rate
                const bool on = (ts / spec.phase) % 2 == 0;
                const double r = on ? 2.0 * spec.rate : 0.0;
                for (Count n = detail::dithered(rng, r); n > 0; --n) emit(ts, zipf.draw(rng));
                break;
            }
            case GeneratorKind::churn_adversarial: {
                // ramp, spike, silence (mass expiry), flicker; repeated
                const Tick cycle = 4 * spec.phase;
                const Tick pos = ts % cycle;
                const int stage = static_cast<int>(pos / spec.phase);
                const double frac = static_cast<double>(pos % spec.phase) / static_cast<double>(spec.phase);
                double r = 0.0;
                if (stage == 0) r = 2.0 * spec.rate * frac;
                if (stage == 1) r = (pos % spec.phase) < spec.phase / 4 ? 4.0 * spec.rate : 0.5 * spec.rate;
                if (stage == 3) r = spec.rate;
                for (Count n = detail::dithered(rng, r); n > 0; --n) {
                    const double u = detail::unit(rng);
                    ItemId j = detail::uniform_item(rng, spec.universe);
                    if (stage == 0 || stage == 1) {
                        if (u < 0.5) j = hot;
                    } else if (stage == 3) {
                        double edge = 0.10;
                        if (u < edge) {
                            j = hot;
                        } else {
                            for (int f = 1; f <= kFlickerItems; ++f) {
                                edge += 0.006 * f;
                                if (u < edge) {
                                    j = static_cast<ItemId>(f) % spec.universe;
                                    break;
                                }
                            }
                        }
                    }
                    emit(ts, j);
                }
                break;
            }
        }
    }

    if (spec.tardiness > 0) {
        for (TimedItem& it : out) {
            const auto delay = static_cast<Tick>(detail::unit(delay_rng) * static_cast<double>(spec.tardiness + 1));
            it.arrival = it.timestamp + std::min(delay, spec.tardiness);
        }
        std::stable_sort(out.begin(), out.end(),
                         [](const TimedItem& a, const TimedItem& b) { return a.arrival < b.arrival; });
    }
    return out;
}

}  // namespace slidemon
