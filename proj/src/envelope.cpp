#include "rbdsde/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace rbdsde {

double GridFunction1D::eval(double y) const {
    if (values.size() == 1) return values[0];
    const double step = dy();
    if (y <= y_min) return values.front();
    if (y >= y_max) return values.back();
    const double pos = (y - y_min) / step;
    std::size_t k = static_cast<std::size_t>(pos);
    if (k >= values.size() - 1) k = values.size() - 2;
    const double w = (y - node(k)) / step;
    return values[k] + w * (values[k + 1] - values[k]);
}

GridFunction1D inf_envelope(const GridFunction1D& f, double n) {
    if (f.values.empty())
        throw InvalidArgument("inf_envelope: empty tabulation");
    if (!(n > 0.0)) throw InvalidArgument("inf_envelope: n must be > 0");
    GridFunction1D e = f;
    const double slack = n * f.dy();
    for (std::size_t k = 1; k < e.values.size(); ++k)
        e.values[k] = std::min(e.values[k], e.values[k - 1] + slack);
    for (std::size_t k = e.values.size() - 1; k-- > 0;)
        e.values[k] = std::min(e.values[k], e.values[k + 1] + slack);
    return e;
}

GridFunction1D sup_envelope(const GridFunction1D& f, double n) {
    GridFunction1D neg = f;
    for (double& v : neg.values) v = -v;
    GridFunction1D e = inf_envelope(neg, n);
    for (double& v : e.values) v = -v;
    return e;
}

GridFunction1D envelope_bruteforce(const GridFunction1D& f, double n,
                                   EnvelopeDirection dir) {
    GridFunction1D e = f;
    const std::size_t G = f.values.size();
    for (std::size_t k = 0; k < G; ++k) {
        double best = f.values[k];
        for (std::size_t j = 0; j < G; ++j) {
            const double cost =
                n * std::abs(f.node(k) - f.node(j));
            const double cand = dir == EnvelopeDirection::inf
                                    ? f.values[j] + cost
                                    : f.values[j] - cost;
            best = dir == EnvelopeDirection::inf ? std::min(best, cand)
                                                 : std::max(best, cand);
        }
        e.values[k] = best;
    }
    return e;
}

namespace {

struct SliceKey {
    double t;
    std::vector<double> z;
    bool operator==(const SliceKey& o) const { return t == o.t && z == o.z; }
};

struct SliceKeyHash {
    std::size_t operator()(const SliceKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](double v) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            h ^= bits;
            h *= 1099511628211ull;
        };
        mix(k.t);
        for (double v : k.z) mix(v);
        return static_cast<std::size_t>(h);
    }
};

struct SliceCache {
    std::mutex mu;
    std::unordered_map<SliceKey, std::shared_ptr<const GridFunction1D>,
                       SliceKeyHash>
        map;
    static constexpr std::size_t kMaxEntries = 4096;
};

} // namespace

GeneratorSpec envelope_generator(const GeneratorSpec& spec, double n,
                                 double y_min, double y_max, std::size_t G) {
    if (n < spec.kappa)
        throw InvalidArgument("envelope_generator: n below kappa");
    if (G < 2) throw InvalidArgument("envelope_generator: G >= 2 required");

    const EnvelopeDirection dir =
        spec.regularity == RegularityClass::right_continuous_decreasing
            ? EnvelopeDirection::sup
            : EnvelopeDirection::inf;
    const DriftFn base = spec.f;
    const bool z_free = spec.z_free;
    auto cache = std::make_shared<SliceCache>();

    GeneratorSpec out = spec;
    out.lipschitz_C = n;
    out.regularity = RegularityClass::lipschitz;
    out.f = [base, n, y_min, y_max, G, dir, z_free, cache](
                double t, double y, std::span<const double> z) {
        SliceKey key{t, z_free ? std::vector<double>{}
                               : std::vector<double>(z.begin(), z.end())};
        std::shared_ptr<const GridFunction1D> slice;
        {
            std::lock_guard<std::mutex> lock(cache->mu);
            auto it = cache->map.find(key);
            if (it != cache->map.end()) slice = it->second;
        }
        if (!slice) {
            std::vector<double> zcopy(z.begin(), z.end());
            auto tab = GridFunction1D::tabulate(
                y_min, y_max, G,
                [&](double u) { return base(t, u, zcopy); });
            auto env = std::make_shared<GridFunction1D>(
                dir == EnvelopeDirection::inf ? inf_envelope(tab, n)
                                              : sup_envelope(tab, n));
            std::lock_guard<std::mutex> lock(cache->mu);
            if (cache->map.size() >= SliceCache::kMaxEntries)
                cache->map.clear();
            auto [it, inserted] = cache->map.emplace(std::move(key), env);
            slice = it->second;
        }
        return slice->eval(y);
    };
    return out;
}

} // namespace rbdsde
