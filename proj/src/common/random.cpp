#include "hintguide/common/random.hpp"

#include <algorithm>
#include <numeric>

namespace hintguide {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::span<const std::uint64_t> path)
{
    std::uint64_t h = splitmix64(master);
    for (auto p : path) {
        h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path)
{
    return derive_seed(master, std::span<const std::uint64_t>(path.begin(), path.size()));
}

Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path)
{
    return Rng(derive_seed(master, path));
}

double uniform01(Rng& rng)
{
    // 53 random mantissa bits, in [0, 1)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> sample_dirichlet(Rng& rng, std::span<const double> alphas)
{
    std::vector<double> w(alphas.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        std::gamma_distribution<double> g(alphas[i], 1.0);
        w[i] = g(rng);
        total += w[i];
    }
    for (auto& v : w) {
        // every draw underflowed: fall back to the centre
        v = total > 0.0 ? v / total : 1.0 / static_cast<double>(w.size());
    }
    return w;
}

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k)
{
    k = std::min(k, n);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k; ++i) {
        auto span = static_cast<std::uint64_t>(n - i);
        auto j = i + static_cast<std::size_t>(rng() % span);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace hintguide
