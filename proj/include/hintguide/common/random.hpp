#pragma once
// Seed derivation and the handful of samplers the simulation needs.
//
// Every random stream is addressed by a path of integers below a master seed
// (e.g. {worker, question}), so results do not depend on evaluation order or
// on how work is split across threads.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace hintguide {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);
std::uint64_t derive_seed(std::uint64_t master, std::span<const std::uint64_t> path);
Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path);

double uniform01(Rng& rng);
// Dirichlet(alphas) via normalised gamma draws.
std::vector<double> sample_dirichlet(Rng& rng, std::span<const double> alphas);
// k distinct indices from [0, n), returned in ascending order.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

}  // namespace hintguide
