#pragma once

#include "pilotidx/channel.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace pilotidx {

// r_k = log2(1 + |h_k|^2)
Vector rates_from_gains(const std::vector<std::complex<double>>& h);

// h_k ~ CN(0,1), i.i.d.
std::vector<std::complex<double>> random_gains(int K, std::uint64_t seed);

// Random doubly stochastic chain with CN(0,1) channel rates.
ChannelModel random_user(int K, std::uint64_t seed);

// The two three-state users of the structure-map example.
std::vector<ChannelModel> example_two_users();

// Every row equal to p: the observed state carries no information.
ChannelModel steady_rowed(const Vector& p, const Vector& rates);

}  // namespace pilotidx
