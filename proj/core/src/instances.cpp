#include "pilotidx/instances.hpp"

#include "pilotidx/rng.hpp"

#include <cmath>
#include <string>

namespace pilotidx {

Vector rates_from_gains(const std::vector<std::complex<double>>& h) {
    Vector r(static_cast<int>(h.size()));
    for (std::size_t k = 0; k < h.size(); ++k) r(static_cast<int>(k)) = std::log2(1.0 + std::norm(h[k]));
    return r;
}

std::vector<std::complex<double>> random_gains(int K, std::uint64_t seed) {
    SplitMix g(splitmix64(seed ^ 0x5bd1e995ULL));
    std::vector<std::complex<double>> h(K);
    const double s = std::sqrt(0.5);
    for (auto& x : h) {
        double re = g.normal() * s;
        double im = g.normal() * s;
        x = {re, im};
    }
    return h;
}

ChannelModel random_user(int K, std::uint64_t seed) {
    Matrix P = generate_doubly_stochastic(K, seed);
    return make_channel(P, rates_from_gains(random_gains(K, seed)), "user-" + std::to_string(seed));
}

std::vector<ChannelModel> example_two_users() {
    Matrix P1(3, 3), P2(3, 3);
    P1 << 0.3, 0.4, 0.3, 0.2, 0.2, 0.6, 0.5, 0.4, 0.1;
    P2 << 0.35, 0.35, 0.3, 0.3, 0.15, 0.55, 0.35, 0.5, 0.15;
    using c = std::complex<double>;
    std::vector<c> h1{c(0.512, 0.9671), c(-1.694, -1.892), c(0.0503, 0.0621)};
    // the third entry's imaginary unit is missing in the source listing; read as 0.6188i
    std::vector<c> h2{c(0.6386, -0.1388), c(-0.8789, 0.2781), c(-2.7781, 0.6188)};
    return {make_channel(P1, rates_from_gains(h1), "user-1"), make_channel(P2, rates_from_gains(h2), "user-2")};
}

ChannelModel steady_rowed(const Vector& p, const Vector& rates) {
    Matrix P(p.size(), p.size());
    for (int i = 0; i < p.size(); ++i) P.row(i) = p.transpose();
    return make_channel(P, rates, "steady-rowed");
}

}  // namespace pilotidx
