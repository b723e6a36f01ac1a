#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "starnoma/rng.hpp"

using namespace starnoma::rng;

TEST_SUITE("rng") {

TEST_CASE("philox4x32-10 known answers") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
    Stream a(7, 123, Component::Direct);
    Stream b(7, 123, Component::Direct);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u32() == b.next_u32());
    }
    std::set<std::uint32_t> firsts;
    for (std::uint64_t trial : {0ull, 1ull, 1ull << 33}) {
        for (auto c : {Component::Direct, Component::Interference, Component::CascadeN, Component::CascadeM}) {
            for (std::uint64_t seed : {1ull, 2ull, 1ull << 40}) {
                Stream s(seed, trial, c);
                firsts.insert(s.next_u32());
            }
        }
    }
    CHECK(firsts.size() == 36);
}

TEST_CASE("uniform lies in the open unit interval with the right moments") {
    Stream s(99, 0, 0u);
    const int n = 1'000'000;
    double sum = 0.0;
    double sq = 0.0;
    double lo = 1.0;
    double hi = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
        sq += u * u;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(sum / n - 0.5) < 2e-3);
    CHECK(std::abs(sq / n - 1.0 / 3.0) < 2e-3);
}

TEST_CASE("normal and exponential pass KS") {
    Stream s(5, 1, 0u);
    std::vector<double> z(200000);
    for (auto& v : z) {
        v = s.normal();
    }
    CHECK(oracle::ks_distance(z, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }) < 0.005);
    std::vector<double> e(200000);
    for (auto& v : e) {
        v = s.exponential(2.5);
    }
    CHECK(oracle::ks_distance(e, [](double x) { return 1.0 - std::exp(-x / 2.5); }) < 0.005);
}

}
