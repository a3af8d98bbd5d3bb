#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "epec/election.hpp"
#include "epec/error.hpp"

namespace epec {

// Parameters of the Gaussian unit-share samplers. `means`/`sigmas` carry
// one entry for the 2-candidate sampler, two for the 3-candidate one, and
// n-1 for the general sampler.
struct SyntheticSpec {
    std::vector<double> means;
    std::vector<double> sigmas;
    int n_units = 100;
    double votes_per_unit = 100.0;
    std::uint64_t seed = 0;
};

inline void validate_spec(const SyntheticSpec& spec, std::size_t expected_means) {
    if (spec.means.size() != expected_means)
        fail(errc::invalid_spec, "expected " + std::to_string(expected_means) + " mean(s), got " +
                                     std::to_string(spec.means.size()));
    if (spec.sigmas.size() != spec.means.size())
        fail(errc::invalid_spec, "means and sigmas must have the same length");
    for (double mu : spec.means)
        if (!(mu >= 0.0 && mu <= 1.0)) fail(errc::invalid_spec, "mean must be in [0,1]");
    for (double s : spec.sigmas)
        if (!(s >= 0.0 && s <= 0.25)) fail(errc::invalid_spec, "sigma must be in [0,0.25]");
    if (spec.n_units <= 0) fail(errc::invalid_spec, "n_units must be > 0");
    if (!(spec.votes_per_unit > 0.0)) fail(errc::invalid_spec, "votes_per_unit must be > 0");
}

// Seeded Gaussian stream over mt19937_64 using Box-Muller without caching:
// every call consumes exactly two 64-bit words, so the draw sequence is a
// pure function of the seed and the call order (one call per sampled share,
// in unit order).
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double operator()(double mean, double sigma) {
        const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53; // (0,1]
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;         // [0,1)
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        return mean + sigma * z;
    }

private:
    std::mt19937_64 rng_;
};

namespace detail {

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// Floor to the 0.01 grid (r <- r - r mod 0.01). The epsilon keeps values
// already on the grid (e.g. a sigma=0 draw at 0.75) from slipping one cell
// down through floating-point residue; clamping has already bounded r.
inline int centi_floor(double r) {
    int g = static_cast<int>(std::floor(r * 100.0 + 1e-9));
    if (g < 0) g = 0;
    if (g > 100) g = 100;
    return g;
}

inline std::vector<std::string> sequence_labels(char prefix, int count) {
    int width = 1;
    for (int v = count; v >= 10; v /= 10) ++width;
    std::vector<std::string> labels;
    labels.reserve(count);
    for (int idx = 1; idx <= count; ++idx) {
        std::string digits = std::to_string(idx);
        labels.push_back(prefix + std::string(width - digits.size(), '0') + digits);
    }
    return labels;
}

} // namespace detail

// Two-candidate sampler: per unit draw r0 ~ N(mu, sigma), clamp to [0,1],
// floor to the 0.01 grid, set r1 = 1 - r0 and votes = votes_per_unit * r.
// With the default 100 votes per unit the counts are exact integers.
inline ElectionMatrix sample_two_candidate(const SyntheticSpec& spec) {
    validate_spec(spec, 1);
    GaussianStream draw(spec.seed);
    const double per_cell = spec.votes_per_unit / 100.0;
    std::vector<double> votes;
    votes.reserve(static_cast<std::size_t>(spec.n_units) * 2);
    for (int k = 0; k < spec.n_units; ++k) {
        const int grid = detail::centi_floor(detail::clamp01(draw(spec.means[0], spec.sigmas[0])));
        const double v0 = grid * per_cell;
        votes.push_back(v0);
        votes.push_back(spec.votes_per_unit - v0);
    }
    return ElectionMatrix(detail::sequence_labels('u', spec.n_units),
                          detail::sequence_labels('c', 2), std::move(votes));
}

// Three-candidate sampler: draw r0 ~ N(mu1, s1) and r1 ~ N(mu2, s2), clamp
// each to [0,1]; when r0 + r1 overflows 1, r1 takes the remainder; the third
// candidate takes the residual. No grid flooring; fractional vote weights
// are kept.
inline ElectionMatrix sample_three_candidate(const SyntheticSpec& spec) {
    validate_spec(spec, 2);
    GaussianStream draw(spec.seed);
    std::vector<double> votes;
    votes.reserve(static_cast<std::size_t>(spec.n_units) * 3);
    for (int k = 0; k < spec.n_units; ++k) {
        const double r0 = detail::clamp01(draw(spec.means[0], spec.sigmas[0]));
        double r1 = detail::clamp01(draw(spec.means[1], spec.sigmas[1]));
        if (r0 + r1 > 1.0) r1 = 1.0 - r0;
        double r2 = 1.0 - (r0 + r1);
        if (r2 < 0.0) r2 = 0.0;
        votes.push_back(spec.votes_per_unit * r0);
        votes.push_back(spec.votes_per_unit * r1);
        votes.push_back(spec.votes_per_unit * r2);
    }
    return ElectionMatrix(detail::sequence_labels('u', spec.n_units),
                          detail::sequence_labels('c', 3), std::move(votes));
}

// Stick-breaking generalization for property tests at larger N: candidates
// 1..n-1 are drawn sequentially with the same clamp-overflow rule, the last
// takes the residual. n == 2 matches the two-candidate sampler minus the
// 0.01-grid flooring; n == 3 matches the three-candidate sampler exactly.
inline ElectionMatrix sample_n_candidate(int n_candidates, const SyntheticSpec& spec) {
    if (n_candidates < 2) fail(errc::invalid_spec, "need at least 2 candidates");
    validate_spec(spec, static_cast<std::size_t>(n_candidates) - 1);
    GaussianStream draw(spec.seed);
    std::vector<double> votes;
    votes.reserve(static_cast<std::size_t>(spec.n_units) * n_candidates);
    for (int k = 0; k < spec.n_units; ++k) {
        double used = 0.0;
        for (int j = 0; j + 1 < n_candidates; ++j) {
            double r = detail::clamp01(draw(spec.means[j], spec.sigmas[j]));
            if (used + r > 1.0) r = 1.0 - used;
            used += r;
            votes.push_back(spec.votes_per_unit * r);
        }
        double residual = 1.0 - used;
        if (residual < 0.0) residual = 0.0;
        votes.push_back(spec.votes_per_unit * residual);
    }
    return ElectionMatrix(detail::sequence_labels('u', spec.n_units),
                          detail::sequence_labels('c', n_candidates), std::move(votes));
}

} // namespace epec
