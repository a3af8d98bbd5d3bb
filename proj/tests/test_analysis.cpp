#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>

#include "epec/analysis.hpp"
#include "epec/synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using Catch::Matchers::WithinAbs;
using epec::StateWinners;

namespace {

constexpr double kTol = 1e-9;

} // namespace

TEST_CASE("pearson forced values") {
    const std::vector<double> xs{1, 2, 3};
    const std::vector<double> linear{3, 5, 7};
    CHECK_THAT(epec::pearson(xs, linear), WithinAbs(1.0, 1e-12));
    const std::vector<double> negated{-1, -2, -3};
    CHECK_THAT(epec::pearson(xs, negated), WithinAbs(-1.0, 1e-12));
    const std::vector<double> ys{1, 3, 2};
    CHECK_THAT(epec::pearson(xs, ys), WithinAbs(0.5, 1e-12));
    CHECK_THAT(epec::pearson(xs, ys), WithinAbs(oracle::pearson({1, 2, 3}, {1, 3, 2}), 1e-15));
}

TEST_CASE("pearson errors") {
    const std::vector<double> xs{1, 2, 3};
    CHECK_THROWS_AS(epec::pearson(xs, std::vector<double>{1, 2}), epec::Error);
    CHECK_THROWS_AS(epec::pearson(std::vector<double>{1, 2}, std::vector<double>{3, 4}),
                    epec::Error);
    CHECK_THROWS_AS(epec::pearson(xs, std::vector<double>{5, 5, 5}), epec::Error);
}

TEST_CASE("pearson symmetry and positive-affine invariance") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> val(-5.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> xs, ys;
        for (int i = 0; i < 12; ++i) {
            xs.push_back(val(rng));
            ys.push_back(val(rng));
        }
        const double rho = epec::pearson(xs, ys);
        CHECK_THAT(epec::pearson(ys, xs), WithinAbs(rho, 1e-12));
        std::vector<double> mapped;
        for (double x : xs) mapped.push_back(2.5 * x + 3.0);
        CHECK_THAT(epec::pearson(mapped, ys), WithinAbs(rho, 1e-9));
    }
}

TEST_CASE("standardize forced values and idempotence") {
    const auto z = epec::standardize(std::vector<double>{1, 2, 3});
    REQUIRE(z.size() == 3);
    CHECK_THAT(z[0], WithinAbs(-1.0, 1e-12));
    CHECK_THAT(z[1], WithinAbs(0.0, 1e-12));
    CHECK_THAT(z[2], WithinAbs(1.0, 1e-12));

    const auto again = epec::standardize(z);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK_THAT(again[i], WithinAbs(z[i], 1e-12));

    double mean = 0.0, ss = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    for (double v : z) ss += (v - mean) * (v - mean);
    CHECK_THAT(mean, WithinAbs(0.0, 1e-12));
    CHECK_THAT(std::sqrt(ss / (z.size() - 1)), WithinAbs(1.0, 1e-12));

    CHECK_THROWS_AS(epec::standardize(std::vector<double>{4, 4, 4}), epec::Error);
}

TEST_CASE("swing classification basics") {
    const auto partisan = epec::classify_swing(
        std::vector<StateWinners>{{"UT", {"R", "R", "R", "R"}}});
    REQUIRE(partisan.size() == 1);
    CHECK_FALSE(partisan[0].is_swing());
    CHECK(partisan[0].label() == "PARTISAN(R)");

    const auto swing = epec::classify_swing(
        std::vector<StateWinners>{{"NC", {"D", "R", "D", "D"}}});
    CHECK(swing[0].is_swing());
    CHECK(swing[0].label() == "SWING");

    CHECK_THROWS_AS(
        epec::classify_swing(std::vector<StateWinners>{{"XX", {"R", "R", "R"}}}),
        epec::Error);
}

TEST_CASE("the 2008-2020 winner table reproduces the ten swing states") {
    const auto labels = epec::classify_swing(fixtures::winner_table());
    std::set<std::string> swing;
    for (const auto& l : labels)
        if (l.is_swing()) swing.insert(l.state);
    const std::set<std::string> expected(fixtures::swing_states().begin(),
                                         fixtures::swing_states().end());
    CHECK(swing == expected);
}

TEST_CASE("mass polarization forced values") {
    epec::MassPolarizationInput input;
    input.responses = {
        {"NC", 2020, epec::Party::democrat, 3, 1.0},
        {"NC", 2020, epec::Party::democrat, 1, 1.0},
        {"NC", 2020, epec::Party::republican, 2, 1.0},
    };
    const auto score = epec::mass_polarization(input, "NC", 2020);
    CHECK_THAT(score.ideology_dem, WithinAbs(2.0, kTol));
    CHECK_THAT(score.ideology_rep, WithinAbs(2.0, kTol));
    CHECK_THAT(score.pp, WithinAbs(0.0, kTol));

    epec::MassPolarizationInput single;
    single.responses = {
        {"OH", 2016, epec::Party::democrat, 3, 2.5},
        {"OH", 2016, epec::Party::republican, 3, 0.7},
    };
    CHECK_THAT(epec::mass_polarization(single, "OH", 2016).pp, WithinAbs(0.0, kTol));

    epec::MassPolarizationInput spread;
    spread.responses = {
        {"WI", 2012, epec::Party::democrat, 3, 1.0},
        {"WI", 2012, epec::Party::democrat, 2, 1.0},
        {"WI", 2012, epec::Party::republican, 2, 1.0},
        {"WI", 2012, epec::Party::republican, 1, 1.0},
    };
    const auto s = epec::mass_polarization(spread, "WI", 2012);
    CHECK_THAT(s.ideology_dem, WithinAbs(2.5, kTol));
    CHECK_THAT(s.ideology_rep, WithinAbs(1.5, kTol));
    CHECK_THAT(s.pp, WithinAbs(1.0, kTol));
}

TEST_CASE("mass polarization errors and weight-scale invariance") {
    epec::MassPolarizationInput input;
    input.responses = {
        {"TX", 2020, epec::Party::democrat, 3, 0.4},
        {"TX", 2020, epec::Party::democrat, 1, 1.8},
        {"TX", 2020, epec::Party::republican, 2, 0.9},
        {"TX", 2020, epec::Party::republican, 3, 0.5},
    };
    const auto base = epec::mass_polarization(input, "TX", 2020);
    epec::MassPolarizationInput scaled = input;
    for (auto& r : scaled.responses)
        if (r.party == epec::Party::democrat) r.weight *= 13.0;
    const auto rescaled = epec::mass_polarization(scaled, "TX", 2020);
    CHECK_THAT(rescaled.pp, WithinAbs(base.pp, 1e-12));

    CHECK_THROWS_MATCHES(epec::mass_polarization(input, "CA", 2020), epec::Error,
                         Catch::Matchers::Predicate<epec::Error>([](const epec::Error& e) {
                             return e.code() == epec::errc::missing_party;
                         }));

    epec::MassPolarizationInput zeros;
    zeros.responses = {
        {"TX", 2020, epec::Party::democrat, 3, 0.0},
        {"TX", 2020, epec::Party::republican, 2, 1.0},
    };
    CHECK_THROWS_MATCHES(epec::mass_polarization(zeros, "TX", 2020), epec::Error,
                         Catch::Matchers::Predicate<epec::Error>([](const epec::Error& e) {
                             return e.code() == epec::errc::all_weights_zero;
                         }));
}

TEST_CASE("the pid7 mapping is exactly the fixed seven-point scale") {
    CHECK(epec::pid7_score("Strong Democrat") == -3);
    CHECK(epec::pid7_score("Not Very Strong Democrat") == -2);
    CHECK(epec::pid7_score("Lean Democrat") == -1);
    CHECK(epec::pid7_score("Independent") == 0);
    CHECK(epec::pid7_score("Lean Republican") == 1);
    CHECK(epec::pid7_score("Not Very Strong Republican") == 2);
    CHECK(epec::pid7_score("Strong Republican") == 3);
    CHECK_FALSE(epec::pid7_score("Not sure").has_value());

    const auto r = epec::survey_response_from_pid7("PA", 2016, "Strong Democrat", 2.0);
    REQUIRE(r.has_value());
    CHECK(r->party == epec::Party::democrat);
    CHECK(r->strength == 3);
    CHECK_FALSE(epec::survey_response_from_pid7("PA", 2016, "Independent", 2.0).has_value());
    CHECK_FALSE(epec::survey_response_from_pid7("PA", 2016, "Not sure", 2.0).has_value());
}

namespace {

// Synthetic multi-region election: `n_regions` regions, each with several
// units; candidate strengths vary by region so EP/EC vary across regions.
std::vector<epec::VoteRecord> synthetic_region_records(int n_regions, int n_candidates,
                                                       std::uint64_t seed,
                                                       const std::vector<double>& national_weight) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> tilt(0.5, 2.0);
    std::uniform_int_distribution<int> base(50, 400);
    std::vector<epec::VoteRecord> records;
    for (int g = 0; g < n_regions; ++g) {
        std::vector<double> region_tilt(n_candidates);
        for (int c = 0; c < n_candidates; ++c) region_tilt[c] = tilt(rng);
        for (int u = 0; u < 6; ++u) {
            const std::string id =
                "G" + std::to_string(g) + "|u" + std::to_string(u);
            for (int c = 0; c < n_candidates; ++c) {
                const double unit_noise = tilt(rng);
                const double v = std::floor(base(rng) * national_weight[c] * region_tilt[c] *
                                            unit_noise);
                records.push_back({id, "cand" + std::to_string(c), v, c + 1, true, 0.0});
            }
        }
    }
    return records;
}

} // namespace

TEST_CASE("robustness pairs: identical variants correlate at 1") {
    std::vector<epec::RegionMetrics> a;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> val(0.1, 0.9);
    for (int g = 0; g < 10; ++g)
        a.push_back({"G" + std::to_string(g), val(rng), val(rng)});
    const auto result = epec::robustness_pairs(a, a, epec::Protocol::aggregation);
    CHECK_THAT(result.rho_ep, WithinAbs(1.0, 1e-12));
    CHECK_THAT(result.rho_ec, WithinAbs(1.0, 1e-12));
    CHECK(result.n == 10);
}

TEST_CASE("robustness pairs: mismatched regions are rejected") {
    std::vector<epec::RegionMetrics> a{{"G0", 0.1, 0.2}, {"G1", 0.3, 0.4}, {"G2", 0.5, 0.6}};
    std::vector<epec::RegionMetrics> b{{"G0", 0.1, 0.2}, {"G1", 0.3, 0.4}, {"G9", 0.5, 0.6}};
    CHECK_THROWS_MATCHES(epec::robustness_pairs(a, b, epec::Protocol::rounds), epec::Error,
                         Catch::Matchers::Predicate<epec::Error>([](const epec::Error& e) {
                             return e.code() == epec::errc::region_mismatch;
                         }));
}

TEST_CASE("robustness pairs: shuffled values lose the correlation") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    std::vector<epec::RegionMetrics> a, b;
    for (int g = 0; g < 40; ++g) {
        const std::string region = "G" + std::to_string(g);
        a.push_back({region, val(rng), val(rng)});
    }
    b = a;
    std::vector<int> perm(b.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < b.size(); ++i) {
        b[i].ep = a[perm[i]].ep;
        b[i].ec = a[perm[i]].ec;
    }
    const auto result = epec::robustness_pairs(a, b, epec::Protocol::election_type);
    CHECK(std::fabs(result.rho_ep) < 0.5);
    CHECK(std::fabs(result.rho_ec) < 0.5);
}

TEST_CASE("aggregation protocol: exact subdivision gives rho 1") {
    // County shares vary by region; precincts are exact halves of their
    // county, so regional EP/EC at precinct and county level coincide.
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> votes(100, 999);
    std::vector<epec::VoteRecord> precinct_records;
    for (int g = 0; g < 8; ++g) {
        for (int county = 0; county < 5; ++county) {
            std::vector<double> county_votes(3);
            for (auto& v : county_votes) v = 2.0 * votes(rng);
            for (int p = 0; p < 2; ++p) {
                const std::string id = "G" + std::to_string(g) + "|c" + std::to_string(county) +
                                       "|p" + std::to_string(p);
                for (int c = 0; c < 3; ++c)
                    precinct_records.push_back(
                        {id, "cand" + std::to_string(c), county_votes[c] / 2.0, c + 1, true, 0.0});
            }
        }
    }
    const auto precincts = epec::build_matrix(precinct_records);
    const auto counties = epec::reaggregate(precincts, std::nullopt, 2);
    const auto by_precinct = epec::regional_metrics(precincts, 1);
    const auto by_county = epec::regional_metrics(counties, 1);
    const auto result =
        epec::robustness_pairs(by_precinct, by_county, epec::Protocol::aggregation);
    CHECK_THAT(result.rho_ep, WithinAbs(1.0, 1e-9));
    CHECK_THAT(result.rho_ec, WithinAbs(1.0, 1e-9));
}

TEST_CASE("top-N sweep: rho is 1 at n = N and coverage never decreases") {
    const auto records = synthetic_region_records(6, 5, 101, {1.0, 0.8, 0.6, 0.4, 0.2});
    const auto points = epec::robustness_top_n(records, 5);
    REQUIRE(points.size() == 4); // n = 2..5
    const auto& last = points.back();
    CHECK(last.n == 5);
    CHECK_THAT(last.rho_ep, WithinAbs(1.0, 1e-12));
    CHECK_THAT(last.rho_ec, WithinAbs(1.0, 1e-12));
    CHECK_THAT(last.coverage, WithinAbs(1.0, 1e-12));
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        CHECK(points[i].coverage <= points[i + 1].coverage + 1e-12);
}

TEST_CASE("top-N sweep: negligible tail candidates converge early") {
    // Candidates 4-5 hold well under 1% of the vote each.
    const auto records =
        synthetic_region_records(8, 5, 55, {1.0, 0.9, 0.8, 0.004, 0.003});
    const auto points = epec::robustness_top_n(records, 5);
    REQUIRE(points.size() == 4);
    CHECK(points[1].n == 3);
    CHECK(points[1].rho_ep >= 0.99);
    CHECK(points[1].coverage > 0.98);
}

TEST_CASE("regression export shape and standardization") {
    std::vector<epec::MetricRow> metrics{
        {"G1", 2016, 0.8, 0.5}, {"G1", 2020, 0.9, 0.45}, {"G2", 2016, 0.6, 0.7},
        {"G2", 2020, 0.7, 0.65},
    };
    epec::CovariateTable covariates;
    covariates.names = {"gini"};
    covariates.values[{"G1", 2016}] = {0.41};
    covariates.values[{"G1", 2020}] = {0.44};
    covariates.values[{"G2", 2016}] = {0.38};
    covariates.values[{"G2", 2020}] = {0.39};

    const auto table = epec::export_regression_table(metrics, covariates);
    REQUIRE(table.rows.size() == 4);
    CHECK(table.header() == std::vector<std::string>{"region", "year", "ep_z", "ec_z", "gini"});
    CHECK(table.skipped_keys.empty());

    double mean_ep = 0.0, mean_cov = 0.0;
    for (const auto& row : table.rows) {
        mean_ep += row.ep_z;
        mean_cov += row.covariates_z[0];
    }
    CHECK_THAT(mean_ep / 4.0, WithinAbs(0.0, kTol));
    CHECK_THAT(mean_cov / 4.0, WithinAbs(0.0, kTol));

    // Deterministic row order: sorted by (region, year).
    CHECK(table.rows[0].region == "G1");
    CHECK(table.rows[0].year == 2016);
    CHECK(table.rows[3].region == "G2");
    CHECK(table.rows[3].year == 2020);
}

TEST_CASE("regression export reports and omits keys without covariates") {
    std::vector<epec::MetricRow> metrics{
        {"G1", 2016, 0.8, 0.5}, {"G1", 2020, 0.9, 0.45}, {"G2", 2016, 0.6, 0.7},
        {"G2", 2020, 0.7, 0.65},
    };
    epec::CovariateTable covariates;
    covariates.names = {"gini", "density"};
    covariates.values[{"G1", 2016}] = {0.41, 100.0};
    covariates.values[{"G1", 2020}] = {0.44, 120.0};
    covariates.values[{"G2", 2020}] = {0.39, 200.0};

    const auto table = epec::export_regression_table(metrics, covariates);
    REQUIRE(table.skipped_keys.size() == 1);
    CHECK(table.skipped_keys[0] == std::make_pair(std::string("G2"), 2016));
    CHECK(table.rows.size() == 3);
    // Covariate columns are alphabetical after the fixed prefix.
    CHECK(table.header() ==
          std::vector<std::string>{"region", "year", "ep_z", "ec_z", "density", "gini"});

    CHECK_THROWS_AS(
        epec::export_regression_table(
            std::vector<epec::MetricRow>{{"G1", 2016, 0.8, 0.5}, {"G1", 2016, 0.9, 0.45}},
            covariates),
        epec::Error);
}
