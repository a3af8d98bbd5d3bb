#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "epec/election.hpp"
#include "epec/error.hpp"
#include "epec/metrics.hpp"
#include "epec/pipeline.hpp"

namespace epec {

// ---------------------------------------------------------------------------
// Statistics kernels
// ---------------------------------------------------------------------------

// Pearson product-moment correlation. Both series must have the same length
// (>= 3) and be non-constant. The result is clamped into [-1, 1] against
// floating-point residue.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        fail(errc::length_mismatch, "series have lengths " + std::to_string(xs.size()) + " and " +
                                        std::to_string(ys.size()));
    const std::size_t n = xs.size();
    if (n < 3) fail(errc::too_few_points, "need at least 3 points, got " + std::to_string(n));
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) fail(errc::constant_series, "a constant series has no correlation");
    return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

// Z-scores a series: subtract the mean, divide by the sample (n-1) standard
// deviation.
inline std::vector<double> standardize(std::span<const double> xs) {
    if (xs.size() < 2)
        fail(errc::too_few_points, "need at least 2 points to standardize");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    if (ss == 0.0) fail(errc::constant_series, "cannot standardize a constant series");
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back((x - mean) / sd);
    return out;
}

// ---------------------------------------------------------------------------
// Swing-state classification
// ---------------------------------------------------------------------------

struct StateWinners {
    std::string state;
    std::vector<std::string> winners; // party labels of the 4 reference elections
};

// SWING when both parties appear among the four winners, otherwise
// PARTISAN(party).
struct SwingLabel {
    std::string state;
    std::array<std::string, 4> winners;
    std::optional<std::string> partisan_party; // empty = SWING

    bool is_swing() const { return !partisan_party.has_value(); }
    std::string label() const {
        return is_swing() ? std::string("SWING") : "PARTISAN(" + *partisan_party + ")";
    }
};

inline std::vector<SwingLabel> classify_swing(std::span<const StateWinners> winners_by_state) {
    std::vector<SwingLabel> out;
    out.reserve(winners_by_state.size());
    for (const StateWinners& sw : winners_by_state) {
        if (sw.winners.size() != 4)
            fail(errc::wrong_winner_count, "state '" + sw.state + "' has " +
                                               std::to_string(sw.winners.size()) +
                                               " winners, expected 4");
        SwingLabel label;
        label.state = sw.state;
        std::set<std::string> parties;
        for (std::size_t i = 0; i < 4; ++i) {
            if (sw.winners[i].empty())
                fail(errc::wrong_winner_count, "state '" + sw.state + "' has an empty winner");
            label.winners[i] = sw.winners[i];
            parties.insert(sw.winners[i]);
        }
        if (parties.size() == 1) label.partisan_party = *parties.begin();
        out.push_back(std::move(label));
    }
    std::sort(out.begin(), out.end(),
              [](const SwingLabel& a, const SwingLabel& b) { return a.state < b.state; });
    return out;
}

// ---------------------------------------------------------------------------
// Mass polarization (CES pid7)
// ---------------------------------------------------------------------------

enum class Party { democrat = 1, republican = 2 };

struct SurveyResponse {
    std::string region;
    int year = 0;
    Party party = Party::democrat;
    int strength = 0; // 1 = Lean, 2 = Not very strong, 3 = Strong
    double weight = 0.0;
};

struct MassPolarizationInput {
    std::vector<SurveyResponse> responses;
};

struct MassPolarizationScore {
    double ideology_dem = 0.0;
    double ideology_rep = 0.0;
    double pp = 0.0; // |ideology_dem - ideology_rep|
};

// The fixed 7-point partisan-identity mapping. "Not sure" maps to nothing.
inline std::optional<int> pid7_score(std::string_view label) {
    if (label == "Strong Democrat") return -3;
    if (label == "Not Very Strong Democrat") return -2;
    if (label == "Lean Democrat") return -1;
    if (label == "Independent") return 0;
    if (label == "Lean Republican") return 1;
    if (label == "Not Very Strong Republican") return 2;
    if (label == "Strong Republican") return 3;
    return std::nullopt; // "Not sure" and anything unrecognized
}

// Splits a pid7 label into a party-strength response; Independents and
// "Not sure" carry no partisan identity and yield nothing.
inline std::optional<SurveyResponse> survey_response_from_pid7(std::string_view region, int year,
                                                               std::string_view pid7_label,
                                                               double weight) {
    const auto score = pid7_score(pid7_label);
    if (!score || *score == 0) return std::nullopt;
    SurveyResponse r;
    r.region = std::string(region);
    r.year = year;
    r.party = *score < 0 ? Party::democrat : Party::republican;
    r.strength = std::abs(*score);
    r.weight = weight;
    return r;
}

// Weighted mean partisan-identity strength per party within (region, year);
// weights are normalized to sum 1 within each (party, region, year) cell so
// cells of different sample sizes are comparable.
inline MassPolarizationScore mass_polarization(const MassPolarizationInput& input,
                                               std::string_view region, int year) {
    double w_dem = 0.0, sw_dem = 0.0;
    double w_rep = 0.0, sw_rep = 0.0;
    bool seen_dem = false, seen_rep = false;
    for (const SurveyResponse& r : input.responses) {
        if (r.region != region || r.year != year) continue;
        if (r.weight < 0.0 || !std::isfinite(r.weight))
            fail(errc::invalid_spec, "response weights must be non-negative");
        if (r.strength < 1 || r.strength > 3)
            fail(errc::invalid_spec, "strength scores must be in 1..3");
        if (r.party == Party::democrat) {
            seen_dem = true;
            w_dem += r.weight;
            sw_dem += r.strength * r.weight;
        } else {
            seen_rep = true;
            w_rep += r.weight;
            sw_rep += r.strength * r.weight;
        }
    }
    const std::string cell = "(" + std::string(region) + ", " + std::to_string(year) + ")";
    if (!seen_dem || !seen_rep)
        fail(errc::missing_party,
             "no " + std::string(!seen_dem ? "Democratic" : "Republican") + " responses in " + cell);
    if (w_dem == 0.0 || w_rep == 0.0)
        fail(errc::all_weights_zero, "all weights are zero for a party in " + cell);
    MassPolarizationScore score;
    score.ideology_dem = sw_dem / w_dem;
    score.ideology_rep = sw_rep / w_rep;
    score.pp = std::fabs(score.ideology_dem - score.ideology_rep);
    return score;
}

// ---------------------------------------------------------------------------
// Robustness harness
// ---------------------------------------------------------------------------

enum class Protocol { aggregation, abstentions, election_type, rounds, top_n, enp_subset };

inline const char* protocol_name(Protocol p) noexcept {
    switch (p) {
        case Protocol::aggregation: return "AGGREGATION";
        case Protocol::abstentions: return "ABSTENTIONS";
        case Protocol::election_type: return "ELECTION_TYPE";
        case Protocol::rounds: return "ROUNDS";
        case Protocol::top_n: return "TOP_N";
        case Protocol::enp_subset: return "ENP_SUBSET";
    }
    return "UNKNOWN";
}

struct RegionMetrics {
    std::string region;
    double ep = 0.0;
    double ec = 0.0;
};

struct RegionPair {
    std::string region;
    double a_ep = 0.0, a_ec = 0.0;
    double b_ep = 0.0, b_ec = 0.0;
};

struct RobustnessResult {
    Protocol protocol = Protocol::aggregation;
    std::vector<RegionPair> pairs;
    double rho_ep = 0.0;
    double rho_ec = 0.0;
    int n = 0;
};

// EP/EC per region: the matrix is split at `region_level` and each region is
// scored as its own election.
inline std::vector<RegionMetrics> regional_metrics(const ElectionMatrix& m, int region_level,
                                                   char separator = '|') {
    std::vector<RegionMetrics> out;
    for (const auto& [region, sub] : split_units(m, region_level, separator)) {
        const AntagonismReport report = polarization_report(sub);
        out.push_back({region, report.ep, report.ec});
    }
    return out;
}

// Correlates two per-region metric variants. Region key sets must match and
// hold at least 3 regions.
inline RobustnessResult robustness_pairs(std::span<const RegionMetrics> variant_a,
                                         std::span<const RegionMetrics> variant_b,
                                         Protocol protocol) {
    std::map<std::string, const RegionMetrics*> b_index;
    for (const RegionMetrics& rm : variant_b) b_index[rm.region] = &rm;
    if (variant_a.size() != variant_b.size() || b_index.size() != variant_b.size())
        fail(errc::region_mismatch, "variants cover different region sets");

    RobustnessResult result;
    result.protocol = protocol;
    std::vector<double> a_ep, b_ep, a_ec, b_ec;
    for (const RegionMetrics& a : variant_a) {
        auto it = b_index.find(a.region);
        if (it == b_index.end())
            fail(errc::region_mismatch, "region '" + a.region + "' is missing from variant B");
        result.pairs.push_back({a.region, a.ep, a.ec, it->second->ep, it->second->ec});
        a_ep.push_back(a.ep);
        b_ep.push_back(it->second->ep);
        a_ec.push_back(a.ec);
        b_ec.push_back(it->second->ec);
    }
    std::sort(result.pairs.begin(), result.pairs.end(),
              [](const RegionPair& x, const RegionPair& y) { return x.region < y.region; });
    result.n = static_cast<int>(result.pairs.size());
    if (result.n < 3) fail(errc::too_few_points, "need at least 3 regions");
    result.rho_ep = pearson(a_ep, b_ep);
    result.rho_ec = pearson(a_ec, b_ec);
    return result;
}

struct TopNPoint {
    int n = 0;
    double coverage = 0.0; // cumulative national vote share of the retained candidates
    double rho_ep = 0.0;
    double rho_ec = 0.0;
};

struct TopNConfig {
    int region_level = 1;
    std::optional<int> unit_level;                             // nullopt = full polling_id
    AbstentionMode abstentions = AbstentionMode::exclude;
    char separator = '|';
};

// Top-N convergence: for each n in 2..max_n, regional EP/EC under top-n
// curation are correlated with the all-candidates values.
inline std::vector<TopNPoint> robustness_top_n(std::span<const VoteRecord> records, int max_n,
                                               const TopNConfig& config = {}) {
    CurationConfig base;
    base.abstention_mode = config.abstentions;
    base.aggregation_level = config.unit_level;
    base.separator = config.separator;

    const ElectionMatrix all = curate(records, base);
    if (all.n_candidates() < 3)
        fail(errc::too_few_points, "top-N sweep needs at least 3 candidates");
    const std::vector<RegionMetrics> baseline =
        regional_metrics(all, config.region_level, config.separator);
    if (baseline.size() < 3) fail(errc::too_few_points, "top-N sweep needs at least 3 regions");

    // National ranking drives both retention and the coverage column.
    std::vector<std::pair<double, std::string>> ranked;
    for (int i = 0; i < all.n_candidates(); ++i)
        ranked.emplace_back(all.candidate_total(i), all.candidates()[i]);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::vector<TopNPoint> out;
    if (max_n < 2) return out;
    std::vector<double> base_ep, base_ec;
    for (const RegionMetrics& rm : baseline) {
        base_ep.push_back(rm.ep);
        base_ec.push_back(rm.ec);
    }
    for (int n = 2; n <= max_n; ++n) {
        CurationConfig variant = base;
        variant.top_n = n;
        const ElectionMatrix curated = curate(records, variant);
        const std::vector<RegionMetrics> metrics =
            regional_metrics(curated, config.region_level, config.separator);
        const RobustnessResult corr = robustness_pairs(baseline, metrics, Protocol::top_n);

        double covered = 0.0;
        for (int i = 0; i < std::min<int>(n, static_cast<int>(ranked.size())); ++i)
            covered += ranked[i].first;
        out.push_back({n, covered / all.total_votes(), corr.rho_ep, corr.rho_ec});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Regression-ready export
// ---------------------------------------------------------------------------

struct MetricRow {
    std::string region;
    int year = 0;
    double ep = 0.0;
    double ec = 0.0;
};

// Covariates keyed by (region, year); one value per named column.
struct CovariateTable {
    std::vector<std::string> names;
    std::map<std::pair<std::string, int>, std::vector<double>> values;
};

// One row per (region, year) with z-scored EP, EC and covariates; rows with
// missing covariates are omitted and reported. Column order is fixed:
// region, year, ep_z, ec_z, then covariates alphabetically.
struct RegressionTable {
    std::vector<std::string> covariate_names;
    struct Row {
        std::string region;
        int year = 0;
        double ep_z = 0.0;
        double ec_z = 0.0;
        std::vector<double> covariates_z;
    };
    std::vector<Row> rows;
    std::vector<std::pair<std::string, int>> skipped_keys;

    std::vector<std::string> header() const {
        std::vector<std::string> h{"region", "year", "ep_z", "ec_z"};
        h.insert(h.end(), covariate_names.begin(), covariate_names.end());
        return h;
    }
};

inline RegressionTable export_regression_table(std::span<const MetricRow> metrics,
                                               const CovariateTable& covariates) {
    if (metrics.empty()) fail(errc::empty_input, "no metric rows");

    RegressionTable table;
    std::vector<std::size_t> column_order(covariates.names.size());
    for (std::size_t i = 0; i < column_order.size(); ++i) column_order[i] = i;
    std::sort(column_order.begin(), column_order.end(), [&](std::size_t a, std::size_t b) {
        return covariates.names[a] < covariates.names[b];
    });
    for (std::size_t i : column_order) table.covariate_names.push_back(covariates.names[i]);

    std::vector<MetricRow> ordered(metrics.begin(), metrics.end());
    std::sort(ordered.begin(), ordered.end(), [](const MetricRow& a, const MetricRow& b) {
        return std::tie(a.region, a.year) < std::tie(b.region, b.year);
    });
    std::set<std::pair<std::string, int>> seen;
    for (const MetricRow& row : ordered) {
        if (!seen.insert({row.region, row.year}).second)
            fail(errc::key_mismatch,
                 "duplicate metrics for (" + row.region + ", " + std::to_string(row.year) + ")");
    }

    std::vector<const MetricRow*> included;
    for (const MetricRow& row : ordered) {
        auto it = covariates.values.find({row.region, row.year});
        if (it == covariates.values.end() || it->second.size() != covariates.names.size()) {
            table.skipped_keys.emplace_back(row.region, row.year);
            continue;
        }
        included.push_back(&row);
    }
    if (included.empty()) fail(errc::key_mismatch, "no (region, year) keys matched the covariates");

    std::vector<double> ep_col, ec_col;
    for (const MetricRow* row : included) {
        ep_col.push_back(row->ep);
        ec_col.push_back(row->ec);
    }
    const std::vector<double> ep_z = standardize(ep_col);
    const std::vector<double> ec_z = standardize(ec_col);

    std::vector<std::vector<double>> cov_z;
    for (std::size_t c : column_order) {
        std::vector<double> col;
        for (const MetricRow* row : included)
            col.push_back(covariates.values.at({row->region, row->year})[c]);
        cov_z.push_back(standardize(col));
    }

    for (std::size_t r = 0; r < included.size(); ++r) {
        RegressionTable::Row row;
        row.region = included[r]->region;
        row.year = included[r]->year;
        row.ep_z = ep_z[r];
        row.ec_z = ec_z[r];
        for (const std::vector<double>& col : cov_z) row.covariates_z.push_back(col[r]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace epec
