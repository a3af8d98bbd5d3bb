#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "epec/error.hpp"

namespace epec {

// One candidate's result in one voting unit; mirrors one row of the
// unified results-file schema.
//
// `value` carries integer counts for real election data; synthetic
// generators may emit fractional vote weights, which every metric accepts.
// `is_real_candidate` is false for abstention/blank/null pseudo-rows.
struct VoteRecord {
    std::string polling_id;
    std::string candidate;
    double value = 0.0;
    int rank = 0; // 1-based within the unit
    bool is_real_candidate = true;
    double rate = 0.0; // fraction of unit votes, in [0,1]
};

// Metadata row for one voting unit. `levels` holds the territorial
// components in hierarchy order; joined with the separator they must
// reproduce polling_id. `value`/`rate` are preserved opaquely.
struct LocationRecord {
    std::string polling_id;
    std::vector<std::string> levels;
    double value = 0.0;
    double rate = 0.0;
};

// Selects the aggregation level when grouping records into units.
//   level == nullopt : the full polling_id (finest granularity)
//   level == 0       : a single national unit (empty key)
//   level == k >= 1  : the first k components of polling_id
struct UnitKey {
    std::optional<int> level;
    char separator = '|';
};

inline std::vector<std::string> split_polling_id(std::string_view id, char separator) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = id.find(separator, start);
        if (pos == std::string_view::npos) {
            parts.emplace_back(id.substr(start));
            break;
        }
        parts.emplace_back(id.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

// Prefix of `id` at the requested level. Throws MalformedPollingId when the
// id has fewer components than the level asks for.
inline std::string unit_at_level(std::string_view id, const UnitKey& key) {
    if (!key.level.has_value()) return std::string(id);
    int level = *key.level;
    if (level < 0) fail(errc::invalid_spec, "aggregation level must be >= 0");
    if (level == 0) return std::string();
    std::size_t pos = 0;
    for (int i = 1; i < level; ++i) {
        pos = id.find(key.separator, pos);
        if (pos == std::string_view::npos)
            fail(errc::malformed_polling_id,
                 "polling_id '" + std::string(id) + "' has fewer than " +
                     std::to_string(level) + " levels");
        ++pos;
    }
    std::size_t end = id.find(key.separator, pos);
    return std::string(id.substr(0, end == std::string_view::npos ? id.size() : end));
}

// Validated M-units x N-candidates vote table with derived shares.
// Immutable after construction; shares and overall shares are always
// recomputed from the vote counts. Units with zero total votes are kept
// with all-zero shares and contribute nothing to any weighted sum.
class ElectionMatrix {
public:
    // `votes` is unit-major: votes[k * N + i] is candidate i in unit k.
    ElectionMatrix(std::vector<std::string> units, std::vector<std::string> candidates,
                   std::vector<double> votes)
        : units_(std::move(units)), candidates_(std::move(candidates)), votes_(std::move(votes)) {
        const std::size_t m = units_.size();
        const std::size_t n = candidates_.size();
        if (n < 2) fail(errc::invalid_spec, "an election needs at least 2 candidates");
        if (m < 1) fail(errc::empty_input, "an election needs at least 1 unit");
        if (votes_.size() != m * n)
            fail(errc::invalid_spec, "vote table size does not match units x candidates");
        for (double v : votes_) {
            if (!(v >= 0.0) || !std::isfinite(v))
                fail(errc::negative_votes, "vote counts must be finite and non-negative");
        }

        shares_.assign(m * n, 0.0);
        unit_totals_.assign(m, 0.0);
        candidate_totals_.assign(n, 0.0);
        double grand_total = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            double t = 0.0;
            for (std::size_t i = 0; i < n; ++i) t += votes_[k * n + i];
            unit_totals_[k] = t;
            grand_total += t;
            if (t > 0.0) {
                for (std::size_t i = 0; i < n; ++i) shares_[k * n + i] = votes_[k * n + i] / t;
            } else {
                zero_total_units_.push_back(static_cast<int>(k));
            }
        }
        if (grand_total <= 0.0) fail(errc::empty_input, "election has no votes");
        overall_share_.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < m; ++k) candidate_totals_[i] += votes_[k * n + i];
            overall_share_[i] = candidate_totals_[i] / grand_total;
        }
        grand_total_ = grand_total;
    }

    int n_units() const { return static_cast<int>(units_.size()); }
    int n_candidates() const { return static_cast<int>(candidates_.size()); }

    double votes(int candidate, int unit) const {
        return votes_[static_cast<std::size_t>(unit) * candidates_.size() + candidate];
    }
    double share(int candidate, int unit) const {
        return shares_[static_cast<std::size_t>(unit) * candidates_.size() + candidate];
    }
    double overall_share(int candidate) const { return overall_share_[candidate]; }
    double candidate_total(int candidate) const { return candidate_totals_[candidate]; }
    double unit_total(int unit) const { return unit_totals_[unit]; }
    double total_votes() const { return grand_total_; }

    const std::vector<std::string>& units() const { return units_; }
    const std::vector<std::string>& candidates() const { return candidates_; }

    // Units whose total vote count is zero; they are retained but excluded
    // from every metric sum.
    const std::vector<int>& zero_total_units() const { return zero_total_units_; }

    std::optional<int> candidate_index(std::string_view label) const {
        for (std::size_t i = 0; i < candidates_.size(); ++i)
            if (candidates_[i] == label) return static_cast<int>(i);
        return std::nullopt;
    }

    friend bool operator==(const ElectionMatrix& a, const ElectionMatrix& b) {
        return a.units_ == b.units_ && a.candidates_ == b.candidates_ && a.votes_ == b.votes_;
    }

private:
    std::vector<std::string> units_;
    std::vector<std::string> candidates_;
    std::vector<double> votes_;
    std::vector<double> shares_;
    std::vector<double> overall_share_;
    std::vector<double> unit_totals_;
    std::vector<double> candidate_totals_;
    std::vector<int> zero_total_units_;
    double grand_total_ = 0.0;
};

// Groups records into units at the selected level and sums votes per
// (unit, candidate). Units and candidates are ordered lexicographically so
// the result is independent of the input row order. Candidates named in
// `candidates` are present even when no record mentions them.
inline ElectionMatrix build_matrix(std::span<const VoteRecord> records, const UnitKey& key = {},
                                   std::span<const std::string> candidates = {}) {
    if (records.empty()) fail(errc::empty_input, "no vote records");

    std::set<std::string> unit_set;
    std::set<std::string> candidate_set(candidates.begin(), candidates.end());
    for (const VoteRecord& r : records) {
        if (!(r.value >= 0.0) || !std::isfinite(r.value))
            fail(errc::negative_votes,
                 "negative vote count for '" + r.candidate + "' in unit '" + r.polling_id + "'");
        unit_set.insert(unit_at_level(r.polling_id, key));
        candidate_set.insert(r.candidate);
    }

    std::vector<std::string> units(unit_set.begin(), unit_set.end());
    std::vector<std::string> cands(candidate_set.begin(), candidate_set.end());
    std::map<std::string_view, int> unit_index;
    std::map<std::string_view, int> cand_index;
    for (std::size_t k = 0; k < units.size(); ++k) unit_index[units[k]] = static_cast<int>(k);
    for (std::size_t i = 0; i < cands.size(); ++i) cand_index[cands[i]] = static_cast<int>(i);

    const std::size_t n = cands.size();
    std::vector<double> votes(units.size() * n, 0.0);
    for (const VoteRecord& r : records) {
        const int k = unit_index.at(unit_at_level(r.polling_id, key));
        const int i = cand_index.at(r.candidate);
        votes[static_cast<std::size_t>(k) * n + i] += r.value;
    }
    return ElectionMatrix(std::move(units), std::move(cands), std::move(votes));
}

// Inverse of build_matrix for export: one row per (unit, candidate), ranked
// by votes within the unit (ties broken by label), rate = recomputed share.
inline std::vector<VoteRecord> matrix_to_records(const ElectionMatrix& m) {
    std::vector<VoteRecord> out;
    out.reserve(static_cast<std::size_t>(m.n_units()) * m.n_candidates());
    const int n = m.n_candidates();
    std::vector<int> order(n);
    for (int k = 0; k < m.n_units(); ++k) {
        for (int i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (m.votes(a, k) != m.votes(b, k)) return m.votes(a, k) > m.votes(b, k);
            return m.candidates()[a] < m.candidates()[b];
        });
        std::vector<int> rank(n);
        for (int pos = 0; pos < n; ++pos) rank[order[pos]] = pos + 1;
        for (int i = 0; i < n; ++i) {
            VoteRecord r;
            r.polling_id = m.units()[k];
            r.candidate = m.candidates()[i];
            r.value = m.votes(i, k);
            r.rank = rank[i];
            r.is_real_candidate = true;
            r.rate = m.share(i, k);
            out.push_back(std::move(r));
        }
    }
    return out;
}

// Kinds of invariant violations reported by validate().
enum class FindingKind {
    negative_votes,
    value_not_integer,
    rate_out_of_range,
    rate_sum_violation,
    rank_violation,
};

inline const char* finding_name(FindingKind k) noexcept {
    switch (k) {
        case FindingKind::negative_votes: return "NegativeVotes";
        case FindingKind::value_not_integer: return "ValueNotInteger";
        case FindingKind::rate_out_of_range: return "RateOutOfRange";
        case FindingKind::rate_sum_violation: return "RateSumViolation";
        case FindingKind::rank_violation: return "RankViolation";
    }
    return "Unknown";
}

struct Finding {
    FindingKind kind;
    std::string polling_id;
    std::string detail;
};

struct ValidationReport {
    std::vector<Finding> findings;
    bool clean() const { return findings.empty(); }
    int count(FindingKind k) const {
        int c = 0;
        for (const Finding& f : findings)
            if (f.kind == k) ++c;
        return c;
    }
};

// Pure check of the per-record and per-unit invariants; never mutates.
// Rate sums are checked over retained (real-candidate) rows only, against
// the stored rate column.
inline ValidationReport validate(std::span<const VoteRecord> records, double rate_tolerance = 1e-9) {
    ValidationReport report;
    std::map<std::string, std::vector<const VoteRecord*>> by_unit;
    for (const VoteRecord& r : records) by_unit[r.polling_id].push_back(&r);

    for (const auto& [unit, rows] : by_unit) {
        double rate_sum = 0.0;
        bool any_retained = false;
        std::vector<int> ranks;
        ranks.reserve(rows.size());
        for (const VoteRecord* r : rows) {
            if (r->value < 0.0 || !std::isfinite(r->value)) {
                report.findings.push_back({FindingKind::negative_votes, unit,
                                           "candidate '" + r->candidate + "' has value " +
                                               std::to_string(r->value)});
            } else if (r->value != std::floor(r->value)) {
                report.findings.push_back({FindingKind::value_not_integer, unit,
                                           "candidate '" + r->candidate + "' has non-integer value " +
                                               std::to_string(r->value)});
            }
            if (!(r->rate >= 0.0 && r->rate <= 1.0)) {
                report.findings.push_back({FindingKind::rate_out_of_range, unit,
                                           "candidate '" + r->candidate + "' has rate " +
                                               std::to_string(r->rate)});
            }
            if (r->is_real_candidate) {
                rate_sum += r->rate;
                any_retained = true;
            }
            ranks.push_back(r->rank);
        }
        if (any_retained && std::fabs(rate_sum - 1.0) > rate_tolerance) {
            report.findings.push_back({FindingKind::rate_sum_violation, unit,
                                       "retained rates sum to " + std::to_string(rate_sum)});
        }
        std::sort(ranks.begin(), ranks.end());
        for (std::size_t i = 0; i < ranks.size(); ++i) {
            if (ranks[i] != static_cast<int>(i) + 1) {
                report.findings.push_back({FindingKind::rank_violation, unit,
                                           "ranks are not a permutation of 1.." +
                                               std::to_string(ranks.size())});
                break;
            }
        }
    }
    return report;
}

// Partitions the matrix into one sub-election per unit-key prefix at
// `level`. Shares and overall shares are recomputed within each group.
// Groups without any votes are dropped.
inline std::vector<std::pair<std::string, ElectionMatrix>>
split_units(const ElectionMatrix& m, int level, char separator = '|') {
    UnitKey key{level, separator};
    std::map<std::string, std::vector<int>> groups;
    for (int k = 0; k < m.n_units(); ++k)
        groups[unit_at_level(m.units()[k], key)].push_back(k);

    std::vector<std::pair<std::string, ElectionMatrix>> out;
    const int n = m.n_candidates();
    for (const auto& [region, unit_ids] : groups) {
        double total = 0.0;
        for (int k : unit_ids) total += m.unit_total(k);
        if (total <= 0.0) continue;
        std::vector<std::string> units;
        std::vector<double> votes;
        units.reserve(unit_ids.size());
        votes.reserve(unit_ids.size() * n);
        for (int k : unit_ids) {
            units.push_back(m.units()[k]);
            for (int i = 0; i < n; ++i) votes.push_back(m.votes(i, k));
        }
        out.emplace_back(region, ElectionMatrix(std::move(units),
                                                std::vector<std::string>(m.candidates()),
                                                std::move(votes)));
    }
    return out;
}

} // namespace epec
