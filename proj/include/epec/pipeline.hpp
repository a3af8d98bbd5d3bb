#pragma once

#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epec/election.hpp"
#include "epec/error.hpp"
#include "epec/io.hpp"

namespace epec {

// ---------------------------------------------------------------------------
// Unicode
// ---------------------------------------------------------------------------

// NFC-normalizes a UTF-8 string (ICU). Candidate labels and polling ids are
// normalized at parse time so all later comparisons are plain string
// equality. Pure-ASCII input is returned as-is.
inline std::string nfc(std::string_view utf8) {
    bool ascii = true;
    for (unsigned char c : utf8)
        if (c >= 0x80) {
            ascii = false;
            break;
        }
    if (ascii) return std::string(utf8);

    UErrorCode status = U_ZERO_ERROR;
    const UNormalizer2* norm = unorm2_getNFCInstance(&status);
    if (U_FAILURE(status)) fail(errc::io_error, "ICU NFC normalizer unavailable");

    std::vector<UChar> utf16(utf8.size() + 1);
    int32_t len16 = 0;
    status = U_ZERO_ERROR;
    u_strFromUTF8(utf16.data(), static_cast<int32_t>(utf16.size()), &len16, utf8.data(),
                  static_cast<int32_t>(utf8.size()), &status);
    if (U_FAILURE(status)) fail(errc::io_error, "invalid UTF-8 input");

    std::vector<UChar> normalized(static_cast<std::size_t>(len16) * 3 + 16);
    status = U_ZERO_ERROR;
    int32_t norm_len = unorm2_normalize(norm, utf16.data(), len16, normalized.data(),
                                        static_cast<int32_t>(normalized.size()), &status);
    if (U_FAILURE(status)) fail(errc::io_error, "NFC normalization failed");

    std::string out(static_cast<std::size_t>(norm_len) * 4 + 16, '\0');
    int32_t len8 = 0;
    status = U_ZERO_ERROR;
    u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &len8, normalized.data(), norm_len,
                &status);
    if (U_FAILURE(status)) fail(errc::io_error, "UTF-8 re-encoding failed");
    out.resize(static_cast<std::size_t>(len8));
    return out;
}

// ---------------------------------------------------------------------------
// Unified schema files
// ---------------------------------------------------------------------------

struct ParseError {
    long line = 0; // 1-based physical line in the file
    errc code = errc::bad_integer;
    std::string message;
};

struct ResultFile {
    std::vector<VoteRecord> records;
    std::vector<ParseError> errors;
};

struct LocationFile {
    std::vector<std::string> level_names;
    std::vector<LocationRecord> records;
    std::vector<ParseError> errors;
};

namespace detail {

// Vote counts are integers in real data but synthetic generators may emit
// fractional weights, so the value column accepts any non-negative number.
inline std::optional<double> parse_value(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    if (!(v >= 0.0) || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<int> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<bool> parse_bool(std::string_view s) {
    if (s == "true" || s == "True" || s == "TRUE" || s == "1") return true;
    if (s == "false" || s == "False" || s == "FALSE" || s == "0") return false;
    return std::nullopt;
}

inline int column_of(const std::vector<std::string>& header, std::string_view name,
                     const std::string& path) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    fail(errc::missing_column, "'" + path + "' is missing column '" + std::string(name) + "'");
}

inline std::string format_value(double v) {
    if (v == std::floor(v) && std::fabs(v) < 9.007199254740992e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
        return buf;
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace detail

// Reads a results file (comma-separated, optionally gzipped) with header
// polling_id,candidate,value,rank,flag_candidates,rate. Unparseable rows
// become positional errors; they are never silently dropped.
inline ResultFile read_election_file(const std::string& path) {
    GzLineReader reader(path);
    std::string line;
    if (!reader.next_line(line)) fail(errc::missing_column, "'" + path + "' is empty");
    const std::vector<std::string> header = split_csv_line(line);
    const int c_id = detail::column_of(header, "polling_id", path);
    const int c_cand = detail::column_of(header, "candidate", path);
    const int c_value = detail::column_of(header, "value", path);
    const int c_rank = detail::column_of(header, "rank", path);
    const int c_flag = detail::column_of(header, "flag_candidates", path);
    const int c_rate = detail::column_of(header, "rate", path);
    const std::size_t min_fields = header.size();

    ResultFile out;
    long line_no = 1;
    while (reader.next_line(line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() < min_fields) {
            out.errors.push_back({line_no, errc::missing_column,
                                  "expected " + std::to_string(min_fields) + " fields, got " +
                                      std::to_string(f.size())});
            continue;
        }
        const auto value = detail::parse_value(f[c_value]);
        if (!value) {
            out.errors.push_back({line_no, errc::bad_integer,
                                  "value '" + f[c_value] + "' is not a non-negative number"});
            continue;
        }
        const auto rank = detail::parse_int(f[c_rank]);
        if (!rank) {
            out.errors.push_back({line_no, errc::bad_integer,
                                  "rank '" + f[c_rank] + "' is not an integer"});
            continue;
        }
        const auto flag = detail::parse_bool(f[c_flag]);
        if (!flag) {
            out.errors.push_back({line_no, errc::bad_integer,
                                  "flag_candidates '" + f[c_flag] + "' is not a boolean"});
            continue;
        }
        const auto rate = detail::parse_double(f[c_rate]);
        if (!rate) {
            out.errors.push_back(
                {line_no, errc::bad_float, "rate '" + f[c_rate] + "' is not a number"});
            continue;
        }
        VoteRecord r;
        r.polling_id = nfc(f[c_id]);
        r.candidate = nfc(f[c_cand]);
        r.value = *value;
        r.rank = *rank;
        r.is_real_candidate = *flag;
        r.rate = *rate;
        out.records.push_back(std::move(r));
    }
    return out;
}

// Reads a location file: polling_id,value,rate are fixed columns; every
// other column, in header order, is a territorial level.
inline LocationFile read_location_file(const std::string& path) {
    GzLineReader reader(path);
    std::string line;
    if (!reader.next_line(line)) fail(errc::missing_column, "'" + path + "' is empty");
    const std::vector<std::string> header = split_csv_line(line);
    const int c_id = detail::column_of(header, "polling_id", path);
    const int c_value = detail::column_of(header, "value", path);
    const int c_rate = detail::column_of(header, "rate", path);

    LocationFile out;
    std::vector<int> level_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (static_cast<int>(i) == c_id || static_cast<int>(i) == c_value ||
            static_cast<int>(i) == c_rate)
            continue;
        level_cols.push_back(static_cast<int>(i));
        out.level_names.push_back(header[i]);
    }

    long line_no = 1;
    while (reader.next_line(line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() < header.size()) {
            out.errors.push_back({line_no, errc::missing_column,
                                  "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(f.size())});
            continue;
        }
        const auto value = detail::parse_double(f[c_value]);
        if (!value) {
            out.errors.push_back(
                {line_no, errc::bad_integer, "value '" + f[c_value] + "' is not a number"});
            continue;
        }
        const auto rate = detail::parse_double(f[c_rate]);
        if (!rate) {
            out.errors.push_back(
                {line_no, errc::bad_float, "rate '" + f[c_rate] + "' is not a number"});
            continue;
        }
        LocationRecord r;
        r.polling_id = nfc(f[c_id]);
        for (int col : level_cols) r.levels.push_back(nfc(f[col]));
        r.value = *value;
        r.rate = *rate;
        out.records.push_back(std::move(r));
    }
    return out;
}

// Writes records in the unified schema; gzip when the path ends in ".gz".
// Integer counts are written without a decimal point, everything else with
// shortest round-trip precision.
inline void write_election_file(const std::string& path, std::span<const VoteRecord> records) {
    GzLineWriter writer(path);
    writer.write_line("polling_id,candidate,value,rank,flag_candidates,rate");
    for (const VoteRecord& r : records) {
        std::vector<std::string> fields{
            r.polling_id,
            r.candidate,
            detail::format_value(r.value),
            std::to_string(r.rank),
            r.is_real_candidate ? "true" : "false",
            detail::format_value(r.rate),
        };
        writer.write_line(join_csv(fields));
    }
    writer.close();
}

// Location-file invariant: levels joined with the separator reproduce
// polling_id. Returns the polling ids that violate it.
inline std::vector<std::string> check_location_join(std::span<const LocationRecord> records,
                                                    char separator = '|') {
    std::vector<std::string> bad;
    for (const LocationRecord& r : records) {
        std::string joined;
        for (std::size_t i = 0; i < r.levels.size(); ++i) {
            if (i > 0) joined.push_back(separator);
            joined += r.levels[i];
        }
        if (joined != r.polling_id) bad.push_back(r.polling_id);
    }
    return bad;
}

// ---------------------------------------------------------------------------
// Curation
// ---------------------------------------------------------------------------

enum class AbstentionMode { exclude, as_candidates };

struct CurationConfig {
    std::optional<int> top_n;             // nullopt = keep all candidates
    AbstentionMode abstention_mode = AbstentionMode::exclude;
    std::optional<int> aggregation_level; // nullopt = full polling_id
    std::string other_label = "other";
    char separator = '|';
};

// Curation, applied in order: (1) drop or retain pseudo-rows per the
// abstention mode, (2) rank candidates by national totals, (3) keep the top
// N and pool the rest into `other_label` per unit, (4) rebuild the matrix
// at the aggregation level with recomputed shares.
inline ElectionMatrix curate(std::span<const VoteRecord> records, const CurationConfig& config,
                             std::vector<std::string>* warnings = nullptr) {
    if (config.top_n && *config.top_n < 2)
        fail(errc::invalid_spec, "top_n must be at least 2");

    std::vector<VoteRecord> kept;
    kept.reserve(records.size());
    for (const VoteRecord& r : records) {
        if (config.abstention_mode == AbstentionMode::exclude && !r.is_real_candidate) continue;
        kept.push_back(r);
        kept.back().candidate = nfc(kept.back().candidate);
    }
    if (kept.empty()) fail(errc::empty_after_filter, "no records left after filtering");

    std::map<std::string, double> totals;
    for (const VoteRecord& r : kept) totals[r.candidate] += r.value;

    const UnitKey key{config.aggregation_level, config.separator};

    if (!config.top_n || *config.top_n >= static_cast<int>(totals.size())) {
        if (config.top_n && *config.top_n > static_cast<int>(totals.size()) && warnings != nullptr)
            warnings->push_back("TopNExceedsCandidates: top_n " + std::to_string(*config.top_n) +
                                " >= " + std::to_string(totals.size()) +
                                " candidates; retaining all");
        return build_matrix(kept, key);
    }

    std::vector<std::pair<std::string, double>> ranking(totals.begin(), totals.end());
    std::sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::set<std::string> retained;
    for (int i = 0; i < *config.top_n; ++i) retained.insert(ranking[i].first);
    if (retained.count(config.other_label) > 0)
        fail(errc::invalid_spec,
             "other_label '" + config.other_label + "' collides with a retained candidate");

    for (VoteRecord& r : kept) {
        if (retained.count(r.candidate) == 0) r.candidate = config.other_label;
    }
    std::vector<std::string> candidate_list(retained.begin(), retained.end());
    candidate_list.push_back(config.other_label);
    return build_matrix(kept, key, candidate_list);
}

// Re-sums an already-built matrix into a coarser level of the polling_id
// hierarchy. `from_level` is the level the matrix was built at (nullopt =
// full ids); `to_level` must be an ancestor: 0 (national) up to from_level.
inline ElectionMatrix reaggregate(const ElectionMatrix& m, std::optional<int> from_level,
                                  int to_level, char separator = '|') {
    if (to_level < 0) fail(errc::not_an_ancestor, "target level must be >= 0");
    if (from_level && to_level > *from_level)
        fail(errc::not_an_ancestor, "level " + std::to_string(to_level) +
                                        " is finer than the matrix level " +
                                        std::to_string(*from_level));
    if (from_level && to_level == *from_level) return m;

    const UnitKey key{to_level, separator};
    std::map<std::string, std::vector<double>> sums;
    const int n = m.n_candidates();
    for (int k = 0; k < m.n_units(); ++k) {
        std::string coarse;
        try {
            coarse = unit_at_level(m.units()[k], key);
        } catch (const Error&) {
            fail(errc::not_an_ancestor, "unit '" + m.units()[k] + "' has fewer than " +
                                            std::to_string(to_level) + " levels");
        }
        auto& row = sums[coarse];
        if (row.empty()) row.assign(n, 0.0);
        for (int i = 0; i < n; ++i) row[i] += m.votes(i, k);
    }
    std::vector<std::string> units;
    std::vector<double> votes;
    units.reserve(sums.size());
    votes.reserve(sums.size() * n);
    for (auto& [unit, row] : sums) {
        units.push_back(unit);
        votes.insert(votes.end(), row.begin(), row.end());
    }
    return ElectionMatrix(std::move(units), std::vector<std::string>(m.candidates()),
                          std::move(votes));
}

// Country presets for the top-N retention used in the study.
inline CurationConfig country_preset(std::string_view country) {
    std::string c(country);
    std::transform(c.begin(), c.end(), c.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    CurationConfig config;
    if (c == "united_states" || c == "us" || c == "usa") config.top_n = 2;
    else if (c == "chile" || c == "cl") config.top_n = 4;
    else if (c == "france" || c == "fr") config.top_n = 8;
    else fail(errc::invalid_spec, "no preset for country '" + std::string(country) + "'");
    return config;
}

// ---------------------------------------------------------------------------
// Dataset file naming: {country}_{year}_{round}[_location].csv[.gz]
// ---------------------------------------------------------------------------

struct DatasetName {
    std::string country;
    int year = 0;
    std::string round;
    bool is_location = false;
};

inline const std::vector<std::string>& accepted_rounds() {
    static const std::vector<std::string> rounds{"first_round", "runoff", "general", "senate",
                                                 "house"};
    return rounds;
}

inline std::optional<DatasetName> parse_dataset_filename(std::string_view path) {
    std::string_view name = path;
    if (auto slash = name.find_last_of("/\\"); slash != std::string_view::npos)
        name = name.substr(slash + 1);
    auto strip = [&](std::string_view suffix) {
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            name = name.substr(0, name.size() - suffix.size());
    };
    strip(".gz");
    strip(".csv");

    DatasetName out;
    if (name.size() > 9 && name.compare(name.size() - 9, 9, "_location") == 0) {
        out.is_location = true;
        name = name.substr(0, name.size() - 9);
    }
    for (const std::string& round : accepted_rounds()) {
        if (name.size() <= round.size() + 1) continue;
        if (name.compare(name.size() - round.size(), round.size(), round) != 0) continue;
        if (name[name.size() - round.size() - 1] != '_') continue;
        std::string_view rest = name.substr(0, name.size() - round.size() - 1);
        if (rest.size() < 6) continue; // country + '_' + 4-digit year
        std::string_view year_sv = rest.substr(rest.size() - 4);
        if (rest[rest.size() - 5] != '_') continue;
        const auto year = detail::parse_int(year_sv);
        if (!year || *year < 1000) continue;
        out.country = std::string(rest.substr(0, rest.size() - 5));
        out.year = *year;
        out.round = round;
        if (out.country.empty()) continue;
        return out;
    }
    return std::nullopt;
}

} // namespace epec
