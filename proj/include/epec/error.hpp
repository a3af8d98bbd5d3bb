#pragma once

#include <stdexcept>
#include <string>

namespace epec {

// Failure categories surfaced by the library. CLI maps these to
// machine-readable error output; tests match on them.
enum class errc {
    empty_input,
    negative_votes,
    malformed_polling_id,
    single_unit,
    missing_column,
    bad_integer,
    bad_float,
    gzip_corrupt,
    io_error,
    invalid_spec,
    empty_after_filter,
    not_an_ancestor,
    constant_series,
    length_mismatch,
    too_few_points,
    wrong_winner_count,
    missing_party,
    all_weights_zero,
    region_mismatch,
    key_mismatch,
};

inline const char* errc_name(errc c) noexcept {
    switch (c) {
        case errc::empty_input: return "EmptyInput";
        case errc::negative_votes: return "NegativeVotes";
        case errc::malformed_polling_id: return "MalformedPollingId";
        case errc::single_unit: return "SingleUnit";
        case errc::missing_column: return "MissingColumn";
        case errc::bad_integer: return "BadInteger";
        case errc::bad_float: return "BadFloat";
        case errc::gzip_corrupt: return "GzipCorrupt";
        case errc::io_error: return "IoError";
        case errc::invalid_spec: return "InvalidSpec";
        case errc::empty_after_filter: return "EmptyAfterFilter";
        case errc::not_an_ancestor: return "NotAnAncestor";
        case errc::constant_series: return "ConstantSeries";
        case errc::length_mismatch: return "LengthMismatch";
        case errc::too_few_points: return "TooFewPoints";
        case errc::wrong_winner_count: return "WrongWinnerCount";
        case errc::missing_party: return "MissingParty";
        case errc::all_weights_zero: return "AllWeightsZero";
        case errc::region_mismatch: return "RegionMismatch";
        case errc::key_mismatch: return "KeyMismatch";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace epec
