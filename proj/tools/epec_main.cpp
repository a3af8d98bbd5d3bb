// Command-line front end: batch subcommands over the unified election-data
// schema. One command = one process; every run writes a manifest next to its
// outputs so results can be reproduced byte-for-byte.

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "epec/epec.hpp"

namespace fs = std::filesystem;

namespace {

struct OutputOptions {
    std::string out_base = "out";
    std::string label;
    bool force = false;
    std::string precision = "6";
};

std::string format_number(double v, const std::string& precision) {
    char buf[64];
    if (precision == "full") {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        (void)ec;
        return std::string(buf, ptr);
    }
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string timestamp_label() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    localtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

fs::path prepare_run_dir(const OutputOptions& opts, const std::string& command) {
    const std::string label = opts.label.empty() ? timestamp_label() : opts.label;
    const fs::path dir = fs::path(opts.out_base) / command / label;
    if (fs::exists(dir) && !fs::is_empty(dir) && !opts.force)
        epec::fail(epec::errc::io_error,
                   "output directory '" + dir.string() + "' exists; pass --force to overwrite");
    fs::create_directories(dir);
    return dir;
}

void print_error_json(const std::string& code, const std::string& message,
                      const std::vector<epec::ParseError>& rows = {}) {
    nlohmann::json j;
    j["error"]["code"] = code;
    j["error"]["message"] = message;
    if (!rows.empty()) {
        j["error"]["rows"] = nlohmann::json::array();
        for (const epec::ParseError& e : rows)
            j["error"]["rows"].push_back(
                {{"line", e.line}, {"code", epec::errc_name(e.code)}, {"message", e.message}});
    }
    std::cerr << j.dump() << "\n";
}

[[noreturn]] void fail_on_parse_errors(const std::string& path,
                                       const std::vector<epec::ParseError>& errors) {
    print_error_json("ParseFailure", "'" + path + "' has " + std::to_string(errors.size()) +
                                         " malformed row(s)",
                     errors);
    std::exit(1);
}

epec::ResultFile read_results_or_die(const std::string& path) {
    epec::ResultFile file = epec::read_election_file(path);
    if (!file.errors.empty()) fail_on_parse_errors(path, file.errors);
    if (file.records.empty()) epec::fail(epec::errc::empty_input, "'" + path + "' has no rows");
    return file;
}

// Generic CSV table used by the analysis-facing subcommands.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows; // physical line number in rows_lines
    std::vector<long> row_lines;

    int column(const std::string& name, const std::string& path) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        epec::fail(epec::errc::missing_column, "'" + path + "' is missing column '" + name + "'");
    }
    std::optional<int> column_if_present(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return std::nullopt;
    }
};

CsvTable read_csv_table(const std::string& path) {
    epec::GzLineReader reader(path);
    std::string line;
    if (!reader.next_line(line))
        epec::fail(epec::errc::missing_column, "'" + path + "' is empty");
    CsvTable table;
    table.header = epec::split_csv_line(line);
    long line_no = 1;
    while (reader.next_line(line)) {
        ++line_no;
        if (line.empty()) continue;
        table.rows.push_back(epec::split_csv_line(line));
        table.row_lines.push_back(line_no);
    }
    return table;
}

double parse_cell_double(const CsvTable& t, std::size_t row, int col, const std::string& path) {
    const auto v = epec::detail::parse_double(t.rows[row][col]);
    if (!v)
        epec::fail(epec::errc::bad_float, "'" + path + "' line " +
                                              std::to_string(t.row_lines[row]) + ": '" +
                                              t.rows[row][col] + "' is not a number");
    return *v;
}

int parse_cell_int(const CsvTable& t, std::size_t row, int col, const std::string& path) {
    const auto v = epec::detail::parse_int(t.rows[row][col]);
    if (!v)
        epec::fail(epec::errc::bad_integer, "'" + path + "' line " +
                                                std::to_string(t.row_lines[row]) + ": '" +
                                                t.rows[row][col] + "' is not an integer");
    return *v;
}

void write_csv_file(const fs::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
    epec::GzLineWriter writer(path.string());
    writer.write_line(epec::join_csv(header));
    for (const auto& row : rows) writer.write_line(epec::join_csv(row));
    writer.close();
}

epec::RunManifest make_manifest(const std::string& command, int argc, char** argv) {
    epec::RunManifest manifest;
    manifest.command = command;
    for (int i = 0; i < argc; ++i) manifest.argv.emplace_back(argv[i]);
    return manifest;
}

// ---------------------------------------------------------------------------
// compute
// ---------------------------------------------------------------------------

struct ComputeArgs {
    std::string input;
    std::string location;
    int region_level = 1;
    std::optional<int> unit_level;
    std::string top_n = "all";
    std::string abstentions = "exclude";
    std::vector<double> alphas{0.25, 1.0};
    std::string preset;
    std::string save_curated;
    std::string separator = "|";
    bool top_n_given = false;
    bool abstentions_given = false;
};

int run_compute(const ComputeArgs& args, const OutputOptions& opts, int argc, char** argv) {
    epec::CurationConfig config;
    if (!args.preset.empty()) config = epec::country_preset(args.preset);
    if (args.top_n_given || args.preset.empty()) {
        if (args.top_n == "all") config.top_n.reset();
        else {
            const auto n = epec::detail::parse_int(args.top_n);
            if (!n) epec::fail(epec::errc::invalid_spec, "--top-n must be an integer or 'all'");
            config.top_n = *n;
        }
    }
    if (args.abstentions_given || args.preset.empty())
        config.abstention_mode = args.abstentions == "as-candidates"
                                     ? epec::AbstentionMode::as_candidates
                                     : epec::AbstentionMode::exclude;
    config.aggregation_level = args.unit_level;
    if (args.separator.size() != 1)
        epec::fail(epec::errc::invalid_spec, "--separator must be a single character");
    config.separator = args.separator[0];

    const epec::ResultFile file = read_results_or_die(args.input);
    const epec::ValidationReport validation = epec::validate(file.records);
    std::map<epec::FindingKind, std::pair<long, std::string>> finding_summary;
    for (const epec::Finding& f : validation.findings) {
        auto& [count, example] = finding_summary[f.kind];
        if (count++ == 0) example = "unit '" + f.polling_id + "': " + f.detail;
    }
    for (const auto& [kind, summary] : finding_summary)
        std::cerr << "warning: " << summary.first << " " << epec::finding_name(kind)
                  << " finding(s), e.g. " << summary.second << "\n";

    if (!args.location.empty()) {
        const epec::LocationFile locations = epec::read_location_file(args.location);
        if (!locations.errors.empty()) fail_on_parse_errors(args.location, locations.errors);
        for (const std::string& id : epec::check_location_join(locations.records, config.separator))
            std::cerr << "warning: location levels for '" << id
                      << "' do not join back to the polling_id\n";
    }

    std::vector<std::string> warnings;
    const epec::ElectionMatrix matrix = epec::curate(file.records, config, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

    const epec::AntagonismReport report = epec::polarization_report(matrix);
    const epec::ComparisonReport comparison = epec::comparison_report(matrix, args.alphas);
    const std::vector<epec::RegionMetrics> regions =
        epec::regional_metrics(matrix, args.region_level, config.separator);

    const fs::path dir = prepare_run_dir(opts, "compute");
    auto num = [&](double v) { return format_number(v, opts.precision); };

    {
        std::vector<std::string> header{"n_candidates", "n_units",       "ep",
                                        "ec",           "margin_of_victory", "reynal_querol",
                                        "enp",          "dispersion_sum"};
        for (const epec::EstebanRayResult& er : comparison.esteban_ray)
            header.push_back("ep_prime_alpha_" + num(er.alpha));
        std::vector<std::string> row{std::to_string(report.n_candidates),
                                     std::to_string(report.n_units),
                                     num(report.ep),
                                     num(report.ec),
                                     num(comparison.margin_of_victory),
                                     num(comparison.reynal_querol),
                                     num(comparison.effective_number_of_candidates),
                                     comparison.dispersion_per_candidate.empty()
                                         ? std::string()
                                         : num(comparison.dispersion_aggregate)};
        for (const epec::EstebanRayResult& er : comparison.esteban_ray)
            row.push_back(num(er.aggregate));
        write_csv_file(dir / "national.csv", header, {row});
    }
    {
        std::vector<std::string> header{"candidate", "total_votes", "overall_share", "within_a",
                                        "between_a", "total_a",     "zero_votes"};
        for (const epec::EstebanRayResult& er : comparison.esteban_ray)
            header.push_back("er_alpha_" + num(er.alpha));
        if (!comparison.dispersion_per_candidate.empty()) header.push_back("dispersion");
        std::vector<std::vector<std::string>> rows;
        for (int i = 0; i < matrix.n_candidates(); ++i) {
            const epec::CandidateAntagonism& c = report.per_candidate[i];
            std::vector<std::string> row{c.candidate,
                                         num(matrix.candidate_total(i)),
                                         num(matrix.overall_share(i)),
                                         num(c.within_a),
                                         num(c.between_a),
                                         num(c.total_a),
                                         c.zero_votes ? "true" : "false"};
            for (const epec::EstebanRayResult& er : comparison.esteban_ray)
                row.push_back(num(er.per_candidate[i]));
            if (!comparison.dispersion_per_candidate.empty())
                row.push_back(num(comparison.dispersion_per_candidate[i]));
            rows.push_back(std::move(row));
        }
        write_csv_file(dir / "candidates.csv", header, rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const epec::RegionMetrics& rm : regions)
            rows.push_back({rm.region, std::to_string(report.n_candidates), num(rm.ep), num(rm.ec)});
        write_csv_file(dir / "regions.csv", {"region", "n_candidates", "ep", "ec"}, rows);
    }

    epec::RunManifest manifest = make_manifest("compute", argc, argv);
    manifest.inputs.push_back(epec::digest_file(args.input));
    if (!args.location.empty()) manifest.inputs.push_back(epec::digest_file(args.location));
    manifest.config = {{"level", args.region_level},
                       {"unit_level", args.unit_level ? nlohmann::json(*args.unit_level)
                                                      : nlohmann::json(nullptr)},
                       {"top_n", config.top_n ? nlohmann::json(*config.top_n)
                                              : nlohmann::json("all")},
                       {"abstentions", config.abstention_mode == epec::AbstentionMode::exclude
                                           ? "exclude"
                                           : "as-candidates"},
                       {"alphas", args.alphas},
                       {"separator", args.separator},
                       {"precision", opts.precision}};
    manifest.outputs = {"national.csv", "candidates.csv", "regions.csv"};
    if (!args.save_curated.empty()) {
        epec::write_election_file((dir / args.save_curated).string(),
                                  epec::matrix_to_records(matrix));
        manifest.outputs.push_back(args.save_curated);
    }
    manifest.write((dir / "manifest.json").string());

    std::cout << dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    int candidates = 2;
    std::vector<double> mu;
    std::vector<double> sigma;
    int units = 100;
    double votes_per_unit = 100.0;
    std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& args, const OutputOptions& opts, int argc, char** argv) {
    epec::SyntheticSpec spec;
    spec.means = args.mu;
    spec.sigmas = args.sigma;
    spec.n_units = args.units;
    spec.votes_per_unit = args.votes_per_unit;
    spec.seed = args.seed;

    std::optional<epec::ElectionMatrix> matrix;
    if (args.candidates == 2) matrix = epec::sample_two_candidate(spec);
    else if (args.candidates == 3) matrix = epec::sample_three_candidate(spec);
    else matrix = epec::sample_n_candidate(args.candidates, spec);

    const fs::path dir = prepare_run_dir(opts, "synth");
    epec::write_election_file((dir / "dataset.csv.gz").string(),
                              epec::matrix_to_records(*matrix));

    epec::RunManifest manifest = make_manifest("synth", argc, argv);
    manifest.seed = args.seed;
    manifest.config = {{"candidates", args.candidates},
                       {"mu", args.mu},
                       {"sigma", args.sigma},
                       {"units", args.units},
                       {"votes_per_unit", args.votes_per_unit}};
    manifest.outputs = {"dataset.csv.gz"};
    manifest.write((dir / "manifest.json").string());

    std::cout << dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// robustness
// ---------------------------------------------------------------------------

struct RobustnessTopNArgs {
    std::string input;
    int max_n = 0;
    int region_level = 1;
    std::optional<int> unit_level;
    std::string abstentions = "exclude";
    std::string separator = "|";
};

int run_robustness_top_n(const RobustnessTopNArgs& args, const OutputOptions& opts, int argc,
                         char** argv) {
    const epec::ResultFile file = read_results_or_die(args.input);
    epec::TopNConfig config;
    config.region_level = args.region_level;
    config.unit_level = args.unit_level;
    config.abstentions = args.abstentions == "as-candidates" ? epec::AbstentionMode::as_candidates
                                                             : epec::AbstentionMode::exclude;
    config.separator = args.separator.at(0);
    const std::vector<epec::TopNPoint> points =
        epec::robustness_top_n(file.records, args.max_n, config);

    const fs::path dir = prepare_run_dir(opts, "robustness");
    auto num = [&](double v) { return format_number(v, opts.precision); };
    std::vector<std::vector<std::string>> rows;
    for (const epec::TopNPoint& p : points)
        rows.push_back({epec::protocol_name(epec::Protocol::top_n), std::to_string(p.n),
                        num(p.coverage), num(p.rho_ep), num(p.rho_ec)});
    write_csv_file(dir / "robustness.csv", {"protocol", "n", "coverage", "rho_ep", "rho_ec"}, rows);

    epec::RunManifest manifest = make_manifest("robustness", argc, argv);
    manifest.inputs.push_back(epec::digest_file(args.input));
    manifest.config = {{"mode", "top-n"},
                       {"max_n", args.max_n},
                       {"region_level", args.region_level},
                       {"abstentions", args.abstentions}};
    manifest.outputs = {"robustness.csv"};
    manifest.write((dir / "manifest.json").string());
    std::cout << dir.string() << "\n";
    return 0;
}

struct RobustnessPairsArgs {
    std::string metrics_a;
    std::string metrics_b;
    std::string protocol = "aggregation";
};

epec::Protocol protocol_from_string(const std::string& s) {
    if (s == "aggregation") return epec::Protocol::aggregation;
    if (s == "abstentions") return epec::Protocol::abstentions;
    if (s == "election-type") return epec::Protocol::election_type;
    if (s == "rounds") return epec::Protocol::rounds;
    if (s == "top-n") return epec::Protocol::top_n;
    if (s == "enp-subset") return epec::Protocol::enp_subset;
    epec::fail(epec::errc::invalid_spec, "unknown protocol '" + s + "'");
}

std::vector<epec::RegionMetrics> read_region_metrics(const std::string& path,
                                                     std::optional<int>* n_candidates) {
    const CsvTable table = read_csv_table(path);
    const int c_region = table.column("region", path);
    const int c_ep = table.column("ep", path);
    const int c_ec = table.column("ec", path);
    const std::optional<int> c_n = table.column_if_present("n_candidates");
    std::vector<epec::RegionMetrics> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out.push_back({table.rows[r][c_region], parse_cell_double(table, r, c_ep, path),
                       parse_cell_double(table, r, c_ec, path)});
        if (c_n && n_candidates != nullptr) *n_candidates = parse_cell_int(table, r, *c_n, path);
    }
    return out;
}

int run_robustness_pairs(const RobustnessPairsArgs& args, const OutputOptions& opts, int argc,
                         char** argv) {
    std::optional<int> n_a, n_b;
    const std::vector<epec::RegionMetrics> a = read_region_metrics(args.metrics_a, &n_a);
    const std::vector<epec::RegionMetrics> b = read_region_metrics(args.metrics_b, &n_b);
    if (n_a && n_b && *n_a != *n_b)
        std::cerr << "warning: comparing elections with different candidate counts (" << *n_a
                  << " vs " << *n_b << "); EP/EC are only comparable at equal N\n";
    const epec::RobustnessResult result =
        epec::robustness_pairs(a, b, protocol_from_string(args.protocol));

    const fs::path dir = prepare_run_dir(opts, "robustness");
    auto num = [&](double v) { return format_number(v, opts.precision); };
    write_csv_file(dir / "robustness.csv", {"protocol", "n", "coverage", "rho_ep", "rho_ec"},
                   {{epec::protocol_name(result.protocol), std::to_string(result.n), "",
                     num(result.rho_ep), num(result.rho_ec)}});
    std::vector<std::vector<std::string>> rows;
    for (const epec::RegionPair& p : result.pairs)
        rows.push_back({p.region, num(p.a_ep), num(p.a_ec), num(p.b_ep), num(p.b_ec)});
    write_csv_file(dir / "pairs.csv", {"region", "a_ep", "a_ec", "b_ep", "b_ec"}, rows);

    epec::RunManifest manifest = make_manifest("robustness", argc, argv);
    manifest.inputs.push_back(epec::digest_file(args.metrics_a));
    manifest.inputs.push_back(epec::digest_file(args.metrics_b));
    manifest.config = {{"mode", "pairs"}, {"protocol", args.protocol}};
    manifest.outputs = {"robustness.csv", "pairs.csv"};
    manifest.write((dir / "manifest.json").string());
    std::cout << dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// classify-swing
// ---------------------------------------------------------------------------

int run_classify_swing(const std::string& winners_path, const OutputOptions& opts, int argc,
                       char** argv) {
    const CsvTable table = read_csv_table(winners_path);
    const int c_state = table.column("state", winners_path);
    if (table.header.size() != 5)
        epec::fail(epec::errc::wrong_winner_count,
                   "'" + winners_path + "' must have a state column plus exactly 4 winner columns");
    std::vector<epec::StateWinners> winners;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        epec::StateWinners sw;
        sw.state = table.rows[r][c_state];
        for (std::size_t c = 0; c < table.header.size(); ++c)
            if (static_cast<int>(c) != c_state) sw.winners.push_back(table.rows[r][c]);
        winners.push_back(std::move(sw));
    }
    const std::vector<epec::SwingLabel> labels = epec::classify_swing(winners);

    const fs::path dir = prepare_run_dir(opts, "classify-swing");
    std::vector<std::string> header{"state"};
    for (std::size_t c = 0; c < table.header.size(); ++c)
        if (static_cast<int>(c) != c_state) header.push_back(table.header[c]);
    header.push_back("label");
    std::vector<std::vector<std::string>> rows;
    for (const epec::SwingLabel& l : labels) {
        std::vector<std::string> row{l.state};
        for (const std::string& w : l.winners) row.push_back(w);
        row.push_back(l.label());
        rows.push_back(std::move(row));
    }
    write_csv_file(dir / "swing.csv", header, rows);

    epec::RunManifest manifest = make_manifest("classify-swing", argc, argv);
    manifest.inputs.push_back(epec::digest_file(winners_path));
    manifest.outputs = {"swing.csv"};
    manifest.write((dir / "manifest.json").string());
    std::cout << dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// mass-polarization
// ---------------------------------------------------------------------------

int run_mass_polarization(const std::string& responses_path, const OutputOptions& opts, int argc,
                          char** argv) {
    const CsvTable table = read_csv_table(responses_path);
    const int c_region = table.column("region", responses_path);
    const int c_year = table.column("year", responses_path);
    const int c_pid7 = table.column("pid7", responses_path);
    const int c_weight = table.column("weight", responses_path);

    epec::MassPolarizationInput input;
    long skipped_nonpartisan = 0;
    std::set<std::pair<std::string, int>> cells;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string region = table.rows[r][c_region];
        const int year = parse_cell_int(table, r, c_year, responses_path);
        const double weight = parse_cell_double(table, r, c_weight, responses_path);
        const auto response =
            epec::survey_response_from_pid7(region, year, table.rows[r][c_pid7], weight);
        if (!response) {
            ++skipped_nonpartisan;
            continue;
        }
        cells.insert({region, year});
        input.responses.push_back(*response);
    }
    if (skipped_nonpartisan > 0)
        std::cerr << "note: skipped " << skipped_nonpartisan
                  << " response(s) without partisan identity (Independent / Not sure)\n";

    const fs::path dir = prepare_run_dir(opts, "mass-polarization");
    auto num = [&](double v) { return format_number(v, opts.precision); };
    std::vector<std::vector<std::string>> rows;
    for (const auto& [region, year] : cells) {
        try {
            const epec::MassPolarizationScore score =
                epec::mass_polarization(input, region, year);
            rows.push_back({region, std::to_string(year), num(score.ideology_dem),
                            num(score.ideology_rep), num(score.pp)});
        } catch (const epec::Error& e) {
            if (e.code() != epec::errc::missing_party && e.code() != epec::errc::all_weights_zero)
                throw;
            std::cerr << "warning: skipping (" << region << ", " << year << "): " << e.what()
                      << "\n";
        }
    }
    write_csv_file(dir / "mass_polarization.csv",
                   {"region", "year", "ideology_dem", "ideology_rep", "pp"}, rows);

    epec::RunManifest manifest = make_manifest("mass-polarization", argc, argv);
    manifest.inputs.push_back(epec::digest_file(responses_path));
    manifest.outputs = {"mass_polarization.csv"};
    manifest.write((dir / "manifest.json").string());
    std::cout << dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

int run_export(const std::string& metrics_path, const std::string& covariates_path,
               const OutputOptions& opts, int argc, char** argv) {
    const CsvTable metrics_csv = read_csv_table(metrics_path);
    const int m_region = metrics_csv.column("region", metrics_path);
    const int m_year = metrics_csv.column("year", metrics_path);
    const int m_ep = metrics_csv.column("ep", metrics_path);
    const int m_ec = metrics_csv.column("ec", metrics_path);
    std::vector<epec::MetricRow> metrics;
    for (std::size_t r = 0; r < metrics_csv.rows.size(); ++r)
        metrics.push_back({metrics_csv.rows[r][m_region],
                           parse_cell_int(metrics_csv, r, m_year, metrics_path),
                           parse_cell_double(metrics_csv, r, m_ep, metrics_path),
                           parse_cell_double(metrics_csv, r, m_ec, metrics_path)});

    const CsvTable cov_csv = read_csv_table(covariates_path);
    const int x_region = cov_csv.column("region", covariates_path);
    const int x_year = cov_csv.column("year", covariates_path);
    epec::CovariateTable covariates;
    std::vector<int> cov_cols;
    for (std::size_t c = 0; c < cov_csv.header.size(); ++c) {
        if (static_cast<int>(c) == x_region || static_cast<int>(c) == x_year) continue;
        cov_cols.push_back(static_cast<int>(c));
        covariates.names.push_back(cov_csv.header[c]);
    }
    for (std::size_t r = 0; r < cov_csv.rows.size(); ++r) {
        std::vector<double> values;
        for (int c : cov_cols) values.push_back(parse_cell_double(cov_csv, r, c, covariates_path));
        covariates.values[{cov_csv.rows[r][x_region],
                           parse_cell_int(cov_csv, r, x_year, covariates_path)}] =
            std::move(values);
    }

    const epec::RegressionTable table = epec::export_regression_table(metrics, covariates);
    for (const auto& [region, year] : table.skipped_keys)
        std::cerr << "warning: no covariates for (" << region << ", " << year
                  << "); row omitted\n";

    const fs::path dir = prepare_run_dir(opts, "export");
    auto num = [&](double v) { return format_number(v, opts.precision); };
    std::vector<std::vector<std::string>> rows;
    for (const epec::RegressionTable::Row& row : table.rows) {
        std::vector<std::string> fields{row.region, std::to_string(row.year), num(row.ep_z),
                                        num(row.ec_z)};
        for (double z : row.covariates_z) fields.push_back(num(z));
        rows.push_back(std::move(fields));
    }
    write_csv_file(dir / "regression.csv", table.header(), rows);

    epec::RunManifest manifest = make_manifest("export", argc, argv);
    manifest.inputs.push_back(epec::digest_file(metrics_path));
    manifest.inputs.push_back(epec::digest_file(covariates_path));
    nlohmann::json skipped = nlohmann::json::array();
    for (const auto& [region, year] : table.skipped_keys)
        skipped.push_back({{"region", region}, {"year", year}});
    manifest.config = {{"skipped_keys", skipped}};
    manifest.outputs = {"regression.csv"};
    manifest.write((dir / "manifest.json").string());
    std::cout << dir.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Election polarization (EP) and competitiveness (EC) toolkit"};
    app.require_subcommand(1);

    OutputOptions opts;
    app.add_option("--out", opts.out_base, "Base output directory")->capture_default_str();
    app.add_option("--label", opts.label, "Run label (default: timestamp)");
    app.add_flag("--force", opts.force, "Overwrite an existing run directory");
    app.add_option("--precision", opts.precision, "Numeric output precision")
        ->check(CLI::IsMember({"6", "full"}))
        ->capture_default_str();
    std::string format = "csv";
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv"}))
        ->capture_default_str();

    ComputeArgs compute;
    CLI::App* cmd_compute = app.add_subcommand("compute", "Compute EP/EC and comparison measures");
    cmd_compute->add_option("--input", compute.input, "Results file (csv, optionally gzipped)")
        ->required();
    cmd_compute->add_option("--location", compute.location, "Location metadata file");
    cmd_compute->add_option("--level", compute.region_level,
                            "Region level for the per-region report (0 = national)")
        ->capture_default_str();
    cmd_compute->add_option("--unit-level", compute.unit_level,
                            "Aggregation level of the metric units (default: full polling_id)");
    CLI::Option* top_n_opt =
        cmd_compute->add_option("--top-n", compute.top_n, "Retain top N candidates, or 'all'")
            ->capture_default_str();
    CLI::Option* abst_opt = cmd_compute
                                ->add_option("--abstentions", compute.abstentions,
                                             "How to treat abstention/blank/null rows")
                                ->check(CLI::IsMember({"exclude", "as-candidates"}))
                                ->capture_default_str();
    cmd_compute->add_option("--alpha", compute.alphas, "Esteban-Ray alpha grid")
        ->delimiter(',')
        ->capture_default_str();
    cmd_compute->add_option("--preset", compute.preset,
                            "Country curation preset (united_states, chile, france)");
    cmd_compute->add_option("--save-curated", compute.save_curated,
                            "Also write the curated dataset under this name");
    cmd_compute->add_option("--separator", compute.separator, "polling_id level separator")
        ->capture_default_str();

    SynthArgs synth;
    CLI::App* cmd_synth = app.add_subcommand("synth", "Generate a synthetic election dataset");
    cmd_synth->add_option("--candidates", synth.candidates, "Number of candidates (>= 2)")
        ->required();
    cmd_synth->add_option("--mu", synth.mu, "Gaussian mean per sampled candidate")
        ->delimiter(',')
        ->required();
    cmd_synth->add_option("--sigma", synth.sigma, "Gaussian sigma per sampled candidate")
        ->delimiter(',')
        ->required();
    cmd_synth->add_option("--units", synth.units, "Number of voting units")->capture_default_str();
    cmd_synth->add_option("--votes-per-unit", synth.votes_per_unit, "Votes per unit")
        ->capture_default_str();
    cmd_synth->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();

    CLI::App* cmd_rob = app.add_subcommand("robustness", "Robustness protocols");
    cmd_rob->require_subcommand(1);
    RobustnessTopNArgs topn;
    CLI::App* cmd_topn = cmd_rob->add_subcommand("top-n", "Top-N convergence sweep");
    cmd_topn->add_option("--input", topn.input, "Results file")->required();
    cmd_topn->add_option("--max-n", topn.max_n, "Largest top-N to sweep")->required();
    cmd_topn->add_option("--level", topn.region_level, "Region level")->capture_default_str();
    cmd_topn->add_option("--unit-level", topn.unit_level,
                         "Aggregation level of the metric units (default: full polling_id)");
    cmd_topn->add_option("--abstentions", topn.abstentions, "Abstention handling")
        ->check(CLI::IsMember({"exclude", "as-candidates"}))
        ->capture_default_str();
    cmd_topn->add_option("--separator", topn.separator, "polling_id level separator")
        ->capture_default_str();
    RobustnessPairsArgs pairs;
    CLI::App* cmd_pairs =
        cmd_rob->add_subcommand("pairs", "Correlate two per-region metric variants");
    cmd_pairs->add_option("--metrics-a", pairs.metrics_a, "Per-region metrics CSV (variant A)")
        ->required();
    cmd_pairs->add_option("--metrics-b", pairs.metrics_b, "Per-region metrics CSV (variant B)")
        ->required();
    cmd_pairs->add_option("--protocol", pairs.protocol, "Protocol label")
        ->check(CLI::IsMember(
            {"aggregation", "abstentions", "election-type", "rounds", "top-n", "enp-subset"}))
        ->capture_default_str();

    std::string winners_path;
    CLI::App* cmd_swing = app.add_subcommand("classify-swing", "Label swing vs partisan states");
    cmd_swing->add_option("--winners", winners_path, "CSV: state plus 4 winner columns")
        ->required();

    std::string responses_path;
    CLI::App* cmd_mass =
        app.add_subcommand("mass-polarization", "Mass polarization from pid7 survey responses");
    cmd_mass->add_option("--responses", responses_path, "CSV: region,year,pid7,weight")
        ->required();

    std::string metrics_path, covariates_path;
    CLI::App* cmd_export =
        app.add_subcommand("export", "Regression-ready table of standardized EP/EC + covariates");
    cmd_export->add_option("--metrics", metrics_path, "CSV: region,year,ep,ec")->required();
    cmd_export->add_option("--covariates", covariates_path, "CSV: region,year,<covariates...>")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        compute.top_n_given = top_n_opt->count() > 0;
        compute.abstentions_given = abst_opt->count() > 0;
        if (cmd_compute->parsed()) return run_compute(compute, opts, argc, argv);
        if (cmd_synth->parsed()) return run_synth(synth, opts, argc, argv);
        if (cmd_rob->parsed()) {
            if (cmd_topn->parsed()) return run_robustness_top_n(topn, opts, argc, argv);
            return run_robustness_pairs(pairs, opts, argc, argv);
        }
        if (cmd_swing->parsed()) return run_classify_swing(winners_path, opts, argc, argv);
        if (cmd_mass->parsed()) return run_mass_polarization(responses_path, opts, argc, argv);
        if (cmd_export->parsed()) return run_export(metrics_path, covariates_path, opts, argc, argv);
    } catch (const epec::Error& e) {
        print_error_json(epec::errc_name(e.code()), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error_json("Internal", e.what());
        return 1;
    }
    return 0;
}
