#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "epec/error.hpp"
#include "epec/io.hpp"

namespace epec {

inline constexpr const char* kToolVersion = "0.1.0";

// Reproducibility record written next to every CLI output: re-running the
// tool with an identical manifest must reproduce byte-identical outputs, so
// nothing time- or host-dependent goes in here.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command;            // subcommand name
    std::vector<std::string> argv;  // full command line as invoked
    nlohmann::json config;          // resolved flag values
    std::optional<std::uint64_t> seed;
    std::vector<FileDigest> inputs;
    std::vector<std::string> outputs; // file names relative to the run directory

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["tool_version"] = tool_version;
        j["command"] = command;
        j["argv"] = argv;
        j["config"] = config;
        if (seed) j["seed"] = *seed;
        j["inputs"] = nlohmann::json::array();
        for (const FileDigest& d : inputs)
            j["inputs"].push_back({{"path", d.path}, {"crc32", d.crc32_hex}, {"bytes", d.bytes}});
        j["outputs"] = outputs;
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) fail(errc::io_error, "cannot write manifest '" + path + "'");
        out << to_json().dump(2) << "\n";
    }
};

} // namespace epec
