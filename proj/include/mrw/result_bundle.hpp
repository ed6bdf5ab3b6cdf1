#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrw/estimator.hpp"

namespace mrw {

inline constexpr int kBundleFormatVersion = 1;

struct InputInfo {
    std::string path;
    std::string series_name;
    std::size_t records = 0;
    std::string first_month;
    std::string last_month;
};

struct RunMetadata {
    std::string command;
    std::vector<std::string> argv;
    std::string config_hash;  // FNV-1a 64 of the argument vector, hex
    std::uint64_t seed = 0;
    std::string timestamp;    // UTC, ISO 8601
    std::vector<InputInfo> inputs;
};

// Payload-specific encoders. Each returns {"type": ..., ...}.
[[nodiscard]] nlohmann::json to_json(const FitResult& fit);
[[nodiscard]] nlohmann::json to_json(const ScaleProfile& profile, const std::string& parameter);
[[nodiscard]] nlohmann::json to_json(const MomentGrid& grid, const std::string& label);
[[nodiscard]] nlohmann::json to_json(const RollingResult& rolling);

[[nodiscard]] nlohmann::json make_bundle(const RunMetadata& meta, nlohmann::json payload);

// Checks the bundle layout for its format_version; returns a list of problems
// (empty when valid).
[[nodiscard]] std::vector<std::string> validate_bundle(const nlohmann::json& bundle);

// Reads and validates; throws Parse on malformed or invalid bundles.
[[nodiscard]] nlohmann::json load_bundle(const std::string& path);

[[nodiscard]] std::string fnv1a_hex(const std::vector<std::string>& parts);
[[nodiscard]] std::string utc_timestamp();

}  // namespace mrw
