#include "mrw/result_bundle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>

#include "mrw/errors.hpp"
#include "mrw/ingest.hpp"

namespace mrw {

using nlohmann::json;

namespace {

// NaN is not representable in JSON; gaps are encoded as null.
json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json scales_json(const std::vector<Scale>& scales) {
    json a = json::array();
    for (Scale s : scales) a.push_back(s.value());
    return a;
}

json failures_json(const std::vector<ScaleFailure>& failures) {
    json a = json::array();
    for (const auto& f : failures) {
        a.push_back({{"scale", f.scale.value()}, {"kind", std::string(to_string(f.kind))},
                     {"message", f.message}});
    }
    return a;
}

json matrix_json(const std::vector<std::vector<double>>& m) {
    json a = json::array();
    for (const auto& row : m) {
        json r = json::array();
        for (double v : row) r.push_back(real(v));
        a.push_back(std::move(r));
    }
    return a;
}

}  // namespace

json to_json(const FitResult& fit) {
    return {{"type", "FitResult"},
            {"scale", fit.scale.value()},
            {"estimate", real(fit.estimate)},
            {"chi2_min", real(fit.chi2_min)},
            {"n_bins_used", fit.n_bins_used},
            {"n_samples", fit.n_samples},
            {"iterations", fit.iterations},
            {"bracket", {real(fit.bracket_lo), real(fit.bracket_hi)}},
            {"domain", {real(fit.domain_lo), real(fit.domain_hi)}},
            {"boundary_hit", fit.boundary_hit},
            {"rho_eps", real(fit.rho_eps)}};
}

json to_json(const ScaleProfile& profile, const std::string& parameter) {
    json fits = json::array();
    for (const auto& f : profile.fits) fits.push_back(to_json(f));
    json values = json::array();
    for (double v : profile.values) values.push_back(real(v));
    json j = {{"type", "ScaleProfile"},
              {"parameter", parameter},
              {"scales", scales_json(profile.scales)},
              {"values", values},
              {"fits", fits},
              {"failures", failures_json(profile.failures)}};
    if (!profile.lambda2_1.empty()) {
        j["lambda2_1"] = profile.lambda2_1;
        j["lambda2_2"] = profile.lambda2_2;
    }
    return j;
}

json to_json(const MomentGrid& grid, const std::string& label) {
    return {{"type", "MomentGrid"},
            {"label", label},
            {"q_values", grid.q_values},
            {"scales", scales_json(grid.scales)},
            {"values", matrix_json(grid.values)},
            {"failures", failures_json(grid.failures)}};
}

json to_json(const RollingResult& rolling) {
    json starts = json::array();
    for (MonthIndex m : rolling.window_starts) starts.push_back(format_month(m));
    return {{"type", "RollingResult"},
            {"window_starts", starts},
            {"window_length", rolling.window_length},
            {"step", rolling.step},
            {"scale", rolling.scale.value()},
            {"q_values", rolling.q_values},
            {"moments1", matrix_json(rolling.moments1)},
            {"moments2", matrix_json(rolling.moments2)},
            {"joint", matrix_json(rolling.joint)}};
}

json make_bundle(const RunMetadata& meta, json payload) {
    json inputs = json::array();
    for (const auto& in : meta.inputs) {
        inputs.push_back({{"path", in.path},
                          {"series_name", in.series_name},
                          {"records", in.records},
                          {"first_month", in.first_month},
                          {"last_month", in.last_month}});
    }
    return {{"format_version", kBundleFormatVersion},
            {"metadata",
             {{"command", meta.command},
              {"argv", meta.argv},
              {"config_hash", meta.config_hash},
              {"seed", meta.seed},
              {"timestamp", meta.timestamp},
              {"inputs", inputs}}},
            {"payload", std::move(payload)}};
}

namespace {

void require(std::vector<std::string>& problems, const json& obj, const char* key,
             json::value_t type, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        problems.push_back(where + ": missing '" + key + "'");
        return;
    }
    const json& v = obj.at(key);
    const bool ok = type == json::value_t::number_float
                        ? v.is_number()
                        : (type == json::value_t::number_unsigned ? v.is_number_integer()
                                                                  : v.type() == type);
    if (!ok) problems.push_back(where + ": '" + key + "' has the wrong type");
}

void require_matrix(std::vector<std::string>& problems, const json& obj, const char* key,
                    std::size_t rows, std::size_t cols, const std::string& where) {
    require(problems, obj, key, json::value_t::array, where);
    if (!obj.contains(key) || !obj.at(key).is_array()) return;
    const json& m = obj.at(key);
    if (m.size() != rows) {
        problems.push_back(where + ": '" + key + "' has " + std::to_string(m.size()) +
                           " rows, expected " + std::to_string(rows));
        return;
    }
    for (const auto& r : m) {
        if (!r.is_array() || r.size() != cols) {
            problems.push_back(where + ": '" + key + "' row has wrong length");
            return;
        }
        for (const auto& v : r) {
            if (!v.is_number() && !v.is_null()) {
                problems.push_back(where + ": '" + key + "' holds a non-numeric entry");
                return;
            }
        }
    }
}

}  // namespace

std::vector<std::string> validate_bundle(const json& b) {
    using vt = json::value_t;
    std::vector<std::string> problems;
    if (!b.is_object()) return {"bundle is not a JSON object"};
    require(problems, b, "format_version", vt::number_unsigned, "bundle");
    if (b.contains("format_version") && b["format_version"].is_number_integer() &&
        b["format_version"].get<int>() != kBundleFormatVersion) {
        problems.push_back("bundle: unsupported format_version " + b["format_version"].dump());
        return problems;
    }
    require(problems, b, "metadata", vt::object, "bundle");
    require(problems, b, "payload", vt::object, "bundle");
    if (!problems.empty()) return problems;

    const json& meta = b["metadata"];
    require(problems, meta, "command", vt::string, "metadata");
    require(problems, meta, "argv", vt::array, "metadata");
    require(problems, meta, "config_hash", vt::string, "metadata");
    require(problems, meta, "seed", vt::number_unsigned, "metadata");
    require(problems, meta, "timestamp", vt::string, "metadata");
    require(problems, meta, "inputs", vt::array, "metadata");

    const json& p = b["payload"];
    require(problems, p, "type", vt::string, "payload");
    if (!p.contains("type") || !p["type"].is_string()) return problems;
    const std::string type = p["type"];
    static const std::map<std::string, std::vector<std::string>> allowed = {
        {"fit-uni", {"ScaleProfile"}},          {"fit-joint", {"ScaleProfile"}},
        {"moments", {"MomentGrid", "MomentSet"}}, {"rolling", {"RollingResult"}},
        {"simulate", {"Simulation"}},           {"ingest-check", {"IngestReport"}}};
    if (meta.contains("command") && meta["command"].is_string()) {
        const auto it = allowed.find(meta["command"].get<std::string>());
        if (it == allowed.end()) {
            problems.push_back("metadata: unknown command '" + meta["command"].get<std::string>() + "'");
        } else if (std::find(it->second.begin(), it->second.end(), type) == it->second.end()) {
            problems.push_back("payload type '" + type + "' does not match command '" +
                               meta["command"].get<std::string>() + "'");
        }
    }

    if (type == "ScaleProfile") {
        require(problems, p, "parameter", vt::string, "payload");
        require(problems, p, "scales", vt::array, "payload");
        require(problems, p, "values", vt::array, "payload");
        require(problems, p, "fits", vt::array, "payload");
        require(problems, p, "failures", vt::array, "payload");
        if (problems.empty() && p["scales"].size() != p["values"].size()) {
            problems.push_back("payload: scales and values differ in length");
        }
        if (problems.empty()) {
            for (std::size_t i = 1; i < p["scales"].size(); ++i) {
                if (p["scales"][i].get<int>() <= p["scales"][i - 1].get<int>()) {
                    problems.push_back("payload: scales not strictly increasing");
                    break;
                }
            }
        }
    } else if (type == "MomentGrid") {
        require(problems, p, "q_values", vt::array, "payload");
        require(problems, p, "scales", vt::array, "payload");
        if (problems.empty()) {
            require_matrix(problems, p, "values", p["q_values"].size(), p["scales"].size(), "payload");
        }
    } else if (type == "MomentSet") {
        require(problems, p, "grids", vt::array, "payload");
        if (problems.empty()) {
            for (const auto& g : p["grids"]) {
                require(problems, g, "q_values", vt::array, "grid");
                require(problems, g, "scales", vt::array, "grid");
                if (problems.empty()) {
                    require_matrix(problems, g, "values", g["q_values"].size(), g["scales"].size(), "grid");
                }
            }
        }
    } else if (type == "RollingResult") {
        require(problems, p, "window_starts", vt::array, "payload");
        require(problems, p, "window_length", vt::number_unsigned, "payload");
        require(problems, p, "step", vt::number_unsigned, "payload");
        require(problems, p, "scale", vt::number_unsigned, "payload");
        require(problems, p, "q_values", vt::array, "payload");
        if (problems.empty()) {
            const std::size_t rows = p["window_starts"].size();
            const std::size_t cols = p["q_values"].size();
            for (const char* key : {"moments1", "moments2", "joint"}) {
                require_matrix(problems, p, key, rows, cols, "payload");
            }
        }
    } else if (type == "Simulation") {
        require(problems, p, "kind", vt::string, "payload");
        require(problems, p, "n", vt::number_unsigned, "payload");
        require(problems, p, "params", vt::object, "payload");
    } else if (type == "IngestReport") {
        require(problems, p, "records", vt::number_unsigned, "payload");
        require(problems, p, "first_month", vt::string, "payload");
        require(problems, p, "last_month", vt::string, "payload");
    } else {
        problems.push_back("payload: unknown type '" + type + "'");
    }
    return problems;
}

json load_bundle(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::Io, "cannot open bundle '" + path + "'");
    json b;
    try {
        b = json::parse(f);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, "bundle '" + path + "': " + e.what());
    }
    const auto problems = validate_bundle(b);
    if (!problems.empty()) {
        throw Error(ErrorKind::Parse, "bundle '" + path + "' invalid: " + problems.front());
    }
    return b;
}

std::string fnv1a_hex(const std::vector<std::string>& parts) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& s : parts) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        h ^= 0x1f;  // separator
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace mrw
