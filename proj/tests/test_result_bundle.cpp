#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mrw/errors.hpp"
#include "mrw/ingest.hpp"
#include "mrw/result_bundle.hpp"

using namespace mrw;
using nlohmann::json;

namespace {

RunMetadata metadata(const std::string& command) {
    RunMetadata m;
    m.command = command;
    m.argv = {"mrw", command, "--seed", "7"};
    m.config_hash = fnv1a_hex(m.argv);
    m.seed = 7;
    m.timestamp = utc_timestamp();
    m.inputs.push_back({"u.csv", "UNRATE", 850, "1948-01", "2018-10"});
    return m;
}

ScaleProfile profile() {
    ScaleProfile p;
    p.scales = {Scale(1), Scale(2), Scale(3)};
    FitResult f;
    f.scale = Scale(1);
    f.estimate = 0.25;
    f.domain_hi = 1.5;
    p.fits = {f, f};
    p.fits[1].scale = Scale(3);
    p.values = {0.25, std::nan(""), 0.25};
    p.failures.push_back({Scale(2), ErrorKind::DegenerateSeries, "flat"});
    return p;
}

}  // namespace

TEST_CASE("fit results encode every field") {
    FitResult f;
    f.scale = Scale(12);
    f.estimate = 0.125;
    f.chi2_min = 33.5;
    f.n_bins_used = 60;
    f.n_samples = 838;
    f.boundary_hit = true;
    const json j = to_json(f);
    CHECK(j["type"] == "FitResult");
    CHECK(j["scale"] == 12);
    CHECK(j["estimate"] == 0.125);
    CHECK(j["n_bins_used"] == 60);
    CHECK(j["boundary_hit"] == true);
    CHECK(j["rho_eps"].is_null());
    CHECK(j["bracket"].size() == 2u);
}

TEST_CASE("gaps become null") {
    const json j = to_json(profile(), "lambda2");
    CHECK(j["values"][1].is_null());
    CHECK(j["values"][0] == 0.25);
    CHECK(j["failures"][0]["scale"] == 2);
    CHECK(j["failures"][0]["kind"] == std::string(to_string(ErrorKind::DegenerateSeries)));
    CHECK_FALSE(j.contains("lambda2_1"));
}

TEST_CASE("bundles validate and round-trip through disk") {
    const json b = make_bundle(metadata("fit-uni"), to_json(profile(), "lambda2"));
    CHECK(validate_bundle(b).empty());
    CHECK(b["format_version"] == kBundleFormatVersion);
    CHECK(b["metadata"]["config_hash"].get<std::string>().size() == 16u);

    const auto dir = std::filesystem::temp_directory_path() / "mrw_bundle_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "fit.json").string();
    write_file_atomic(path, b.dump(2));
    CHECK(load_bundle(path) == b);

    write_file_atomic(path, "{not json");
    CHECK_THROWS_AS(load_bundle(path), Error);
    CHECK_THROWS_AS(load_bundle((dir / "none.json").string()), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("validation finds layout problems") {
    const json good = make_bundle(metadata("fit-uni"), to_json(profile(), "lambda2"));
    CHECK_FALSE(validate_bundle(json::array()).empty());

    json b = good;
    b["format_version"] = 99;
    CHECK_FALSE(validate_bundle(b).empty());

    b = good;
    b["metadata"].erase("seed");
    CHECK_FALSE(validate_bundle(b).empty());

    b = good;
    b["metadata"]["command"] = "rolling";
    CHECK_FALSE(validate_bundle(b).empty());

    b = good;
    b["payload"]["values"].push_back(1.0);
    CHECK_FALSE(validate_bundle(b).empty());

    b = good;
    b["payload"]["scales"] = {3, 2, 1};
    CHECK_FALSE(validate_bundle(b).empty());

    b = good;
    b["payload"]["type"] = "Mystery";
    CHECK_FALSE(validate_bundle(b).empty());
}

TEST_CASE("moment grids and rolling results") {
    MomentGrid g;
    g.q_values = {1, 2};
    g.scales = {Scale(1), Scale(4), Scale(9)};
    g.values = {{0.8, 0.9, std::nan("")}, {1, 1, 1}};
    const json jg = make_bundle(metadata("moments"), to_json(g, "series"));
    CHECK(validate_bundle(jg).empty());
    CHECK(jg["payload"]["values"][0][2].is_null());
    json broken = jg;
    broken["payload"]["values"][1].push_back(2.0);
    CHECK_FALSE(validate_bundle(broken).empty());

    RollingResult r;
    r.window_starts = {make_month(1990, 1), make_month(1990, 2)};
    r.window_length = 60;
    r.step = 1;
    r.scale = Scale(12);
    r.q_values = {1, 2, 3};
    r.moments1 = r.moments2 = r.joint = {{1, 2, 3}, {1, 2, 3}};
    const json jr = make_bundle(metadata("rolling"), to_json(r));
    CHECK(validate_bundle(jr).empty());
    CHECK(jr["payload"]["window_starts"][1] == "1990-02");
    r.joint.pop_back();
    CHECK_FALSE(validate_bundle(make_bundle(metadata("rolling"), to_json(r))).empty());
}

TEST_CASE("configuration hash") {
    CHECK(fnv1a_hex({}) == "cbf29ce484222325");
    CHECK(fnv1a_hex({"a", "bc"}) != fnv1a_hex({"ab", "c"}));
    CHECK(fnv1a_hex({"fit-uni", "--scales", "1:36"}) == fnv1a_hex({"fit-uni", "--scales", "1:36"}));
    const std::string ts = utc_timestamp();
    CHECK(ts.size() == 20u);
    CHECK(ts.back() == 'Z');
}
