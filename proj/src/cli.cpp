#include "mrw/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "mrw/errors.hpp"
#include "mrw/estimator.hpp"
#include "mrw/ingest.hpp"
#include "mrw/result_bundle.hpp"
#include "mrw/synthgen.hpp"

namespace mrw::cli {

namespace {

using nlohmann::json;

constexpr const char* kOutputDirEnv = "MRW_OUTPUT_DIR";

const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  2  usage error (unknown flag, malformed option value)\n"
    "  3  invalid input or configuration (unparseable or empty CSV, duplicate month,\n"
    "     misaligned or non-overlapping series)\n"
    "  4  analysis error (invalid scale, degenerate series, insufficient data,\n"
    "     invalid parameters or window)\n"
    "  5  output could not be written, or an input could not be opened\n"
    "On failure a one-line JSON error record is written to stderr.\n"
    "Relative --out paths are resolved against $MRW_OUTPUT_DIR when it is set.";

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse:
        case ErrorKind::EmptyFile:
        case ErrorKind::DuplicateMonth:
        case ErrorKind::InvalidSeries:
        case ErrorKind::EmptyIntersection:
        case ErrorKind::Alignment:
            return kInvalidConfig;
        case ErrorKind::Io:
            return kIo;
        default:
            return kAnalysis;
    }
}

void write_error(std::ostream& err, std::string_view kind, int code, const std::string& message) {
    json rec = {{"error", {{"kind", kind}, {"exit_code", code}, {"message", message}}}};
    err << rec.dump() << '\n';
}

// "a:b[:step]" or comma-separated values, expanded in ascending order.
std::vector<double> parse_real_list(const std::string& text, bool integral) {
    auto to_real = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty() || !std::isfinite(v) ||
            (integral && v != std::floor(v))) {
            throw CLI::ValidationError("list", "cannot parse '" + s + "' in '" + text + "'");
        }
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(p);
        if (parts.size() < 2 || parts.size() > 3) {
            throw CLI::ValidationError("range", "expected a:b[:step], got '" + text + "'");
        }
        const double a = to_real(parts[0]);
        const double b = to_real(parts[1]);
        const double step = parts.size() == 3 ? to_real(parts[2]) : 1.0;
        if (!(step > 0.0) || b < a) {
            throw CLI::ValidationError("range", "empty or reversed range '" + text + "'");
        }
        const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
        for (long k = 0; k < count; ++k) out.push_back(a + static_cast<double>(k) * step);
    } else {
        std::stringstream ss(text);
        std::string p;
        while (std::getline(ss, p, ',')) out.push_back(to_real(p));
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return out;
}

std::vector<Scale> parse_scales(const std::string& text) {
    std::vector<Scale> scales;
    for (double v : parse_real_list(text, true)) {
        if (v < 1.0) throw CLI::ValidationError("--scales", "scales must be >= 1");
        scales.emplace_back(static_cast<int>(v));
    }
    return scales;
}

std::string resolve_out(const std::string& path) {
    if (path.empty()) return path;
    const char* dir = std::getenv(kOutputDirEnv);
    std::filesystem::path p(path);
    if (dir != nullptr && *dir != '\0' && p.is_relative()) return (std::filesystem::path(dir) / p).string();
    return path;
}

// "x.csv" + ".raw" -> "x.raw.csv"
std::string sibling(const std::string& path, const std::string& tag) {
    const std::string ext = ".csv";
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
        return path.substr(0, path.size() - ext.size()) + tag + ext;
    }
    return path + tag + ext;
}

struct InputOptions {
    std::string date_column = "date";
    std::string date_format = "%Y-%m";
};

struct Context {
    std::istream& in;
    std::ostream& out;
    std::vector<std::string> argv;
    std::string command;
    std::uint64_t seed = 0;
    std::string out_path;
    std::string bundle_path;
    std::vector<InputInfo> inputs;

    // CSV goes to --out (atomic) or to stdout.
    void emit_csv(const std::string& content) const {
        if (out_path.empty()) {
            out << content;
        } else {
            write_file_atomic(resolve_out(out_path), content);
        }
    }

    void emit_extra_csv(const std::string& tag, const std::string& content) const {
        if (!out_path.empty()) write_file_atomic(resolve_out(sibling(out_path, tag)), content);
    }

    void emit_bundle(json payload) const {
        std::string target = bundle_path;
        if (target.empty() && !out_path.empty()) target = out_path + ".json";
        if (target.empty()) return;
        RunMetadata meta;
        meta.command = command;
        meta.argv = argv;
        meta.config_hash = fnv1a_hex(argv);
        meta.seed = seed;
        meta.timestamp = utc_timestamp();
        meta.inputs = inputs;
        write_file_atomic(resolve_out(target), make_bundle(meta, std::move(payload)).dump(2) + "\n");
    }
};

SeriesRecord load(Context& ctx, const std::string& path, const std::string& value_column,
                  const InputOptions& io) {
    IngestConfig cfg;
    cfg.path = path;
    cfg.date_column = io.date_column;
    cfg.value_column = value_column;
    cfg.date_format = io.date_format;
    IngestReport rep;
    SeriesRecord s = path == "-" ? read_csv(ctx.in, cfg, &rep) : ingest_csv(cfg, &rep);
    ctx.inputs.push_back({path, s.name(), s.size(), format_month(rep.first), format_month(rep.last)});
    return s;
}

std::string increments_count(const SeriesRecord& s, Scale scale) {
    const auto n = static_cast<std::size_t>(scale.value());
    return std::to_string(n < s.size() ? s.size() - n : 0);
}

std::string moment_matrix_csv(const MomentGrid& grid, const std::vector<Scale>& requested,
                              bool raw) {
    std::string csv = "q\\scale";
    for (Scale s : requested) csv += "," + std::to_string(s.value());
    csv += '\n';
    for (std::size_t qi = 0; qi < grid.q_values.size(); ++qi) {
        const double q = grid.q_values[qi];
        csv += format_real(q);
        std::size_t si = 0;
        for (Scale s : requested) {
            double v = std::nan("");
            if (si < grid.scales.size() && grid.scales[si] == s) v = grid.values[qi][si++];
            csv += "," + format_real(raw ? std::pow(v, q) : v);
        }
        csv += '\n';
    }
    return csv;
}

std::string rolling_matrix_csv(const RollingResult& r, const std::vector<std::vector<double>>& m,
                               bool raw) {
    std::string csv = "window_start\\q";
    for (double q : r.q_values) csv += "," + format_real(q);
    csv += '\n';
    for (std::size_t w = 0; w < r.window_starts.size(); ++w) {
        csv += format_month(r.window_starts[w]);
        for (std::size_t qi = 0; qi < r.q_values.size(); ++qi) {
            const double v = m[w][qi];
            csv += "," + format_real(raw ? std::pow(v, r.q_values[qi]) : v);
        }
        csv += '\n';
    }
    return csv;
}

}  // namespace

int run_command(const std::vector<std::string>& argv, std::istream& in, std::ostream& out,
                std::ostream& err) {
    CLI::App app{"Scale-dependent non-Gaussianity (cascade lambda^2) and coupling (Lambda) of "
                 "monthly time series"};
    app.footer(kExitCodeHelp);
    app.require_subcommand(1);

    Context ctx{in, out, argv, "", 0, "", "", {}};
    InputOptions io;
    std::string input;
    std::string input1;
    std::string input2;
    std::string value_column = "value";
    std::string value_column2 = "value";
    std::string scales_text;
    std::string q_text = "1:8";
    int bins = kDefaultBins;
    int joint_bins = kDefaultJointBins;
    double clip = kDefaultClipSd;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", ctx.out_path, "Output CSV path (default: stdout)");
        sub->add_option("--bundle", ctx.bundle_path,
                        "JSON result bundle path (default: <out>.json when --out is given)");
        sub->add_option("--seed", ctx.seed, "Seed recorded in metadata and used by generators");
        sub->add_option("--date-column", io.date_column, "Date column name or 0-based index")
            ->capture_default_str();
        sub->add_option("--date-format", io.date_format, "Date pattern (%Y, %m, %d tokens)")
            ->capture_default_str();
    };

    CLI::App* fit_uni = app.add_subcommand("fit-uni", "Fit lambda^2(s) over a list of scales");
    add_common(fit_uni);
    fit_uni->add_option("--input", input, "Input CSV ('-' for stdin)")->required();
    fit_uni->add_option("--value-column", value_column)->capture_default_str();
    fit_uni->add_option("--scales", scales_text, "Scales in months, a:b[:step] or a,b,c")->required();
    fit_uni->add_option("--bins", bins)->capture_default_str();
    fit_uni->add_option("--clip", clip, "Histogram range clip in standard deviations")
        ->capture_default_str();

    CLI::App* fit_joint = app.add_subcommand("fit-joint", "Fit the coupling Lambda(s) of two series");
    add_common(fit_joint);
    fit_joint->add_option("--input1", input1)->required();
    fit_joint->add_option("--input2", input2)->required();
    fit_joint->add_option("--value-column1", value_column)->capture_default_str();
    fit_joint->add_option("--value-column2", value_column2)->capture_default_str();
    fit_joint->add_option("--scales", scales_text)->required();
    fit_joint->add_option("--bins", bins, "Bins of the marginal histograms")->capture_default_str();
    fit_joint->add_option("--joint-bins", joint_bins, "Bins per axis of the joint histogram")
        ->capture_default_str();
    fit_joint->add_option("--clip", clip)->capture_default_str();
    std::string rho_mode_text = "likelihood";
    fit_joint->add_option("--rho-marginalization", rho_mode_text,
                          "How rho_eps is integrated out: likelihood or chi2-sum")
        ->check(CLI::IsMember({"likelihood", "chi2-sum"}))
        ->capture_default_str();

    CLI::App* moments = app.add_subcommand(
        "moments", "Moment grid m_q over (q, s); with --input2 also the joint moments");
    add_common(moments);
    moments->add_option("--input", input)->required();
    moments->add_option("--input2", input2);
    moments->add_option("--value-column", value_column)->capture_default_str();
    moments->add_option("--value-column2", value_column2)->capture_default_str();
    moments->add_option("--scales", scales_text)->required();
    moments->add_option("--q", q_text, "Moment orders, a:b[:step] or a,b,c")->capture_default_str();

    std::string standardize_text = "window";
    RollingOptions ropts;
    int rolling_scale = 12;
    CLI::App* rolling = app.add_subcommand("rolling", "Sliding-window moments of two series");
    add_common(rolling);
    rolling->add_option("--input1", input1)->required();
    rolling->add_option("--input2", input2)->required();
    rolling->add_option("--value-column1", value_column)->capture_default_str();
    rolling->add_option("--value-column2", value_column2)->capture_default_str();
    rolling->add_option("--window", ropts.window, "Window length in months")->capture_default_str();
    rolling->add_option("--step", ropts.step, "Window step in months")->capture_default_str();
    rolling->add_option("--scale", rolling_scale, "Increment scale in months")->capture_default_str();
    rolling->add_option("--q", q_text)->capture_default_str();
    rolling->add_option("--standardize", standardize_text,
                        "window: z-score inside each window; global: once over the series")
        ->check(CLI::IsMember({"window", "global"}))
        ->capture_default_str();

    std::string kind_text = "uni-cascade";
    std::string form_text = "path";
    std::string start_text = "1948-01";
    std::string out2;
    CascadeParams up;
    BiCascadeParams bp;
    std::size_t sim_n = 0;
    double decorrelation = 1024.0;
    double lambda2_1 = 0.0;
    CLI::App* simulate = app.add_subcommand("simulate", "Generate synthetic cascade data as CSV");
    simulate->add_option("--out", ctx.out_path, "Output CSV path (default: stdout)");
    simulate->add_option("--bundle", ctx.bundle_path);
    simulate->add_option("--seed", ctx.seed)->capture_default_str();
    simulate->add_option("--kind", kind_text)
        ->check(CLI::IsMember({"uni-cascade", "bi-cascade", "mrw-path"}))
        ->capture_default_str();
    simulate->add_option("--n", sim_n, "Number of samples (path length for mrw-path)")->required();
    simulate->add_option("--lambda2", lambda2_1, "lambda^2 (of the first series for bi-cascade)");
    simulate->add_option("--sigma", up.sigma)->capture_default_str();
    simulate->add_option("--lambda2-2", bp.lambda2_2);
    simulate->add_option("--Lambda", bp.Lambda);
    simulate->add_option("--rho", bp.rho_eps, "Gaussian-part correlation");
    simulate->add_option("--L", decorrelation, "Decorrelation length (mrw-path)")->capture_default_str();
    simulate->add_option("--start", start_text, "First month, YYYY-MM")->capture_default_str();
    simulate->add_option("--form", form_text,
                         "path: emit the running sum (lag-1 increments are the draws); "
                         "increments: emit the draws themselves")
        ->check(CLI::IsMember({"path", "increments"}))
        ->capture_default_str();
    simulate->add_option("--out2", out2, "Second series of a bi-cascade (default: third column)");

    CLI::App* check = app.add_subcommand("ingest-check", "Validate an input CSV and report its span");
    add_common(check);
    check->add_option("--input", input)->required();
    check->add_option("--value-column", value_column)->capture_default_str();

    std::vector<const char*> cargv;
    cargv.reserve(argv.size());
    for (const auto& a : argv) cargv.push_back(a.c_str());
    if (cargv.empty()) cargv.push_back("mrw");
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        write_error(err, "usage", kUsage, e.what());
        return kUsage;
    }

    try {
        if (fit_uni->parsed()) {
            ctx.command = "fit-uni";
            const auto scales = parse_scales(scales_text);
            const SeriesRecord s = load(ctx, input, value_column, io);
            const ScaleProfile profile = sweep_lambda2(s, scales, {bins, joint_bins, clip});
            std::string csv = "scale,lambda2_hat,chi2,n\n";
            std::size_t k = 0;
            for (Scale sc : scales) {
                csv += std::to_string(sc.value()) + ",";
                if (k < profile.scales.size() && profile.scales[k] == sc) {
                    const FitResult& f = profile.fits[k++];
                    csv += format_real(f.estimate) + "," + format_real(f.chi2_min) + "," +
                           std::to_string(f.n_samples) + "\n";
                } else {
                    csv += "nan,nan," + increments_count(s, sc) + "\n";
                }
            }
            ctx.emit_csv(csv);
            ctx.emit_bundle(to_json(profile, "lambda2"));
        } else if (fit_joint->parsed()) {
            ctx.command = "fit-joint";
            const auto scales = parse_scales(scales_text);
            const SeriesRecord a = load(ctx, input1, value_column, io);
            const SeriesRecord b = load(ctx, input2, value_column2, io);
            const auto [s1, s2] = align(a, b);
            const RhoMarginalization rho_mode = rho_mode_text == "chi2-sum"
                                                    ? RhoMarginalization::ChiSquareSum
                                                    : RhoMarginalization::Likelihood;
            const ScaleProfile profile =
                sweep_Lambda(s1, s2, scales, {bins, joint_bins, clip, rho_mode});
            std::string csv = "scale,Lambda_hat,chi2,n,lambda2_1,lambda2_2\n";
            std::size_t k = 0;
            for (Scale sc : scales) {
                csv += std::to_string(sc.value()) + ",";
                if (k < profile.scales.size() && profile.scales[k] == sc) {
                    const FitResult& f = profile.fits[k];
                    csv += format_real(f.estimate) + "," + format_real(f.chi2_min) + "," +
                           std::to_string(f.n_samples) + "," + format_real(profile.lambda2_1[k]) +
                           "," + format_real(profile.lambda2_2[k]) + "\n";
                    ++k;
                } else {
                    csv += "nan,nan," + increments_count(s1, sc) + ",nan,nan\n";
                }
            }
            ctx.emit_csv(csv);
            ctx.emit_bundle(to_json(profile, "Lambda"));
        } else if (moments->parsed()) {
            ctx.command = "moments";
            const auto scales = parse_scales(scales_text);
            const auto qs = parse_real_list(q_text, false);
            const SeriesRecord a = load(ctx, input, value_column, io);
            if (input2.empty()) {
                const MomentGrid g = sweep_moments(a, scales, qs);
                ctx.emit_csv(moment_matrix_csv(g, scales, false));
                ctx.emit_extra_csv(".raw", moment_matrix_csv(g, scales, true));
                ctx.emit_bundle(to_json(g, a.name()));
            } else {
                const SeriesRecord b = load(ctx, input2, value_column2, io);
                const auto [s1, s2] = align(a, b);
                const MomentGrid g1 = sweep_moments(s1, scales, qs);
                const MomentGrid g2 = sweep_moments(s2, scales, qs);
                const MomentGrid gj = sweep_joint_moments(s1, s2, scales, qs);
                ctx.emit_csv(moment_matrix_csv(gj, scales, false));
                ctx.emit_extra_csv(".raw", moment_matrix_csv(gj, scales, true));
                ctx.emit_extra_csv(".x1", moment_matrix_csv(g1, scales, false));
                ctx.emit_extra_csv(".x2", moment_matrix_csv(g2, scales, false));
                ctx.emit_bundle({{"type", "MomentSet"},
                                 {"grids",
                                  {to_json(gj, "joint"), to_json(g1, s1.name()),
                                   to_json(g2, s2.name())}}});
            }
        } else if (rolling->parsed()) {
            ctx.command = "rolling";
            const auto qs = parse_real_list(q_text, false);
            ropts.scale = Scale{rolling_scale};
            ropts.standardization = standardize_text == "global" ? WindowStandardization::Global
                                                                 : WindowStandardization::PerWindow;
            const SeriesRecord a = load(ctx, input1, value_column, io);
            const SeriesRecord b = load(ctx, input2, value_column2, io);
            const auto [s1, s2] = align(a, b);
            const RollingResult r = rolling_scan(s1, s2, qs, ropts);
            ctx.emit_csv(rolling_matrix_csv(r, r.joint, false));
            ctx.emit_extra_csv(".raw", rolling_matrix_csv(r, r.joint, true));
            ctx.emit_extra_csv(".x1", rolling_matrix_csv(r, r.moments1, false));
            ctx.emit_extra_csv(".x2", rolling_matrix_csv(r, r.moments2, false));
            ctx.emit_bundle(to_json(r));
        } else if (simulate->parsed()) {
            ctx.command = "simulate";
            const MonthIndex start = parse_month(start_text, "%Y-%m");
            const bool as_path = form_text == "path";
            auto to_series = [&](const std::vector<double>& draws, const std::string& name) {
                std::vector<double> v = as_path ? integrate_path(draws) : draws;
                std::vector<MonthIndex> ts(v.size());
                for (std::size_t t = 0; t < ts.size(); ++t) ts[t] = start + static_cast<MonthIndex>(t);
                return SeriesRecord(name, std::move(ts), std::move(v));
            };
            json params;
            if (kind_text == "uni-cascade") {
                up.lambda2 = lambda2_1;
                const auto draws = gen_cascade(up, sim_n, ctx.seed);
                ctx.emit_csv(series_to_csv(to_series(draws, "uni-cascade")));
                params = {{"lambda2", up.lambda2}, {"sigma", up.sigma}};
            } else if (kind_text == "bi-cascade") {
                bp.lambda2_1 = lambda2_1;
                const SamplePairs pairs = gen_bicascade(bp, sim_n, ctx.seed);
                const SeriesRecord s1 = to_series(pairs.x1, "x1");
                const SeriesRecord s2 = to_series(pairs.x2, "x2");
                if (!out2.empty()) {
                    ctx.emit_csv(series_to_csv(s1));
                    write_file_atomic(resolve_out(out2), series_to_csv(s2));
                } else {
                    std::string csv = "date,value,value2\n";
                    for (std::size_t t = 0; t < s1.size(); ++t) {
                        csv += format_month(s1.timestamps()[t]) + "," + format_real(s1.values()[t]) +
                               "," + format_real(s2.values()[t]) + "\n";
                    }
                    ctx.emit_csv(csv);
                }
                params = {{"lambda2_1", bp.lambda2_1}, {"lambda2_2", bp.lambda2_2},
                          {"Lambda", bp.Lambda},       {"rho_eps", bp.rho_eps}};
            } else {
                up.lambda2 = lambda2_1;
                GeneratorSpec spec{GeneratorKind::MrwPath, up, sim_n, ctx.seed, decorrelation};
                const SeriesRecord path = gen_mrw_path(spec, start);
                ctx.emit_csv(series_to_csv(path));
                params = {{"lambda2", up.lambda2}, {"sigma", up.sigma}, {"L", decorrelation}};
            }
            ctx.emit_bundle({{"type", "Simulation"},
                             {"kind", kind_text},
                             {"n", sim_n},
                             {"form", form_text},
                             {"params", params}});
        } else if (check->parsed()) {
            ctx.command = "ingest-check";
            IngestConfig cfg;
            cfg.path = input;
            cfg.date_column = io.date_column;
            cfg.value_column = value_column;
            cfg.date_format = io.date_format;
            IngestReport rep;
            const SeriesRecord s = input == "-" ? read_csv(in, cfg, &rep) : ingest_csv(cfg, &rep);
            ctx.inputs.push_back({input, s.name(), s.size(), format_month(rep.first), format_month(rep.last)});
            json report = {{"type", "IngestReport"},
                           {"series_name", s.name()},
                           {"records", rep.records},
                           {"first_month", format_month(rep.first)},
                           {"last_month", format_month(rep.last)},
                           {"gap_months", rep.gap_months},
                           {"skipped_missing", rep.skipped_missing},
                           {"cadence", s.cadence()}};
            out << report.dump(2) << '\n';
            ctx.emit_bundle(report);
        }
    } catch (const CLI::ValidationError& e) {
        write_error(err, "usage", kUsage, e.what());
        return kUsage;
    } catch (const Error& e) {
        const int code = exit_code_for(e.kind());
        write_error(err, to_string(e.kind()), code, e.what());
        return code;
    } catch (const std::exception& e) {
        write_error(err, "internal", kAnalysis, e.what());
        return kAnalysis;
    }
    return kOk;
}

}  // namespace mrw::cli
