#pragma once

// Command implementations behind the wgn executable. Each returns a
// CommandResult; the executable prints `summary` to stderr and `json` to
// stdout when --json is set.
//
// Exit codes: 0 success, 1 validation or I/O error, 2 numerical failure.

#include "wgn/block_projection.hpp"
#include "wgn/error.hpp"
#include "wgn/feasible_set.hpp"
#include "wgn/latent_io.hpp"
#include "wgn/optimizer.hpp"
#include "wgn/random.hpp"
#include "wgn/report_io.hpp"
#include "wgn/spectral_map.hpp"
#include "wgn/toy_harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgn::cli {

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_numerical = 2 };

struct CommandResult {
    int exit_code = exit_ok;
    std::string summary;
    Json json = Json::object();
};

/// Runs fn and maps escaping exceptions onto the exit-code contract.
inline CommandResult guarded(const std::string& command, const std::function<CommandResult()>& fn)
{
    auto failure = [&](int code, const std::string& kind, const char* what) {
        CommandResult r;
        r.exit_code = code;
        r.summary = command + ": " + what;
        r.json = Json{{"schema_version", kJsonSchemaVersion}, {"command", command}, {"error", kind},
                      {"message", what}};
        return r;
    };
    try {
        return fn();
    } catch (const ValidationError& e) {
        return failure(exit_validation, "validation", e.what());
    } catch (const NumericalError& e) {
        return failure(exit_numerical, "numerical", e.what());
    } catch (const std::exception& e) {
        return failure(exit_validation, "io", e.what());
    }
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<double> gaussian_vector(std::size_t n, std::uint64_t seed)
{
    Engine engine(seed);
    std::vector<double> v(n);
    fill_standard_normal(v, engine);
    return v;
}

inline double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace detail

// ---------------------------------------------------------------- project

struct ProjectOptions {
    std::filesystem::path in_path;
    std::filesystem::path out_path;
    std::size_t block_size = BlockLayout::default_block_size;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> report_path;
};

/// Residuals above this multiple of B fail the command with exit 2.
inline constexpr double kResidualTolerance = 1e-9;

inline CommandResult cmd_project(const ProjectOptions& opt)
{
    return guarded("project", [&] {
        const LatentVector x = read_latent(opt.in_path);
        const BlockLayout layout = BlockLayout::for_length(x.size(), opt.block_size);
        const ProjectionReport report = project_to_feasible(x, layout, opt.seed);

        write_latent(opt.out_path, report.output);
        Json j = to_json(report);
        j["seed"] = opt.seed;
        j["block_size"] = opt.block_size;
        if (opt.report_path) detail::write_text(*opt.report_path, j.dump(2) + "\n");

        const double limit = kResidualTolerance * layout.l2sq_target();
        const double worst = std::max(report.max_block_l1_residual, report.max_block_l2_residual);

        CommandResult r;
        r.json = Json{{"schema_version", kJsonSchemaVersion}, {"command", "project"}, {"report", j}};
        std::ostringstream s;
        s << "project: N=" << x.size() << " B=" << opt.block_size << " cosine="
          << (report.cosine_similarity ? format_number(*report.cosine_similarity) : std::string("undefined"))
          << " distance=" << format_number(report.distance) << " max_residual=" << format_number(worst);
        if (worst >= limit) {
            r.exit_code = exit_numerical;
            s << " exceeds tolerance " << format_number(limit);
        }
        r.summary = s.str();
        return r;
    });
}

// ---------------------------------------------------------------- verify

struct Check {
    std::string name;
    double measured = 0.0;
    std::string relation; // how measured compares to threshold when passing
    double threshold = 0.0;
    bool passed = false;
};

inline Check check_below(std::string name, double measured, double threshold)
{
    return {std::move(name), measured, "<", threshold, measured < threshold};
}

inline Check check_at_most(std::string name, double measured, double threshold)
{
    return {std::move(name), measured, "<=", threshold, measured <= threshold};
}

inline Check check_near(std::string name, double measured, double expected, double tol)
{
    return {std::move(name) + " |x-" + format_number(expected) + "|", std::abs(measured - expected), "<=", tol,
            std::abs(measured - expected) <= tol};
}

namespace suites {

inline std::vector<Check> roundtrip(std::uint64_t seed)
{
    std::vector<Check> checks;
    std::uint64_t stream = 0;
    for (std::size_t n : {2u, 8u, 1024u, 65536u}) {
        const LatentVector x(detail::gaussian_vector(n, derive_seed(seed, stream++)));
        const LatentVector back = from_compact(to_compact(x));
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(back[i] - x[i]));
        checks.push_back(check_below("roundtrip max abs error N=" + std::to_string(n), err, 1e-10));
    }

    Engine engine(derive_seed(seed, stream++));
    double worst_rel = 0.0;
    for (int t = 0; t < 100; ++t) {
        std::vector<Complex> z(512);
        for (Complex& c : z) c = standard_complex_normal(engine);
        double zsq = 0.0;
        for (const Complex& c : z) zsq += std::norm(c);
        const LatentVector x = from_compact(CompactSpectrum(std::move(z)));
        double xsq = 0.0;
        for (double v : x.values()) xsq += v * v;
        worst_rel = std::max(worst_rel, std::abs(xsq - 2.0 * zsq) / (2.0 * zsq));
    }
    checks.push_back(check_below("norm relation ||F^-1 z||^2 = 2||z||^2, rel. error N=1024", worst_rel, 1e-10));

    const LatentVector big(detail::gaussian_vector(65536, derive_seed(seed, stream++)));
    const HermitianReport h = check_hermitian(dft_unitary(big), 1e-9);
    checks.push_back(check_below("hermitian symmetry max deviation N=65536",
                                 std::max({h.max_pair_deviation, h.dc_imag, h.nyquist_imag}), 1e-9));
    return checks;
}

/// Empirical mean and covariance of from_compact(z), z standard complex
/// Gaussian, N = 8.
inline std::vector<Check> gaussian(std::uint64_t seed, std::size_t draws = 1000000)
{
    constexpr std::size_t n = 8;
    Engine engine(derive_seed(seed, 0));
    std::array<double, n> mean{};
    std::array<double, n * n> second{};
    std::vector<Complex> z(n / 2);
    for (std::size_t d = 0; d < draws; ++d) {
        for (Complex& c : z) c = standard_complex_normal(engine);
        const LatentVector x = from_compact(CompactSpectrum(z));
        for (std::size_t i = 0; i < n; ++i) {
            mean[i] += x[i];
            for (std::size_t j = 0; j < n; ++j) second[i * n + j] += x[i] * x[j];
        }
    }
    const double count = static_cast<double>(draws);
    double worst_mean = 0.0;
    double worst_var = 0.0;
    double worst_cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean[i] /= count;
        worst_mean = std::max(worst_mean, std::abs(mean[i]));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double cov = second[i * n + j] / count - mean[i] * mean[j];
            const double dev = std::abs(cov - (i == j ? 1.0 : 0.0));
            worst_cov = std::max(worst_cov, dev);
            if (i == j) worst_var = std::max(worst_var, dev);
        }
    const std::string tag = " (N=8, " + std::to_string(draws) + " draws)";
    return {check_at_most("max |mean|" + tag, worst_mean, 0.005),
            check_at_most("max |variance - 1|" + tag, worst_var, 0.01),
            check_at_most("max |covariance - identity|" + tag, worst_cov, 0.01)};
}

/// Closed form against the lambda-scan oracle, plus the two-entry case whose
/// magnitudes are (sqrt(pi) +- sqrt(4 - pi)) / 2 for any ordered input.
inline std::vector<Check> oracle(std::uint64_t seed, std::size_t blocks = 1000)
{
    std::vector<Check> checks;
    for (std::size_t b : {2u, 4u, 8u}) {
        const BlockLayout layout(b, 1);
        Engine engine(derive_seed(seed, b));
        double worst_gap = 0.0;
        double worst_diff = 0.0;
        std::vector<Complex> block(b);
        for (std::size_t t = 0; t < blocks; ++t) {
            const double scale = std::exp(std::uniform_real_distribution<double>(-3.0, 3.0)(engine));
            for (Complex& c : block) c = scale * standard_complex_normal(engine);
            LazyEngine rng(derive_seed(seed, 1000 + t));
            const auto closed = project_block(block, layout, rng).projected;
            const auto reference = oracle_project_block(block, layout, 10000);
            double d_closed = 0.0;
            double d_oracle = 0.0;
            for (std::size_t j = 0; j < b; ++j) {
                d_closed += std::norm(block[j] - closed[j]);
                d_oracle += std::norm(block[j] - reference[j]);
                worst_diff = std::max(worst_diff, std::abs(closed[j] - reference[j]));
            }
            worst_gap = std::max(worst_gap, std::sqrt(d_closed) - std::sqrt(d_oracle));
        }
        const std::string tag = " B=" + std::to_string(b) + ", " + std::to_string(blocks) + " blocks";
        checks.push_back(check_at_most("distance gap closed-form minus oracle" + tag, worst_gap, 1e-6));
        checks.push_back(check_below("max |closed-form - oracle|" + tag, worst_diff, 1e-6));
    }

    const BlockLayout pair(2, 1);
    LazyEngine rng(derive_seed(seed, 0));
    const std::vector<Complex> worked{Complex(3.0, 0.0), Complex(1.0, 0.0)};
    const auto out = project_block(worked, pair, rng).projected;
    const double hi = 0.5 * (std::sqrt(std::numbers::pi) + std::sqrt(4.0 - std::numbers::pi));
    const double lo = 0.5 * (std::sqrt(std::numbers::pi) - std::sqrt(4.0 - std::numbers::pi));
    checks.push_back(check_near("B=2 input (3,1): first entry", out[0].real(), hi, 1e-12));
    checks.push_back(check_near("B=2 input (3,1): second entry", out[1].real(), lo, 1e-12));
    checks.push_back(check_near("B=2 input (3,1): first entry vs 1.3495", out[0].real(), 1.3495, 5e-5));
    checks.push_back(check_near("B=2 input (3,1): second entry vs 0.4230", out[1].real(), 0.4230, 5e-5));
    return checks;
}

inline std::vector<Check> wiener_khinchin(std::uint64_t seed)
{
    const LatentVector small(detail::gaussian_vector(64, derive_seed(seed, 0)));
    const LatentVector big(detail::gaussian_vector(65536, derive_seed(seed, 1)));
    return {check_below("Wiener-Khinchin max deviation N=64", wiener_khinchin_check(small), 1e-10),
            check_below("Wiener-Khinchin max deviation N=65536", wiener_khinchin_check(big), 1e-8)};
}

inline std::vector<Check> bounds(std::uint64_t seed, std::size_t samples = 20)
{
    std::vector<Check> checks{check_near("magnitude bound max B=8", magnitude_bounds(8).max, 2.11, 0.01),
                              check_near("magnitude bound max B=16", magnitude_bounds(16).max, 2.68, 0.01),
                              check_near("magnitude bound max B=32768", magnitude_bounds(32768).max, 84.74, 0.01)};

    const BlockLayout layout = BlockLayout::for_length(65536, 16);
    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const LatentVector x(detail::gaussian_vector(65536, derive_seed(seed, 2 * s)));
        const LatentVector p = project_to_feasible(x, layout, derive_seed(seed, 2 * s + 1)).output;
        const CompactSpectrum y = to_compact(p);
        for (const Complex& c : y.coeffs()) worst = std::max(worst, std::abs(c));
    }
    const std::string tag = " (B=16, " + std::to_string(samples) + " projected samples, N=65536)";
    checks.push_back(check_at_most("max |y_j| vs 2.6805 + 1e-9" + tag, worst, 2.6805 + 1e-9));
    checks.push_back(check_at_most("max |y_j| vs analytic bound + 1e-9" + tag, worst, magnitude_bounds(16).max + 1e-9));
    return checks;
}

} // namespace suites

struct VerifyOptions {
    std::string suite;
    std::uint64_t seed = 0;
};

inline CommandResult cmd_verify(const VerifyOptions& opt)
{
    return guarded("verify", [&] {
        std::vector<Check> checks;
        if (opt.suite == "roundtrip") checks = suites::roundtrip(opt.seed);
        else if (opt.suite == "gaussian") checks = suites::gaussian(opt.seed);
        else if (opt.suite == "oracle") checks = suites::oracle(opt.seed);
        else if (opt.suite == "wk") checks = suites::wiener_khinchin(opt.seed);
        else if (opt.suite == "bounds") checks = suites::bounds(opt.seed);
        else throw ValidationError("unknown suite '" + opt.suite + "' (roundtrip|gaussian|oracle|wk|bounds)");

        CommandResult r;
        Json list = Json::array();
        std::ostringstream s;
        bool all = true;
        for (const Check& c : checks) {
            all = all && c.passed;
            s << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << format_number(c.measured) << ' ' << c.relation
              << ' ' << format_number(c.threshold) << '\n';
            list.push_back(Json{{"name", c.name}, {"measured", c.measured}, {"relation", c.relation},
                                {"threshold", c.threshold}, {"passed", c.passed}});
        }
        s << "verify " << opt.suite << ": " << (all ? "all checks passed" : "FAILED");
        r.summary = s.str();
        r.exit_code = all ? exit_ok : exit_numerical;
        r.json = Json{{"schema_version", kJsonSchemaVersion}, {"command", "verify"}, {"suite", opt.suite},
                      {"seed", opt.seed}, {"passed", all}, {"checks", list}};
        return r;
    });
}

// ---------------------------------------------------------------- sample-study

struct SampleStudyOptions {
    std::size_t samples = 1000;
    std::size_t n = 65536;
    std::size_t block_size = BlockLayout::default_block_size;
    std::uint64_t seed = 0;
    std::filesystem::path out_csv;
    std::optional<std::filesystem::path> out_json; // defaults to out_csv with a .json extension
    unsigned threads = 0;                          // 0: hardware concurrency
};

inline CommandResult cmd_sample_study(const SampleStudyOptions& opt)
{
    return guarded("sample-study", [&] {
        if (opt.samples < 1) throw ValidationError("--samples must be >= 1");
        const BlockLayout layout = BlockLayout::for_length(opt.n, opt.block_size);
        const SimilarityStudyResult result = cosine_similarity_study(opt.samples, opt.n, layout, opt.seed, opt.threads);

        std::ostringstream csv;
        write_similarity_csv(csv, result);
        detail::write_text(opt.out_csv, csv.str());
        Json j = to_json(result);
        j["n"] = opt.n;
        j["block_size"] = opt.block_size;
        std::filesystem::path json_path = opt.out_json.value_or(std::filesystem::path(opt.out_csv).replace_extension(".json"));
        detail::write_text(json_path, j.dump(2) + "\n");

        CommandResult r;
        r.json = Json{{"schema_version", kJsonSchemaVersion}, {"command", "sample-study"}, {"result", j}};
        std::ostringstream s;
        s << "sample-study: " << result.sample_count << " samples N=" << opt.n << " B=" << opt.block_size;
        if (result.min_cos)
            s << " min=" << format_number(*result.min_cos) << " p01=" << format_number(*result.p01_cos)
              << " mean=" << format_number(*result.mean_cos);
        if (result.undefined_count > 0) s << " undefined=" << result.undefined_count;
        r.summary = s.str();
        return r;
    });
}

// ---------------------------------------------------------------- optimize

struct OptimizeOptions {
    std::filesystem::path scenario_path;
    std::filesystem::path out_dir;
};

/// Writes comparison.csv, trajectory_<mode>.csv and final_<mode>.wgnl. On
/// divergence the partial trajectory of the failing mode is written, later
/// modes are skipped, and the exit code is 2.
inline CommandResult cmd_optimize(const OptimizeOptions& opt)
{
    return guarded("optimize", [&] {
        const ScenarioConfig sc = parse_scenario_text(detail::read_text(opt.scenario_path));
        const BlockLayout layout = scenario_layout(sc);
        std::filesystem::create_directories(opt.out_dir);

        const LatentVector initial = scenario_initial_latent(sc, layout);
        std::vector<ModeOutcome> outcomes;
        std::optional<std::string> failure;
        Json modes = Json::array();
        std::ostringstream s;
        s << "optimize: N=" << sc.n << " B=" << sc.block_size << " bin=" << sc.target_bin
          << " iterations=" << sc.iterations << " seed=" << sc.seed;

        auto write_mode = [&](ComparisonMode mode, const Trajectory& traj) {
            std::ostringstream csv;
            write_trajectory_csv(csv, traj);
            const std::string name(to_string(mode));
            detail::write_text(opt.out_dir / ("trajectory_" + name + ".csv"), csv.str());
            write_latent(opt.out_dir / ("final_" + name + ".wgnl"), traj.final_latent);
        };

        for (ComparisonMode mode : sc.modes) {
            try {
                ModeOutcome o = run_comparison_mode(sc, layout, initial, mode);
                write_mode(mode, o.trajectory);
                s << "\n  " << to_string(mode) << ": value=" << format_number(o.final_value)
                  << " max|y|=" << format_number(o.max_compact_magnitude)
                  << " residual=" << format_number(o.max_residual) << " cos=" << format_number(o.cos_to_init)
                  << " wall=" << format_number(o.wall_seconds) << "s";
                modes.push_back(Json{{"mode", to_string(mode)}, {"final_value", o.final_value},
                                     {"max_compact_magnitude", o.max_compact_magnitude},
                                     {"max_residual", o.max_residual}, {"cos_to_init", o.cos_to_init},
                                     {"wall_seconds", o.wall_seconds}});
                outcomes.push_back(std::move(o));
            } catch (const DivergenceError& e) {
                write_mode(mode, e.partial());
                failure = std::string(to_string(mode)) + ": " + e.what();
                break;
            }
        }

        std::ostringstream table;
        write_comparison_csv(table, outcomes);
        detail::write_text(opt.out_dir / "comparison.csv", table.str());

        CommandResult r;
        r.json = Json{{"schema_version", kJsonSchemaVersion}, {"command", "optimize"}, {"modes", modes}};
        if (failure) {
            r.exit_code = exit_numerical;
            r.json["error"] = "numerical";
            r.json["message"] = *failure;
            s << "\n  diverged: " << *failure;
        }
        r.summary = s.str();
        return r;
    });
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
    std::vector<std::size_t> n_list{16384, 32768, 65536, 131072, 262144, 524288, 1048576};
    std::size_t block_size = BlockLayout::default_block_size;
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
};

struct BenchPoint {
    std::size_t n = 0;
    double median_seconds = 0.0;     // full project_to_feasible
    double fft_median_seconds = 0.0; // to_compact + from_compact alone
};

inline std::vector<BenchPoint> run_bench(const BenchOptions& opt)
{
    if (opt.repeats < 1) throw ValidationError("--repeats must be >= 1");
    if (opt.n_list.empty()) throw ValidationError("--n-list is empty");
    using clock = std::chrono::steady_clock;
    std::vector<BenchPoint> points;
    for (std::size_t n : opt.n_list) {
        const BlockLayout layout = BlockLayout::for_length(n, opt.block_size);
        const LatentVector x(detail::gaussian_vector(n, derive_seed(opt.seed, n)));
        (void)project_to_feasible(x, layout, opt.seed); // plan creation and page-in

        std::vector<double> total;
        std::vector<double> fft;
        for (std::size_t r = 0; r < opt.repeats; ++r) {
            auto t0 = clock::now();
            const ProjectionReport rep = project_to_feasible(x, layout, derive_seed(opt.seed, r));
            auto t1 = clock::now();
            const LatentVector back = from_compact(to_compact(x));
            auto t2 = clock::now();
            total.push_back(std::chrono::duration<double>(t1 - t0).count());
            fft.push_back(std::chrono::duration<double>(t2 - t1).count());
            if (back.size() != rep.output.size()) throw NumericalError("bench size mismatch");
        }
        points.push_back({n, detail::median(total), detail::median(fft)});
    }
    return points;
}

inline CommandResult cmd_bench(const BenchOptions& opt)
{
    return guarded("bench", [&] {
        const std::vector<BenchPoint> points = run_bench(opt);
        Json results = Json::array();
        Json ratios = Json::array();
        std::ostringstream s;
        s << "bench: B=" << opt.block_size << " repeats=" << opt.repeats;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const BenchPoint& p = points[i];
            const double fraction = p.fft_median_seconds / p.median_seconds;
            results.push_back(Json{{"n", p.n}, {"median_seconds", p.median_seconds},
                                   {"fft_median_seconds", p.fft_median_seconds}, {"fft_fraction", fraction}});
            s << "\n  N=" << p.n << " median=" << format_number(p.median_seconds * 1e3) << "ms fft="
              << format_number(p.fft_median_seconds * 1e3) << "ms";
            if (i > 0) {
                const double ratio = p.median_seconds / points[i - 1].median_seconds;
                ratios.push_back(Json{{"n", points[i - 1].n}, {"next_n", p.n}, {"ratio", ratio}});
                s << " ratio=" << format_number(ratio);
            }
        }
        CommandResult r;
        r.summary = s.str();
        r.json = Json{{"schema_version", kJsonSchemaVersion}, {"command", "bench"}, {"block_size", opt.block_size},
                      {"repeats", opt.repeats}, {"seed", opt.seed}, {"results", results}, {"ratios", ratios}};
        return r;
    });
}

} // namespace wgn::cli
