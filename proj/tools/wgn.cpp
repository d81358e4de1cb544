// wgn: projection, verification, sampling studies, optimization runs and
// benchmarks for the white-Gaussian-noise feasible set.

#include "wgn/cli/commands.hpp"

#include <CLI11.hpp>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <iostream>

namespace {

// Latents are large and short-lived; keeping them on the heap instead of
// fresh mmap regions avoids a page-fault storm per projection.
void tune_allocator()
{
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

int emit(const wgn::cli::CommandResult& r, bool json)
{
    if (!r.summary.empty()) std::cerr << r.summary << '\n';
    if (json) std::cout << r.json.dump(2) << '\n';
    return r.exit_code;
}

} // namespace

int main(int argc, char** argv)
{
    tune_allocator();
    namespace cli = wgn::cli;

    CLI::App app{"Projection onto the white-Gaussian-noise feasible set"};
    app.require_subcommand(1);
    bool json = false;

    cli::ProjectOptions project;
    std::string report_path;
    auto* p = app.add_subcommand("project", "Project a WGNL latent onto the feasible set");
    p->add_option("in", project.in_path, "Input WGNL file")->required();
    p->add_option("out", project.out_path, "Output WGNL file")->required();
    p->add_option("--block-size", project.block_size, "Block size B")->capture_default_str();
    p->add_option("--seed", project.seed, "Seed for degenerate-case perturbations")->capture_default_str();
    p->add_option("--report-path", report_path, "Write the projection report JSON here");
    p->add_flag("--json", json, "Print machine-readable output on stdout");

    cli::VerifyOptions verify;
    auto* v = app.add_subcommand("verify", "Run an invariant suite");
    v->add_option("--suite", verify.suite, "Suite to run")
        ->required()
        ->check(CLI::IsMember({"roundtrip", "gaussian", "oracle", "wk", "bounds"}));
    v->add_option("--seed", verify.seed, "Seed")->capture_default_str();
    v->add_flag("--json", json, "Print machine-readable output on stdout");

    cli::SampleStudyOptions study;
    std::string study_json;
    auto* s = app.add_subcommand("sample-study", "Cosine similarity between Gaussian samples and their projections");
    s->add_option("--samples", study.samples, "Number of samples")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--n", study.n, "Latent length N")->capture_default_str();
    s->add_option("--block-size", study.block_size, "Block size B")->capture_default_str();
    s->add_option("--seed", study.seed, "Seed")->capture_default_str();
    s->add_option("--out-csv", study.out_csv, "Per-sample cosine CSV")->required();
    s->add_option("--out-json", study_json, "Summary JSON (default: CSV path with .json)");
    s->add_option("--threads", study.threads, "Worker threads, 0 = all cores")->capture_default_str();
    s->add_flag("--json", json, "Print machine-readable output on stdout");

    cli::OptimizeOptions optimize;
    auto* o = app.add_subcommand("optimize", "Run the spike-reward comparison scenario");
    o->add_option("--scenario", optimize.scenario_path, "Scenario JSON")->required();
    o->add_option("--out-dir", optimize.out_dir, "Output directory")->required();
    o->add_flag("--json", json, "Print machine-readable output on stdout");

    cli::BenchOptions bench;
    auto* b = app.add_subcommand("bench", "Time projection across latent lengths");
    b->add_option("--n-list", bench.n_list, "Latent lengths")->delimiter(',')->capture_default_str();
    b->add_option("--block-size", bench.block_size, "Block size B")->capture_default_str();
    b->add_option("--repeats", bench.repeats, "Timed repeats per length")->capture_default_str();
    b->add_option("--seed", bench.seed, "Seed")->capture_default_str();
    b->add_flag("--json", json, "Print machine-readable output on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::exit_validation;
    }

    if (!report_path.empty()) project.report_path = report_path;
    if (!study_json.empty()) study.out_json = study_json;

    if (*p) return emit(cli::cmd_project(project), json);
    if (*v) return emit(cli::cmd_verify(verify), json);
    if (*s) return emit(cli::cmd_sample_study(study), json);
    if (*o) return emit(cli::cmd_optimize(optimize), json);
    return emit(cli::cmd_bench(bench), json);
}
