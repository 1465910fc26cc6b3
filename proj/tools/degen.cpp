// degen: check, solve and verify degenerate semilinear Dirichlet problems.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "degen.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    std::size_t max_chi = 0;
    std::size_t resolution = 0;
    std::string field;
    std::string report;
};

degen::RunConfig load(const Options& opt) {
    if (opt.config.empty()) throw degen::Error(degen::ErrorKind::config, "--config is required");
    degen::RunConfig cfg = degen::load_config(opt.config);
    if (opt.resolution) cfg = degen::with_resolution(cfg, opt.resolution);
    if (opt.max_chi) cfg.max_chi = opt.max_chi;
    if (!opt.out.empty()) cfg.output.directory = opt.out;
    return cfg;
}

int run(const Options& opt, degen::RunMode mode) {
    const degen::RunConfig cfg = load(opt);
    const degen::PipelineRun result = degen::run_pipeline(cfg, mode);
    degen::write_run(result, mode, cfg.output.directory);
    const auto rep = degen::report_json(result.config, result.report, mode);
    std::cout << degen::render_report(rep);
    for (const auto& [stage, seconds] : result.report.timings)
        std::fprintf(stderr, "%-14s %.3f s\n", stage.c_str(), seconds);
    return result.report.passed(mode) ? 0 : 1;
}

int verify(const Options& opt) {
    const degen::RunConfig cfg = load(opt);
    const degen::Grid grid = degen::build_grid(cfg.domain, cfg.resolution);
    const degen::WeightField field = degen::evaluate_weight(cfg.weight, grid, cfg.admissibility.zero_threshold);
    const degen::ZeroSet zero = degen::detect_zero_set(field, grid);
    const auto u = degen::read_field_csv(opt.field, grid);
    const degen::Verifier verifier(grid, field, zero, cfg.nonlinearity, cfg.verification);
    const degen::VerificationReport v = verifier.check(u);
    std::cout << degen::detail::verification_json(v).dump(2) << "\n";
    return v.passed() ? 0 : 1;
}

int report(const Options& opt) {
    std::filesystem::path path = opt.report;
    if (path.empty()) path = std::filesystem::path(opt.out.empty() ? "out" : opt.out) / "report.json";
    const auto rep = degen::json::parse(degen::detail::read_text(path));
    std::cout << degen::render_report(rep);
    return rep.at("status").value("passed", false) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple bump solutions of degenerate semilinear elliptic problems"};
    app.require_subcommand(1);
    Options opt;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "run configuration (JSON)");
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--max-chi", opt.max_chi, "largest component count to enumerate");
        sub->add_option("--resolution", opt.resolution, "nodes per axis, overrides the config");
    };
    CLI::App* check = app.add_subcommand("check", "evaluate the hypotheses only");
    common(check);
    CLI::App* solve = app.add_subcommand("solve", "run the full pipeline");
    common(solve);
    CLI::App* ver = app.add_subcommand("verify", "re-verify an exported solution field");
    common(ver);
    ver->add_option("field", opt.field, "CSV field file")->required();
    CLI::App* rep = app.add_subcommand("report", "print a stored run report");
    common(rep);
    rep->add_option("report", opt.report, "report.json (default: <out>/report.json)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*check) return run(opt, degen::RunMode::check);
        if (*solve) return run(opt, degen::RunMode::solve);
        if (*ver) return verify(opt);
        return report(opt);
    } catch (const degen::Error& e) {
        std::cerr << "error (" << degen::to_string(e.kind()) << "): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
