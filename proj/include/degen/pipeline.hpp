#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "degen/admissibility.hpp"
#include "degen/config.hpp"
#include "degen/energy.hpp"
#include "degen/error.hpp"
#include "degen/grid.hpp"
#include "degen/multibump.hpp"
#include "degen/nonlinearity.hpp"
#include "degen/spectral.hpp"
#include "degen/topology.hpp"
#include "degen/verify.hpp"
#include "degen/weights.hpp"

namespace degen {

enum class RunMode { check, solve };

struct SolutionRow {
    std::size_t index = 0; // 1-based, enumeration order
    std::vector<ComponentId> ids;
    std::vector<std::size_t> subset;
    std::size_t n_bumps = 0;
    double energy = 0;
    VerificationReport verification;
};

struct RunReport {
    bool completed = false;
    std::string failed_stage;
    std::string error_kind;
    std::string hypothesis = "none";
    std::string message;

    std::size_t resolution = 0;
    std::size_t dimension = 0;
    double spacing = 0;
    std::size_t interior_nodes = 0;
    std::optional<AdmissibilityReport> admissibility;
    std::optional<Decomposition> decomposition;
    std::vector<F2Row> f2;
    std::vector<BumpSolution> bumps;
    std::vector<SolutionRow> solutions;
    std::vector<std::pair<std::string, double>> timings; // seconds per stage, kept out of the JSON report

    bool admissible() const { return admissibility && admissibility->verdict == AdmissibilityVerdict::admissible; }

    bool f2_passed() const {
        if (f2.empty()) return false;
        for (const auto& row : f2)
            if (!row.pass) return false;
        return true;
    }

    /// Every verdict of the requested mode holds.
    bool passed(RunMode mode) const {
        if (!completed || !admissible() || !f2_passed()) return false;
        if (mode == RunMode::check) return true;
        if (!decomposition || decomposition->chi >= 63) return false;
        if (solutions.size() != (std::size_t{1} << decomposition->chi) - 1) return false;
        for (const auto& s : solutions)
            if (!s.verification.passed()) return false;
        return true;
    }
};

/// Everything a run produced, for export.
struct PipelineRun {
    RunConfig config;
    RunReport report;
    std::optional<Grid> grid;
    std::optional<WeightField> field;
    std::optional<ZeroSet> zero;
    BumpSet bumps;
    std::vector<MultiBumpSolution> solutions;
};

namespace detail {

class StageClock {
public:
    explicit StageClock(RunReport& report) : report_(report) {}

    template <class Fn>
    auto run(const char* stage, Fn&& fn) {
        report_.failed_stage = stage;
        const auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(stage, start);
        } else {
            auto result = fn();
            record(stage, start);
            return result;
        }
    }

private:
    void record(const char* stage, std::chrono::steady_clock::time_point start) {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        report_.timings.emplace_back(stage, dt.count());
    }

    RunReport& report_;
};

} // namespace detail

/// nonlinearity -> grid -> weight -> zero set -> admissibility -> decomposition ->
/// eigenvalues and (f2) -> minimization -> enumeration -> verification. A failing stage
/// ends the run; the report keeps what was computed before it.
inline PipelineRun run_pipeline(const RunConfig& config, RunMode mode = RunMode::solve) {
    PipelineRun run;
    run.config = config;
    RunReport& rep = run.report;
    rep.resolution = config.resolution;
    rep.dimension = config.domain.dimension;
    detail::StageClock clock(rep);
    try {
        config.validate();
        const TruncatedNonlinearity trunc =
            clock.run("nonlinearity", [&] { return truncate_nonlinearity(config.nonlinearity); });

        run.grid = clock.run("grid", [&] { return build_grid(config.domain, config.resolution); });
        const Grid& grid = *run.grid;
        rep.spacing = grid.spacing();
        rep.interior_nodes = grid.count(NodeClass::interior);

        run.field = clock.run("weight", [&] {
            return evaluate_weight(config.weight, grid, config.admissibility.zero_threshold);
        });
        run.zero = clock.run("zero-set", [&] { return detect_zero_set(*run.field, grid); });

        rep.admissibility = clock.run("admissibility", [&] {
            return assess_admissibility(config.weight, grid, *run.field, *run.zero, config.admissibility);
        });
        switch (rep.admissibility->verdict) {
        case AdmissibilityVerdict::admissible: break;
        case AdmissibilityVerdict::zero_set_touches_boundary:
            throw hypothesis_error(Hypothesis::a1, "the zero set of the weight reaches the domain boundary");
        case AdmissibilityVerdict::violates_a2:
            throw hypothesis_error(Hypothesis::a2, "the A2 estimate is not stable under refinement");
        case AdmissibilityVerdict::violates_lt:
            throw hypothesis_error(Hypothesis::a2, "no t > N/2 with a stable L^t norm of 1/a");
        }

        rep.decomposition = clock.run("decomposition", [&] { return decompose_components(grid, *run.zero); });
        const Decomposition& dec = *rep.decomposition;

        std::vector<EigenPair> eigen = clock.run("eigenvalues", [&] {
            std::vector<EigenPair> out;
            for (const auto& c : dec.components) {
                out.push_back(dirichlet_lambda1(c, grid, config.eigen));
                rep.f2.push_back(check_hypothesis_f2(c, *run.field, config.nonlinearity.gamma, out.back()));
            }
            return out;
        });
        for (const auto& row : rep.f2)
            if (!row.pass)
                throw hypothesis_error(Hypothesis::f2, "a_M >= gamma / lambda_1 on component " + row.id.str());

        if (mode == RunMode::check) {
            rep.completed = true;
            rep.failed_stage.clear();
            return run;
        }

        clock.run("minimization", [&] {
            auto bumps = std::make_shared<std::vector<BumpSolution>>();
            for (const auto& c : dec.components) {
                const DiscreteEnergy energy = assemble_energy(c, *run.field, trunc, grid);
                bumps->push_back(minimize_energy(energy, eigen[c.index], rep.f2[c.index], config.solver));
            }
            rep.bumps = *bumps;
            run.bumps = std::move(bumps);
        });

        run.solutions = clock.run("enumeration", [&] { return enumerate_all(run.bumps, config.max_chi); });

        clock.run("verification", [&] {
            const Verifier verifier(grid, *run.field, *run.zero, config.nonlinearity, config.verification);
            for (std::size_t k = 0; k < run.solutions.size(); ++k) {
                const auto& s = run.solutions[k];
                SolutionRow row;
                row.index = k + 1;
                row.ids = s.ids();
                row.subset = s.subset();
                row.n_bumps = s.n_bumps();
                row.energy = s.energy();
                row.verification = verifier.check(s.dense(grid));
                rep.solutions.push_back(std::move(row));
            }
        });
        rep.completed = true;
        rep.failed_stage.clear();
    } catch (const Error& e) {
        rep.error_kind = std::string(to_string(e.kind()));
        rep.hypothesis = std::string(to_string(e.hypothesis()));
        rep.message = e.what();
    }
    return run;
}

} // namespace degen
