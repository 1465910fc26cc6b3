#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "degen/error.hpp"
#include "degen/grid.hpp"
#include "degen/pipeline.hpp"

namespace degen {

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline json ids_json(const std::vector<ComponentId>& ids) {
    json out = json::array();
    for (const auto& id : ids) out.push_back(id.str());
    return out;
}

inline json verification_json(const VerificationReport& v) {
    return json{{"residual_norm", v.residual_norm},
                {"residual_tolerance", v.residual_tolerance},
                {"min_u", v.min_u},
                {"max_u", v.max_u},
                {"bounds_tolerance", v.bounds_tolerance},
                {"zero_trace_max", v.zero_trace_max},
                {"w11_seminorm", v.w11_seminorm},
                {"holder_bound", v.holder_bound},
                {"verdicts",
                 {{"residual", v.residual_ok}, {"bounds", v.bounds_ok}, {"zero_trace", v.trace_ok},
                  {"holder", v.holder_ok()}, {"all", v.passed()}}}};
}

} // namespace detail

/// Header x1..xN,u; one row per lattice node in scan order.
inline std::string field_csv(const Grid& grid, std::span<const double> u) {
    const std::size_t dim = grid.dimension();
    std::string out;
    for (std::size_t k = 0; k < dim; ++k) out += "x" + std::to_string(k + 1) + ",";
    out += "u\n";
    std::vector<double> x(dim);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        grid.coordinates(node, x);
        for (double v : x) out += detail::format_double(v) + ",";
        out += detail::format_double(u[node]) + "\n";
    }
    return out;
}

inline void write_field_csv(const std::filesystem::path& path, const Grid& grid, std::span<const double> u) {
    detail::write_text(path, field_csv(grid, u));
}

/// Reads a field written by write_field_csv; coordinates must match `grid`.
inline std::vector<double> read_field_csv(const std::filesystem::path& path, const Grid& grid) {
    std::istringstream in(detail::read_text(path));
    const std::size_t dim = grid.dimension();
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::parse, "empty field file " + path.string());
    std::string header;
    for (std::size_t k = 0; k < dim; ++k) header += "x" + std::to_string(k + 1) + ",";
    header += "u";
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw Error(ErrorKind::parse, "field file header does not match dimension " + std::to_string(dim));

    std::vector<double> u(grid.node_count());
    std::vector<double> x(dim);
    const double tol = 1e-9 * std::max(1.0, grid.spacing() * static_cast<double>(grid.nodes_per_axis()));
    std::size_t node = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (node >= grid.node_count()) throw Error(ErrorKind::parse, "field file has more rows than the grid");
        grid.coordinates(node, x);
        std::istringstream row(line);
        std::string cell;
        for (std::size_t k = 0; k <= dim; ++k) {
            if (!std::getline(row, cell, ','))
                throw Error(ErrorKind::parse, "short row " + std::to_string(node + 2) + " in field file");
            double v = 0;
            try {
                std::size_t used = 0;
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw Error(ErrorKind::parse, "bad number '" + cell + "' in field file");
            }
            if (k < dim) {
                if (std::fabs(v - x[k]) > tol)
                    throw Error(ErrorKind::parse, "field file coordinates do not match the configured grid");
            } else {
                u[node] = v;
            }
        }
        ++node;
    }
    if (node != grid.node_count()) throw Error(ErrorKind::parse, "field file has fewer rows than the grid");
    return u;
}

/// Legacy VTK rectilinear grid with the field as point data.
inline void write_field_vtk(const std::filesystem::path& path, const Grid& grid, std::span<const double> u) {
    const std::size_t dim = grid.dimension();
    if (dim > 3) throw Error(ErrorKind::io, "VTK export supports at most three dimensions");
    std::string out = "# vtk DataFile Version 3.0\nfield\nASCII\nDATASET RECTILINEAR_GRID\n";
    std::size_t dims[3] = {1, 1, 1};
    // VTK runs x fastest; the lattice runs its last axis fastest, so axes are reversed.
    for (std::size_t k = 0; k < dim; ++k) dims[k] = grid.extents()[dim - 1 - k];
    out += "DIMENSIONS " + std::to_string(dims[0]) + " " + std::to_string(dims[1]) + " " + std::to_string(dims[2]) + "\n";
    const char* names[3] = {"X_COORDINATES", "Y_COORDINATES", "Z_COORDINATES"};
    for (std::size_t k = 0; k < 3; ++k) {
        out += std::string(names[k]) + " " + std::to_string(dims[k]) + " double\n";
        if (k < dim) {
            const std::size_t axis = dim - 1 - k;
            for (std::size_t i = 0; i < grid.extents()[axis]; ++i)
                out += detail::format_double(grid.origin()[axis] + grid.spacing() * static_cast<double>(i)) + " ";
        } else {
            out += "0";
        }
        out += "\n";
    }
    out += "POINT_DATA " + std::to_string(grid.node_count()) + "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
    for (std::size_t node = 0; node < grid.node_count(); ++node) out += detail::format_double(u[node]) + "\n";
    detail::write_text(path, out);
}

inline json admissibility_json(const AdmissibilityReport& a) {
    json lt = json::array();
    for (const auto& row : a.lt_norms)
        lt.push_back({{"t", row.t},
                      {"coarse", row.coarse},
                      {"fine", row.fine},
                      {"growth", row.growth},
                      {"stable", row.stable},
                      {"divergent", row.divergent}});
    return json{{"verdict", std::string(to_string(a.verdict))},
                {"coarse_resolution", a.coarse_resolution},
                {"fine_resolution", a.fine_resolution},
                {"a2_coarse", a.a2_coarse},
                {"a2_estimate", a.a2_estimate},
                {"a2_growth", a.a2_growth},
                {"a2_stable", a.a2_stable},
                {"a2_divergent", a.a2_divergent},
                {"lt_norms", lt},
                {"best_t", a.best_t},
                {"n_over_2", a.n_over_2},
                {"zero_nodes", a.zero_nodes},
                {"zero_set_touches_boundary", a.zero_set_touches_boundary},
                {"divergence_flag", a.divergence_flag()}};
}

/// The run report; deterministic for a given configuration (no timings).
inline json report_json(const RunConfig& config, const RunReport& r, RunMode mode) {
    json out;
    out["mode"] = mode == RunMode::check ? "check" : "solve";
    out["config"] = config.source;
    out["status"] = {{"completed", r.completed},
                     {"passed", r.passed(mode)},
                     {"failed_stage", r.failed_stage},
                     {"error_kind", r.error_kind},
                     {"hypothesis", r.hypothesis},
                     {"message", r.message}};
    out["grid"] = {{"resolution", r.resolution},
                   {"dimension", r.dimension},
                   {"spacing", r.spacing},
                   {"interior_nodes", r.interior_nodes}};
    out["weight"] = config.weight.reference();
    out["nonlinearity"] = {{"reference", config.nonlinearity.reference()},
                           {"gamma", config.nonlinearity.gamma},
                           {"s_star", config.nonlinearity.s_star},
                           {"beta_star", config.nonlinearity.beta_star}};
    out["admissibility"] = r.admissibility ? admissibility_json(*r.admissibility) : json(nullptr);
    if (r.decomposition) {
        json comps = json::array();
        for (const auto& c : r.decomposition->components)
            comps.push_back({{"id", c.id.str()},
                             {"index", c.index},
                             {"nodes", c.nodes.size()},
                             {"shell_nodes", c.shell.size()},
                             {"boundary_manifolds", c.boundary_manifold_count}});
        json j = json::object();
        for (const auto& [i, count] : r.decomposition->j_counts) j[std::to_string(i)] = count;
        out["decomposition"] = {{"chi", r.decomposition->chi}, {"j_counts", j}, {"components", comps}};
    } else {
        out["decomposition"] = nullptr;
    }
    json f2 = json::array();
    for (const auto& row : r.f2)
        f2.push_back({{"id", row.id.str()},
                      {"a_max", row.a_max},
                      {"lambda1", row.lambda1},
                      {"gamma", row.gamma},
                      {"margin", row.margin},
                      {"pass", row.pass}});
    out["f2"] = f2;
    json bumps = json::array();
    for (const auto& b : r.bumps)
        bumps.push_back({{"id", b.id.str()},
                         {"energy", b.energy},
                         {"gradient_norm", b.gradient_norm},
                         {"gradient_tolerance", b.gradient_tolerance},
                         {"seed_amplitude", b.seed_amplitude},
                         {"iterations", b.iterations},
                         {"min_u", b.min_u},
                         {"max_u", b.max_u}});
    out["bumps"] = bumps;
    json sols = json::array();
    std::map<std::string, std::size_t> histogram;
    for (const auto& s : r.solutions) {
        sols.push_back({{"index", s.index},
                        {"subset", detail::ids_json(s.ids)},
                        {"n_bumps", s.n_bumps},
                        {"energy", s.energy},
                        {"verification", detail::verification_json(s.verification)}});
        ++histogram[std::to_string(s.n_bumps)];
    }
    out["solutions"] = sols;
    out["n_bump_histogram"] = histogram;
    return out;
}

inline json timings_json(const RunReport& r) {
    json out = json::array();
    for (const auto& [stage, seconds] : r.timings) out.push_back({{"stage", stage}, {"seconds", seconds}});
    return out;
}

inline std::string solution_file_stem(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "solution_%04zu", index);
    return buf;
}

/// Writes report.json, timings.json and the requested solution fields under `dir`.
inline void write_run(const PipelineRun& run, RunMode mode, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    detail::write_text(dir / "report.json", report_json(run.config, run.report, mode).dump(2) + "\n");
    detail::write_text(dir / "timings.json", timings_json(run.report).dump(2) + "\n");
    if (!run.grid || run.config.output.fields == FieldExport::none) return;
    for (std::size_t k = 0; k < run.solutions.size(); ++k) {
        const auto& s = run.solutions[k];
        if (run.config.output.fields == FieldExport::bumps && s.n_bumps() != 1) continue;
        const std::vector<double> u = s.dense(*run.grid);
        const std::string stem = solution_file_stem(k + 1);
        write_field_csv(dir / "solutions" / (stem + ".csv"), *run.grid, u);
        if (run.config.output.vtk) write_field_vtk(dir / "solutions" / (stem + ".vtk"), *run.grid, u);
    }
}

/// Plain-text summary of a stored report.
inline std::string render_report(const json& rep) {
    std::ostringstream os;
    const json& st = rep.at("status");
    os << "mode: " << rep.value("mode", std::string("?")) << "\n";
    os << "passed: " << (st.value("passed", false) ? "yes" : "no") << "\n";
    if (!st.value("completed", false))
        os << "stopped at " << st.value("failed_stage", std::string()) << ": " << st.value("message", std::string())
           << " (hypothesis " << st.value("hypothesis", std::string("none")) << ")\n";
    if (rep.contains("grid"))
        os << "grid: n = " << rep["grid"].value("resolution", 0) << ", h = " << rep["grid"].value("spacing", 0.0)
           << "\n";
    if (rep.contains("admissibility") && !rep["admissibility"].is_null()) {
        const json& a = rep["admissibility"];
        os << "admissibility: " << a.value("verdict", std::string()) << " (A2 " << a.value("a2_estimate", 0.0)
           << ", growth " << a.value("a2_growth", 0.0) << ", best t " << a.value("best_t", 0.0) << ")\n";
    }
    if (rep.contains("decomposition") && !rep["decomposition"].is_null()) {
        const json& d = rep["decomposition"];
        os << "chi = " << d.value("chi", 0) << ", j =";
        for (const auto& [i, count] : d["j_counts"].items()) os << " j" << i << "=" << count.get<std::size_t>();
        os << "\n";
    }
    for (const auto& row : rep.value("f2", json::array()))
        os << "  " << row.value("id", std::string()) << ": lambda1 = " << row.value("lambda1", 0.0)
           << ", a_M = " << row.value("a_max", 0.0) << ", margin = " << row.value("margin", 0.0)
           << (row.value("pass", false) ? "" : "  FAILS (f2)") << "\n";
    const json sols = rep.value("solutions", json::array());
    if (!sols.empty()) {
        os << sols.size() << " solutions\n";
        for (const auto& s : sols) {
            os << "  #" << s.value("index", 0) << " {";
            bool first = true;
            for (const auto& id : s["subset"]) {
                os << (first ? "" : ", ") << id.get<std::string>();
                first = false;
            }
            const json& v = s["verification"];
            os << "} J = " << s.value("energy", 0.0) << ", residual = " << v.value("residual_norm", 0.0)
               << (v["verdicts"].value("all", false) ? "" : "  FAILED") << "\n";
        }
    }
    return os.str();
}

} // namespace degen
