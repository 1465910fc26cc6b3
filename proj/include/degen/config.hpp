#pragma once

#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "degen/admissibility.hpp"
#include "degen/energy.hpp"
#include "degen/error.hpp"
#include "degen/grid.hpp"
#include "degen/multibump.hpp"
#include "degen/nonlinearity.hpp"
#include "degen/spectral.hpp"
#include "degen/verify.hpp"
#include "degen/weights.hpp"

namespace degen {

using json = nlohmann::json;

enum class FieldExport { all, bumps, none };

struct OutputOptions {
    std::string directory = "out";
    FieldExport fields = FieldExport::all;
    bool vtk = false;
};

struct RunConfig {
    json source; // the parsed document, with command-line overrides applied
    DomainSpec domain;
    WeightSpec weight;
    NonlinearitySpec nonlinearity;
    std::size_t resolution = 0;
    AdmissibilityOptions admissibility;
    EigenOptions eigen;
    SolverOptions solver;
    VerificationTolerances verification;
    OutputOptions output;
    std::size_t max_chi = default_max_chi;

    static constexpr std::size_t min_resolution = 8;

    void validate() const {
        domain.validate();
        weight.validate(domain.dimension);
        if (resolution < min_resolution)
            throw Error(ErrorKind::config, "resolution must be at least " + std::to_string(min_resolution));
        auto positive = [](double v, const char* name) {
            if (!(v > 0)) throw Error(ErrorKind::config, std::string("tolerance ") + name + " must be positive");
        };
        positive(admissibility.zero_threshold, "zero_threshold");
        if (!(admissibility.zero_threshold < 1))
            throw Error(ErrorKind::config, "tolerance zero_threshold must be below 1");
        positive(admissibility.stability_tolerance, "stability");
        positive(admissibility.divergence_growth, "divergence_growth");
        positive(eigen.rel_tol, "eigen");
        positive(solver.relative_gradient_tolerance, "gradient");
        positive(verification.relative_residual, "residual");
        positive(verification.bounds, "bounds");
        if (solver.max_iterations == 0) throw Error(ErrorKind::config, "max_iterations must be positive");
    }
};

namespace detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw Error(ErrorKind::config, where + " must be an object");
    std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& item : obj.items())
        if (!names.count(item.key())) throw Error(ErrorKind::config, "unknown key '" + item.key() + "' in " + where);
}

template <class T>
T required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw Error(ErrorKind::config, "missing key '" + std::string(key) + "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::config, "bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

template <class T>
T optional(const json& obj, const char* key, const std::string& where, T fallback) {
    if (!obj.contains(key)) return fallback;
    return required<T>(obj, key, where);
}

inline DomainSpec parse_domain(const json& j) {
    const auto kind = required<std::string>(j, "kind", "domain");
    if (kind == "box") {
        check_keys(j, "domain", {"kind", "lower", "upper"});
        return DomainSpec::box(required<std::vector<double>>(j, "lower", "domain"),
                               required<std::vector<double>>(j, "upper", "domain"));
    }
    if (kind == "ball") {
        check_keys(j, "domain", {"kind", "center", "radius"});
        return DomainSpec::ball(required<std::vector<double>>(j, "center", "domain"),
                                required<double>(j, "radius", "domain"));
    }
    if (kind == "annulus") {
        check_keys(j, "domain", {"kind", "center", "inner_radius", "outer_radius"});
        return DomainSpec::annulus(required<std::vector<double>>(j, "center", "domain"),
                                   required<double>(j, "inner_radius", "domain"),
                                   required<double>(j, "outer_radius", "domain"));
    }
    if (kind == "implicit") {
        check_keys(j, "domain", {"kind", "level", "lower", "upper"});
        return DomainSpec::implicit(required<std::string>(j, "level", "domain"),
                                    required<std::vector<double>>(j, "lower", "domain"),
                                    required<std::vector<double>>(j, "upper", "domain"));
    }
    throw Error(ErrorKind::config, "unknown domain kind '" + kind + "'");
}

inline PowerFactor parse_factor(const json& j) {
    const std::string where = "weight factor";
    const auto shape = required<std::string>(j, "shape", where);
    PowerFactor f;
    if (shape == "sphere") {
        check_keys(j, where, {"shape", "center", "radius", "exponent"});
        f.shape = PowerFactor::Shape::sphere;
        f.point = required<std::vector<double>>(j, "center", where);
        f.radius = required<double>(j, "radius", where);
    } else if (shape == "plane") {
        check_keys(j, where, {"shape", "point", "normal", "exponent"});
        f.shape = PowerFactor::Shape::plane;
        f.point = required<std::vector<double>>(j, "point", where);
        f.normal = required<std::vector<double>>(j, "normal", where);
        double n2 = 0;
        for (double v : f.normal) n2 += v * v;
        if (!(n2 > 0)) throw Error(ErrorKind::config, "plane normal must be nonzero");
        for (double& v : f.normal) v /= std::sqrt(n2);
    } else {
        throw Error(ErrorKind::config, "unknown factor shape '" + shape + "'");
    }
    f.exponent = required<double>(j, "exponent", where);
    return f;
}

inline WeightSpec parse_weight(const json& j, std::size_t dimension) {
    const auto kind = required<std::string>(j, "kind", "weight");
    if (kind == "constant") {
        check_keys(j, "weight", {"kind", "value"});
        return WeightSpec::constant(required<double>(j, "value", "weight"));
    }
    if (kind == "radial-piecewise") {
        check_keys(j, "weight", {"kind", "center", "pieces", "scale"});
        std::vector<RadialPiece> pieces;
        const json& list = j.contains("pieces") ? j.at("pieces") : json();
        if (!list.is_array()) throw Error(ErrorKind::config, "weight pieces must be a list");
        for (const auto& p : list) {
            check_keys(p, "weight piece", {"r_min", "r_max", "coefficients", "exponent"});
            pieces.push_back(RadialPiece{required<double>(p, "r_min", "weight piece"),
                                         required<double>(p, "r_max", "weight piece"),
                                         required<std::vector<double>>(p, "coefficients", "weight piece"),
                                         required<double>(p, "exponent", "weight piece")});
        }
        return WeightSpec::radial(optional<std::vector<double>>(j, "center", "weight", std::vector<double>(dimension, 0.0)),
                                  std::move(pieces), optional<double>(j, "scale", "weight", 1.0));
    }
    if (kind == "product-of-powers") {
        check_keys(j, "weight", {"kind", "factors", "scale"});
        std::vector<PowerFactor> factors;
        const json& list = j.contains("factors") ? j.at("factors") : json();
        if (!list.is_array()) throw Error(ErrorKind::config, "weight factors must be a list");
        for (const auto& f : list) factors.push_back(parse_factor(f));
        return WeightSpec::product(std::move(factors), optional<double>(j, "scale", "weight", 1.0));
    }
    if (kind == "custom-expression") {
        check_keys(j, "weight", {"kind", "expression", "scale"});
        return WeightSpec::custom_expression_of(required<std::string>(j, "expression", "weight"), dimension,
                                                optional<double>(j, "scale", "weight", 1.0));
    }
    throw Error(ErrorKind::config, "unknown weight kind '" + kind + "'");
}

inline NonlinearitySpec parse_nonlinearity(const json& j) {
    const std::string where = "nonlinearity";
    const auto kind = optional<std::string>(j, "kind", where, "logistic-default");
    const double gamma = required<double>(j, "gamma", where);
    const double s_star = optional<double>(j, "s_star", where, 1.0);
    const double beta_star = optional<double>(j, "beta_star", where, 0.0);
    if (kind == "logistic-default") {
        check_keys(j, where, {"kind", "gamma", "s_star", "beta_star"});
        return NonlinearitySpec::logistic(gamma, s_star, beta_star);
    }
    if (kind == "custom") {
        check_keys(j, where, {"kind", "gamma", "s_star", "beta_star", "expression"});
        return NonlinearitySpec::custom_expression(required<std::string>(j, "expression", where), gamma, s_star,
                                                   beta_star);
    }
    throw Error(ErrorKind::config, "unknown nonlinearity kind '" + kind + "'");
}

} // namespace detail

inline RunConfig parse_config(const json& doc) {
    using namespace detail;
    check_keys(doc, "config", {"domain", "weight", "nonlinearity", "resolution", "tolerances", "output", "enumeration"});
    RunConfig cfg;
    cfg.source = doc;
    if (!doc.contains("domain") || !doc.contains("weight") || !doc.contains("nonlinearity") ||
        !doc.contains("resolution"))
        throw Error(ErrorKind::config, "config needs domain, weight, nonlinearity and resolution");
    cfg.domain = parse_domain(doc.at("domain"));
    cfg.weight = parse_weight(doc.at("weight"), cfg.domain.dimension);
    cfg.nonlinearity = parse_nonlinearity(doc.at("nonlinearity"));
    const long long n = required<long long>(doc, "resolution", "config");
    if (n < 0) throw Error(ErrorKind::config, "resolution must be positive");
    cfg.resolution = static_cast<std::size_t>(n);

    if (doc.contains("tolerances")) {
        const json& t = doc.at("tolerances");
        const std::string where = "tolerances";
        check_keys(t, where, {"zero_threshold", "stability", "divergence_growth", "eigen", "gradient",
                              "max_iterations", "residual", "bounds"});
        cfg.admissibility.zero_threshold = optional<double>(t, "zero_threshold", where, cfg.admissibility.zero_threshold);
        cfg.admissibility.stability_tolerance =
            optional<double>(t, "stability", where, cfg.admissibility.stability_tolerance);
        cfg.admissibility.divergence_growth =
            optional<double>(t, "divergence_growth", where, cfg.admissibility.divergence_growth);
        cfg.eigen.rel_tol = optional<double>(t, "eigen", where, cfg.eigen.rel_tol);
        cfg.solver.relative_gradient_tolerance =
            optional<double>(t, "gradient", where, cfg.solver.relative_gradient_tolerance);
        cfg.solver.max_iterations = optional<std::size_t>(t, "max_iterations", where, cfg.solver.max_iterations);
        cfg.verification.relative_residual =
            optional<double>(t, "residual", where, cfg.verification.relative_residual);
        cfg.verification.bounds = optional<double>(t, "bounds", where, cfg.verification.bounds);
    }
    if (doc.contains("output")) {
        const json& o = doc.at("output");
        check_keys(o, "output", {"directory", "fields", "vtk"});
        cfg.output.directory = optional<std::string>(o, "directory", "output", cfg.output.directory);
        const auto fields = optional<std::string>(o, "fields", "output", "all");
        if (fields == "all")
            cfg.output.fields = FieldExport::all;
        else if (fields == "bumps")
            cfg.output.fields = FieldExport::bumps;
        else if (fields == "none")
            cfg.output.fields = FieldExport::none;
        else
            throw Error(ErrorKind::config, "output fields must be all, bumps or none");
        cfg.output.vtk = optional<bool>(o, "vtk", "output", false);
    }
    if (doc.contains("enumeration")) {
        const json& e = doc.at("enumeration");
        check_keys(e, "enumeration", {"max_chi"});
        cfg.max_chi = optional<std::size_t>(e, "max_chi", "enumeration", cfg.max_chi);
    }
    cfg.validate();
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

/// Copy of `cfg` with a different resolution, re-validated.
inline RunConfig with_resolution(RunConfig cfg, std::size_t n) {
    cfg.resolution = n;
    cfg.source["resolution"] = n;
    cfg.validate();
    return cfg;
}

} // namespace degen
