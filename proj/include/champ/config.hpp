#pragma once

// Experiment configuration: a single JSON document per run.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace champ {

enum class suite_id { group, derivative, geometry, spherical, transforms, decay_J, decay_I, split_I, hecke, phase };

inline const std::vector<std::pair<suite_id, std::string>>& suite_names()
{
    static const std::vector<std::pair<suite_id, std::string>> names{
        {suite_id::group, "group"},           {suite_id::derivative, "derivative"}, {suite_id::geometry, "geometry"},
        {suite_id::spherical, "spherical"},   {suite_id::transforms, "transforms"}, {suite_id::decay_J, "decay_J"},
        {suite_id::decay_I, "decay_I"},       {suite_id::split_I, "split_I"},       {suite_id::hecke, "hecke"},
        {suite_id::phase, "phase"}};
    return names;
}

inline std::string suite_name(suite_id s)
{
    for (auto& [id, n] : suite_names())
        if (id == s)
            return n;
    return "?";
}

inline suite_id parse_suite(const std::string& s)
{
    for (auto& [id, n] : suite_names())
        if (n == s)
            return id;
    throw error(errc::config_invalid, "suite: unknown suite '" + s + "'");
}

struct quadrature_orders {
    int kquad_max = 512;   // K-quadrature order cap for spherical functions
    int j_nodes = 16;      // Gauss points per panel for J
    int t_nodes = 16;      // Gauss points per t panel in the pairing integrals
    int t_panels = 8;
    int disk_nodes = 32;   // (z, tau) autocorrelation grid
    int cert_grid = 16;    // phase certificate box grid per axis
};

/// Acceptance thresholds per suite; a config may override any of them.
inline const std::map<std::string, double>& default_thresholds(suite_id s)
{
    static const std::map<suite_id, std::map<std::string, double>> t{
        {suite_id::group, {{"roundtrip_tol", 1e-9}, {"action_law_tol", 1e-9}, {"splitting_tol", 1e-9},
                           {"explicit_A_tol", 1e-10}}},
        {suite_id::derivative, {{"fd_tol", 1e-6}, {"closed_form_tol", 1e-8}, {"sigma_min", 0.0}}},
        {suite_id::geometry, {{"two_path_tol", 1e-10}, {"K_max", 10.0}}},
        {suite_id::spherical, {{"phi0_tol", 1e-10}, {"backend_tol", 1e-6}, {"slope_target", -1.5},
                               {"slope_halfwidth", 0.15}, {"plancherel_band", 4.0}, {"inversion_tol", 1e-3}}},
        {suite_id::transforms, {{"hc_rel_tol", 1e-3}, {"low_ratio", 1e-4}, {"K_max", 10.0}}},
        {suite_id::decay_J, {{"slope_max", -3.0}, {"J_last_max", 1e-5}, {"control_ratio", 1e3}}},
        {suite_id::decay_I, {{"int1d_A_max", 1e-6}, {"int1d_phi_max", 1e-5}, {"J2_max", 1e-4},
                             {"J2_control_ratio", 1e2}}},
        {suite_id::split_I, {{"additivity_sigmas", 3.0}, {"K_max", 10.0}, {"I2_max", 1e-4}, {"se_fraction", 0.05}}},
        {suite_id::hecke, {}},
        {suite_id::phase, {{"cert_min", 0.0}}}};
    return t.at(s);
}

struct experiment_config {
    suite_id suite = suite_id::group;
    std::vector<double> lambda_grid{40.0};
    std::vector<double> beta_grid; // suites sweeping beta; empty means {beta}
    double beta = 16.0;
    double eps0 = 0.1;
    std::vector<double> s_grid;
    std::vector<int> q_list{2, 3, 5};
    std::uint64_t seed = 1;
    int samples = 0; // random samples for property checks; 0 means the suite default
    quadrature_orders orders;
    std::string output_dir = "out";
    std::map<std::string, double> thresholds; // overrides only

    std::vector<double> betas() const { return beta_grid.empty() ? std::vector<double>{beta} : beta_grid; }

    double threshold(const std::string& name) const
    {
        auto it = thresholds.find(name);
        if (it != thresholds.end())
            return it->second;
        return default_thresholds(suite).at(name);
    }

    /// Names of thresholds whose value differs from the default.
    std::vector<std::string> overridden() const
    {
        std::vector<std::string> out;
        const auto& d = default_thresholds(suite);
        for (auto& [k, v] : thresholds)
            if (d.at(k) != v)
                out.push_back(k);
        return out;
    }
};

/// Acceptance-level defaults for each suite.
inline experiment_config default_config(suite_id s)
{
    experiment_config c;
    c.suite = s;
    switch (s) {
    case suite_id::group: c.samples = 10000; break;
    case suite_id::derivative: c.samples = 1000; break;
    case suite_id::geometry:
        c.samples = 10000;
        c.lambda_grid = {1e3, 1e4};
        c.beta_grid = {1e2, std::pow(10.0, 2.5)};
        c.beta = 1e2;
        break;
    case suite_id::spherical: c.s_grid = {1, 5, 10, 20, 35, 50}; break;
    case suite_id::transforms: c.beta_grid = {8, 16, 32}; break;
    case suite_id::decay_J:
        c.lambda_grid = {200};
        c.beta = 10;
        c.s_grid = {50, 71, 100, 141, 200};
        break;
    case suite_id::decay_I:
        // beta_grid: first entry for the 1-d integrals at s = s_grid.back(), last for J2 at lambda
        c.lambda_grid = {40};
        c.beta_grid = {10, 16};
        c.s_grid = {200};
        break;
    case suite_id::split_I: c.beta_grid = {8, 16, 32}; break;
    case suite_id::hecke: break;
    case suite_id::phase: c.samples = 100; break;
    }
    return c;
}

namespace detail {

inline void config_fail(const std::string& field, const std::string& msg)
{
    throw error(errc::config_invalid, field + ": " + msg);
}

inline void require_increasing(const std::vector<double>& g, const std::string& field, bool allow_empty)
{
    if (g.empty() && !allow_empty)
        config_fail(field, "must be nonempty");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!std::isfinite(g[i]))
            config_fail(field, "entries must be finite");
        if (i > 0 && !(g[i] > g[i - 1]))
            config_fail(field, "must be strictly increasing");
    }
}

} // namespace detail

inline void validate(const experiment_config& c)
{
    detail::require_increasing(c.lambda_grid, "lambda_grid", false);
    detail::require_increasing(c.beta_grid, "beta_grid", true);
    detail::require_increasing(c.s_grid, "s_grid", true);
    if (!(c.eps0 > 0 && c.eps0 < 0.125))
        detail::config_fail("eps0", "must satisfy 0 < eps0 < 1/8");
    const double eps_prime = 1e-2;
    for (double lam : c.lambda_grid) {
        if (!(lam > 1))
            detail::config_fail("lambda_grid", "entries must exceed 1");
        for (double b : c.betas())
            if (!(b >= std::pow(lam, eps_prime) && b <= std::pow(lam, 1 - eps_prime)))
                detail::config_fail(c.beta_grid.empty() ? "beta" : "beta_grid",
                                    "must lie in [lambda^0.01, lambda^0.99] for every lambda");
    }
    if (c.suite == suite_id::hecke && c.q_list.empty())
        detail::config_fail("q_list", "must be nonempty");
    for (int q : c.q_list)
        if (q != 2 && q != 3 && q != 5)
            detail::config_fail("q_list", "entries must be 2, 3 or 5");
    if (c.samples < 0)
        detail::config_fail("samples", "must be >= 0");
    const auto& d = default_thresholds(c.suite);
    for (auto& [k, v] : c.thresholds) {
        if (!d.count(k))
            detail::config_fail("thresholds." + k, "unknown threshold for suite " + suite_name(c.suite));
        if (!std::isfinite(v))
            detail::config_fail("thresholds." + k, "must be finite");
    }
    const auto& o = c.orders;
    if (o.kquad_max < 16 || o.j_nodes < 4 || o.t_nodes < 4 || o.t_panels < 1 || o.disk_nodes < 8 || o.cert_grid < 2)
        detail::config_fail("orders", "quadrature orders out of range");
}

/// Parse a config document; unknown keys are rejected. Fields not present
/// keep the defaults of the named suite.
inline experiment_config parse_config(const nlohmann::json& j)
{
    using nlohmann::json;
    if (!j.is_object())
        detail::config_fail("<root>", "config must be a JSON object");
    static const std::set<std::string> keys{"suite",   "lambda_grid", "beta_grid", "beta",       "eps0",
                                            "s_grid",  "q_list",      "seed",      "samples",    "orders",
                                            "output_dir", "thresholds"};
    for (auto& [k, v] : j.items())
        if (!keys.count(k))
            detail::config_fail(k, "unknown key");
    if (!j.contains("suite") || !j["suite"].is_string())
        detail::config_fail("suite", "required string field");
    experiment_config c = default_config(parse_suite(j["suite"].get<std::string>()));
    auto get = [&](const char* key, auto& dst) {
        if (!j.contains(key))
            return;
        try {
            j.at(key).get_to(dst);
        } catch (const json::exception& e) {
            detail::config_fail(key, std::string("wrong type (") + e.what() + ")");
        }
    };
    get("lambda_grid", c.lambda_grid);
    get("beta_grid", c.beta_grid);
    get("beta", c.beta);
    get("eps0", c.eps0);
    get("s_grid", c.s_grid);
    get("q_list", c.q_list);
    get("seed", c.seed);
    get("samples", c.samples);
    get("output_dir", c.output_dir);
    if (j.contains("orders")) {
        const json& o = j["orders"];
        if (!o.is_object())
            detail::config_fail("orders", "must be an object");
        static const std::map<std::string, int quadrature_orders::*> fields{
            {"kquad_max", &quadrature_orders::kquad_max}, {"j_nodes", &quadrature_orders::j_nodes},
            {"t_nodes", &quadrature_orders::t_nodes},     {"t_panels", &quadrature_orders::t_panels},
            {"disk_nodes", &quadrature_orders::disk_nodes}, {"cert_grid", &quadrature_orders::cert_grid}};
        for (auto& [k, v] : o.items()) {
            auto it = fields.find(k);
            if (it == fields.end())
                detail::config_fail("orders." + k, "unknown key");
            if (!v.is_number_integer())
                detail::config_fail("orders." + k, "must be an integer");
            c.orders.*(it->second) = v.get<int>();
        }
    }
    if (j.contains("thresholds")) {
        const json& t = j["thresholds"];
        if (!t.is_object())
            detail::config_fail("thresholds", "must be an object");
        for (auto& [k, v] : t.items()) {
            if (!v.is_number())
                detail::config_fail("thresholds." + k, "must be a number");
            c.thresholds[k] = v.get<double>();
        }
    }
    validate(c);
    return c;
}

inline experiment_config load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw error(errc::io_failure, "cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::config_invalid, std::string("<root>: not valid JSON (") + e.what() + ")");
    }
    return parse_config(j);
}

} // namespace champ
