// Acceptance run: one suite per criterion at the default configuration.
// Tolerances are pinned here and must agree with the library defaults, so a
// silent change on either side shows up as a failure.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <champ/suites.hpp>

using namespace champ;

namespace {

struct criterion {
    int id;
    suite_id suite;
    std::map<std::string, double> tolerances;
};

const std::vector<criterion>& criteria()
{
    static const std::vector<criterion> c{
        {1, suite_id::group, {{"roundtrip_tol", 1e-9}, {"action_law_tol", 1e-9}, {"splitting_tol", 1e-9},
                              {"explicit_A_tol", 1e-10}}},
        {2, suite_id::derivative, {{"fd_tol", 1e-6}, {"closed_form_tol", 1e-8}, {"sigma_min", 0.0}}},
        {3, suite_id::geometry, {{"two_path_tol", 1e-10}, {"K_max", 10.0}}},
        {4, suite_id::spherical, {{"phi0_tol", 1e-10}, {"backend_tol", 1e-6}, {"slope_target", -1.5},
                                  {"slope_halfwidth", 0.15}, {"plancherel_band", 4.0}, {"inversion_tol", 1e-3}}},
        {5, suite_id::transforms, {{"hc_rel_tol", 1e-3}, {"low_ratio", 1e-4}, {"K_max", 10.0}}},
        {6, suite_id::decay_J, {{"slope_max", -3.0}, {"J_last_max", 1e-5}, {"control_ratio", 1e3}}},
        {7, suite_id::split_I, {{"additivity_sigmas", 3.0}, {"K_max", 10.0}, {"I2_max", 1e-4}, {"se_fraction", 0.05}}},
        {8, suite_id::hecke, {}},
        {9, suite_id::phase, {{"cert_min", 0.0}}}};
    return c;
}

} // namespace

int main()
{
    int failed = 0;
    for (const criterion& c : criteria()) {
        const std::string name = suite_name(c.suite);
        bool ok = true;
        if (c.tolerances != default_thresholds(c.suite)) {
            std::printf("  tolerance table for %s differs from the library defaults\n", name.c_str());
            ok = false;
        }
        suite_report r;
        try {
            r = run_suite(default_config(c.suite), 0);
        } catch (const error& e) {
            std::printf("  %s\n", e.what());
            ok = false;
        }
        for (const auto& rec : r.records)
            if (!rec.pass) {
                std::printf("  FAIL %s: %.6g %s %.6g %s\n", rec.name.c_str(), rec.measured, rec.relation.c_str(),
                            rec.threshold, rec.note.c_str());
                ok = false;
            }
        const double limit = suite_runtime_limit(c.suite);
        if (r.elapsed_s > limit) {
            std::printf("  runtime %.1f s exceeds %.0f s\n", r.elapsed_s, limit);
            ok = false;
        }
        if (r.records.empty())
            ok = false;
        std::printf("criterion %d (%s): %s  [%zu checks, %.1f s]\n", c.id, name.c_str(), ok ? "PASS" : "FAIL",
                    r.records.size(), r.elapsed_s);
        std::fflush(stdout);
        failed += !ok;
    }
    std::printf("acceptance: %s (%d of %zu criteria failed)\n", failed ? "FAIL" : "PASS", failed, criteria().size());
    return failed ? 1 : 0;
}
