// verify <suite> --config <file> [--seed N] [--threads N] [--out DIR]
//
// Runs one verification suite, prints a record per check and writes
// <suite>.csv, <suite>_<table>.csv and <suite>.json into the output
// directory. Exit code 0 iff every check passed.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <champ/suites.hpp>

int main(int argc, char** argv)
{
    CLI::App app{"Run a verification suite"};
    std::string suite, config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("suite", suite, "group | derivative | geometry | spherical | transforms | decay_J | decay_I | "
                                   "split_I | hecke | phase")
        ->required();
    app.add_option("--config", config_path, "JSON config")->required();
    auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed");
    app.add_option("--threads", threads, "worker threads (default: all cores)");
    auto* out_opt = app.add_option("--out", out_dir, "output directory (default: config output_dir)");
    CLI11_PARSE(app, argc, argv);

    try {
        champ::experiment_config cfg = champ::load_config(config_path);
        if (champ::suite_name(cfg.suite) != suite)
            throw champ::error(champ::errc::config_invalid,
                               "suite: config names '" + champ::suite_name(cfg.suite) + "' but '" + suite +
                                   "' was requested");
        if (*seed_opt)
            cfg.seed = seed;
        if (*out_opt)
            cfg.output_dir = out_dir;

        const champ::suite_report r = champ::run_suite(cfg, threads);
        const std::string banner = champ::banner(r);
        if (!banner.empty())
            std::cout << banner << "\n";
        for (const auto& c : r.records) {
            std::printf("%-4s %-44s %-12.5g %-5s %-12.5g %s\n", c.relation == "info" ? "INFO" : c.pass ? "PASS" : "FAIL",
                        c.name.c_str(), c.measured, c.relation.c_str(), c.threshold, c.note.c_str());
        }
        for (auto fmt : {champ::report_format::csv, champ::report_format::json})
            for (const auto& p : champ::emit_report(r, fmt, cfg.output_dir))
                std::cout << "wrote " << p.string() << "\n";
        std::printf("%s: %s (%.1f s)\n", r.suite.c_str(), r.overall() ? "PASS" : "FAIL", r.elapsed_s);
        return r.overall() ? 0 : 1;
    } catch (const champ::error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}
