#include <iostream>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nmse/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"non-Markovian spontaneous-emission dynamics near a structured reservoir"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    int jobs = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--output", output_dir, "output directory (overrides output_dir)");
        sub->add_option("--jobs", jobs, "worker threads (default: all cores)");
    };

    CLI::App* sub_spectrum = app.add_subcommand("spectrum", "write the Purcell spectrum as CSV");
    CLI::App* sub_kernel = app.add_subcommand("kernel", "write the sampled memory kernel as CSV");
    CLI::App* sub_fit = app.add_subcommand("fit", "fit Lorentzian peaks to the spectrum");
    CLI::App* sub_simulate = app.add_subcommand("simulate", "propagate the emitter amplitude");
    CLI::App* sub_sweep = app.add_subcommand("sweep", "run a parameter sweep");
    for (CLI::App* sub : {sub_spectrum, sub_kernel, sub_fit, sub_simulate, sub_sweep})
        add_common(sub);

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#endif

    try {
        nmse::RawConfig raw = nmse::RawConfig::parse_file(config_path);
        nmse::RunConfig cfg = nmse::build_run_config(raw);
        if (!output_dir.empty()) cfg.output_dir = output_dir;

        if (sub_spectrum->parsed()) nmse::cmd_spectrum(cfg, std::cout);
        else if (sub_kernel->parsed()) nmse::cmd_kernel(cfg, std::cout);
        else if (sub_fit->parsed()) nmse::cmd_fit(cfg, std::cout);
        else if (sub_simulate->parsed()) nmse::cmd_simulate(cfg, raw, std::cout);
        else if (sub_sweep->parsed()) nmse::cmd_sweep(cfg, raw, jobs, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
