#include "magiclens/config.hpp"
#include "magiclens/csv.hpp"
#include "magiclens/harness.hpp"
#include "magiclens/scheduler.hpp"
#include "magiclens/tracksim.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace magiclens;

namespace {

std::vector<double> parse_values(const std::string& list)
{
    std::vector<double> out;
    for (auto f : csv::split(list, ',')) {
        try {
            out.push_back(csv::parse_double(f));
        } catch (const std::invalid_argument&) {
            throw ConfigError("--values: '" + std::string(f) + "' is not a number");
        }
        if (!std::isfinite(out.back()))
            throw ConfigError("--values: values must be finite");
    }
    if (out.empty())
        throw ConfigError("--values: empty list");
    return out;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return os;
}

void print_truth_table(double eps, std::ostream& os)
{
    ThresholdConfig cfg;
    cfg.eps_max_px = eps;
    cfg.eps_min_px = 0.1 * eps;
    cfg.validate();
    os << "case,is_precise,e_px,delta_e_px,decision,reason,next_is_precise\n";
    for (const auto& c : scripted_steps(eps)) {
        const StepResult r = step(c.state, c.flow, cfg);
        SchedulerState next = r.state;
        if (r.decision.recalculate())
            next = apply_recalculation(next, c.flow.value_or(c.state.pos_eye_calc), cfg);
        os << c.name << ',' << (c.state.is_precise ? "true" : "false") << ','
           << csv::format(r.decision.e_px) << ',' << csv::format(r.decision.delta_e_px) << ','
           << to_string(r.decision.kind) << ',' << to_string(r.decision.reason) << ','
           << (next.is_precise ? "true" : "false") << '\n';
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Magic-lens rendering simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path, param_name, values, spec_path;
    double eps = 24.0;

    auto* simulate = app.add_subcommand("simulate", "Run all configured modes");
    simulate->add_option("--config", config_path, "Config file")->required();
    simulate->add_option("--out", out_path, "Output directory")->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter");
    sweep_cmd->add_option("--config", config_path, "Config file")->required();
    sweep_cmd->add_option("--param", param_name, "eps_max, jitter_sigma or head_displacement")
        ->required();
    sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
    sweep_cmd->add_option("--out", out_path, "Output directory")->required();

    auto* truth = app.add_subcommand("truthtable", "Print scheduler decisions for scripted inputs");
    truth->add_option("--eps", eps, "Spatial threshold (px)")->required();

    auto* gen = app.add_subcommand("gen-trace", "Generate a head trace CSV");
    gen->add_option("--spec", spec_path, "Trace spec file")->required();
    gen->add_option("--out", out_path, "Output CSV file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            const ExperimentConfig cfg = load_experiment_config(config_path);
            write_simulation(cfg, out_path);
        } else if (*sweep_cmd) {
            const ExperimentConfig cfg = load_experiment_config(config_path);
            const SweepParam p = parse_sweep_param(param_name);
            const auto rows = sweep(cfg, p, parse_values(values));
            fs::create_directories(out_path);
            auto os = open_out(fs::path(out_path) / "sweep.csv");
            write_sweep_csv(os, p, rows, cfg);
        } else if (*truth) {
            print_truth_table(eps, std::cout);
        } else if (*gen) {
            const HeadTrace trace = generate_trace(load_trace_spec(spec_path));
            auto os = open_out(out_path);
            write_trace_csv(os, trace);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
