// toneleak command line: dataset generation, mitigation, training and
// evaluation, bandwidth sweeps and the sampling-rate planner.
//
// Exit codes: 0 success, 2 invalid config, 3 data error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "toneleak/harness.hpp"

namespace {

std::vector<double> default_dtmf_freqs() {
    std::vector<double> f;
    for (double v : toneleak::dtmf::kRowHz) f.push_back(v);
    for (double v : toneleak::dtmf::kColHz) f.push_back(v);
    return f;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"touchtone leakage simulation and mitigation toolkit"};
    app.require_subcommand(1);

    std::string config_path, in_dir, out_path;
    std::uint64_t seed_override = 0;
    bool has_seed = false;
    int jobs = 1;
    bool fixed_model = false;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "experiment config JSON");
        if (needs_config) opt->required();
        cmd->add_option("--seed", seed_override, "override the master seed")
            ->each([&](const std::string&) { has_seed = true; });
        cmd->add_option("--out", out_path, "output path")->required();
        cmd->add_option("--jobs", jobs, "worker count (sweep cells)");
    };

    auto* gen = app.add_subcommand("gen", "generate a labeled dataset");
    add_common(gen, true);

    auto* mitigate = app.add_subcommand("mitigate", "apply a mitigation to a dataset");
    mitigate->add_option("--in", in_dir, "input dataset directory")->required();
    mitigate->add_option("--out", out_path, "output dataset directory")->required();
    std::string kind = "none";
    std::size_t factor = 1;
    double cutoff = 0.0, target_rate = 0.0, notch_width = 6.0;
    int order = 5;
    std::vector<double> notch_centers;
    mitigate->add_option("--kind", kind, "none|downsample|lowpass|antialias|notch")->required();
    mitigate->add_option("--factor", factor, "downsample factor n");
    mitigate->add_option("--cutoff", cutoff, "filter cutoff (Hz)");
    mitigate->add_option("--order", order, "Butterworth order");
    mitigate->add_option("--target-rate", target_rate, "anti-aliasing target rate (Hz)");
    mitigate->add_option("--notch-centers", notch_centers, "notch center frequencies (Hz)");
    mitigate->add_option("--notch-width", notch_width, "notch width (Hz)");

    auto* train_eval = app.add_subcommand("train-eval", "train the classifier and evaluate");
    train_eval->add_option("--in", in_dir, "dataset directory")->required();
    add_common(train_eval, true);

    auto* sweep = app.add_subcommand("sweep", "mitigation-vs-bandwidth sweep");
    add_common(sweep, true);
    sweep->add_flag("--fixed-model", fixed_model,
                    "evaluate with the model trained on unmitigated data instead of retraining");

    auto* plan = app.add_subcommand("plan", "sampling-rate planner");
    std::vector<double> sensitive = default_dtmf_freqs();
    std::vector<double> candidates;
    double plan_cutoff = 180.0;
    plan->add_option("--freqs", sensitive, "sensitive frequencies (Hz), default: the 8 touchtone frequencies");
    plan->add_option("--cutoff", plan_cutoff, "low-pass cutoff (Hz)");
    plan->add_option("--candidates", candidates, "candidate sampling rates (Hz)")->required();
    plan->add_option("--out", out_path, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan->parsed()) {
            const auto p = toneleak::harness::cmd_plan(sensitive, plan_cutoff, candidates, out_path);
            for (const auto& e : p.table)
                std::printf("f_s=%g Hz -> %d attenuable\n", e.candidate_rate_hz, e.attenuable_count);
            std::printf("best: %g Hz\n", p.best_rate_hz);
            return 0;
        }

        if (mitigate->parsed()) {
            toneleak::mitigation::MitigationConfig mc;
            mc.kind = kind;
            mc.factor = factor;
            mc.cutoff_hz = cutoff;
            mc.order = order;
            mc.target_rate_hz = target_rate;
            mc.notch_centers_hz = notch_centers;
            mc.notch_width_hz = notch_width;
            try {
                mc.validate();
            } catch (const std::invalid_argument& e) {
                std::fprintf(stderr, "invalid mitigation: %s\n", e.what());
                return 2;
            }
            toneleak::harness::cmd_mitigate(in_dir, mc, out_path);
            return 0;
        }

        auto cfg = toneleak::harness::load_config(config_path);
        if (has_seed) cfg.master_seed = seed_override;
        (void)jobs;  // cells run sequentially; kept for interface stability

        if (gen->parsed()) {
            toneleak::harness::cmd_gen(cfg, out_path);
        } else if (train_eval->parsed()) {
            const auto res = toneleak::harness::cmd_train_eval(in_dir, cfg, out_path);
            std::printf("accuracy: %.4f\n", res.report.accuracy);
            std::printf("selected axes:");
            for (int a : res.selection.selected_axes)
                std::printf(" %s", toneleak::sensor_sim::kAxisNames[static_cast<std::size_t>(a)]);
            std::printf("\n");
        } else if (sweep->parsed()) {
            const auto rows = toneleak::harness::cmd_sweep(cfg, out_path, fixed_model);
            for (const auto& r : rows)
                std::printf("%s [%s] bandwidth=%g Hz accuracy=%.4f (%.1fs)\n", r.kind.c_str(),
                            r.params.c_str(), r.bandwidth_hz, r.accuracy, r.runtime_s);
        }
        return 0;
    } catch (const toneleak::harness::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid argument: %s\n", e.what());
        return 2;
    } catch (const toneleak::io::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
