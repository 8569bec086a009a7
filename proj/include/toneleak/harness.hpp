// Experiment orchestration behind the CLI subcommands: dataset generation,
// mitigation application, train/eval with selective axis integration, the
// mitigation-vs-bandwidth sweep and the sampling-rate planner.
#pragma once

#include <chrono>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "toneleak/features.hpp"
#include "toneleak/filter.hpp"
#include "toneleak/gbt.hpp"
#include "toneleak/io.hpp"
#include "toneleak/sensor_sim.hpp"

namespace toneleak::harness {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string preset = "resonant";
    std::uint64_t model_seed = 1;
    double rate_hz = 400.0;
    double actual_rate_hz = 0.0;  // 0 means "same as nominal"
    std::size_t reps_per_tone = 50;
    double duration_s = 0.5;
    std::uint64_t master_seed = 7;
    features::WindowingParams windowing{50, 5};
    classifier::GbtHyperparams gbt;
    std::vector<mitigation::MitigationConfig> mitigations;  // sweep grid
};

inline mitigation::MitigationConfig mitigation_from_json(const nlohmann::json& j) {
    mitigation::MitigationConfig c;
    try {
        c.kind = j.at("kind").get<std::string>();
        c.factor = j.value("factor", std::size_t{1});
        c.cutoff_hz = j.value("cutoff_hz", 0.0);
        c.order = j.value("order", 5);
        c.target_rate_hz = j.value("target_rate_hz", 0.0);
        c.notch_centers_hz = j.value("notch_centers_hz", std::vector<double>{});
        c.notch_width_hz = j.value("notch_width_hz", 6.0);
        c.validate();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad mitigation config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad mitigation config: ") + e.what());
    }
    return c;
}

inline nlohmann::json mitigation_to_json(const mitigation::MitigationConfig& c) {
    nlohmann::json j{{"kind", c.kind}};
    if (c.kind == "downsample") j["factor"] = c.factor;
    if (c.kind == "lowpass" || c.kind == "antialias") {
        j["cutoff_hz"] = c.cutoff_hz;
        j["order"] = c.order;
    }
    if (c.kind == "antialias") j["target_rate_hz"] = c.target_rate_hz;
    if (c.kind == "notch") {
        j["notch_centers_hz"] = c.notch_centers_hz;
        j["notch_width_hz"] = c.notch_width_hz;
    }
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        c.preset = j.value("preset", c.preset);
        c.model_seed = j.value("model_seed", c.model_seed);
        c.rate_hz = j.value("rate_hz", c.rate_hz);
        c.actual_rate_hz = j.value("actual_rate_hz", 0.0);
        c.reps_per_tone = j.value("reps_per_tone", c.reps_per_tone);
        c.duration_s = j.value("duration_s", c.duration_s);
        c.master_seed = j.value("master_seed", c.master_seed);
        if (j.contains("windowing"))
            c.windowing = features::WindowingParams(j["windowing"].value("frame_size", std::size_t{50}),
                                                    j["windowing"].value("frame_step", std::size_t{5}));
        if (j.contains("gbt")) {
            const auto& g = j["gbt"];
            c.gbt.learning_rate = g.value("learning_rate", c.gbt.learning_rate);
            c.gbt.max_depth = g.value("max_depth", c.gbt.max_depth);
            c.gbt.min_child_weight = g.value("min_child_weight", c.gbt.min_child_weight);
            c.gbt.gamma = g.value("gamma", c.gbt.gamma);
            c.gbt.colsample_bytree = g.value("colsample_bytree", c.gbt.colsample_bytree);
            c.gbt.n_rounds = g.value("n_rounds", c.gbt.n_rounds);
            c.gbt.seed = g.value("seed", c.gbt.seed);
            c.gbt.lambda_l2 = g.value("lambda_l2", c.gbt.lambda_l2);
        }
        for (const auto& m : j.value("mitigations", nlohmann::json::array()))
            c.mitigations.push_back(mitigation_from_json(m));
        c.gbt.validate();
        if (c.reps_per_tone < 1) throw ConfigError("reps_per_tone must be >= 1");
        if (c.duration_s <= 0.0) throw ConfigError("duration_s must be > 0");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad experiment config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad experiment config: ") + e.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("cannot parse config JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline sensor_sim::SensorModel build_model(const ExperimentConfig& cfg) {
    auto model = sensor_sim::make_default_model(cfg.preset, cfg.model_seed, cfg.rate_hz);
    if (cfg.actual_rate_hz > 0.0)
        model.cfg = sampling::SamplingConfig(cfg.rate_hz, cfg.actual_rate_hz);
    return model;
}

inline sensor_sim::Dataset generate(const ExperimentConfig& cfg) {
    return sensor_sim::generate_dataset(build_model(cfg), cfg.reps_per_tone, cfg.duration_s,
                                        cfg.master_seed);
}

// gen: synthesize the dataset and write it as CSV recordings + manifest.
inline void cmd_gen(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    io::write_dataset(out_dir, generate(cfg), cfg.preset, cfg.master_seed);
}

// mitigate: transform every recording, append to the mitigation chain.
inline void cmd_mitigate(const std::filesystem::path& in_dir, const mitigation::MitigationConfig& mc,
                         const std::filesystem::path& out_dir) {
    auto [ds, manifest] = io::read_dataset(in_dir);
    for (auto& rec : ds.recordings) rec = mitigation::apply_mitigation(rec, mc);
    auto chain = manifest.mitigation_chain;
    chain.push_back(mitigation_to_json(mc));
    io::write_dataset(out_dir, ds, manifest.preset, manifest.master_seed, chain);
}

struct TrainEvalResult {
    classifier::EvalReport report;
    classifier::AxisSelection selection;
    classifier::TreeEnsembleModel model;
    std::array<std::size_t, 6> axis_feature_len{};  // per-axis padded lengths
};

// Per-axis feature matrices for a set of recording indices. target_len of 0
// means "use the natural length of the largest recording in rows".
inline std::array<classifier::FeatureMatrix, 6> per_axis_features(
    const sensor_sim::Dataset& ds, const std::vector<std::size_t>& rows,
    const features::WindowingParams& wp, std::array<std::size_t, 6> target_len = {}) {
    std::array<classifier::FeatureMatrix, 6> out;
    for (int a = 0; a < 6; ++a) {
        std::size_t target = target_len[static_cast<std::size_t>(a)];
        if (target == 0)
            for (std::size_t r : rows)
                target = std::max(target,
                                  features::natural_length(ds.recordings[r].axes[0].samples.size(), 1, wp));
        std::vector<features::FeatureVector> fvs;
        fvs.reserve(rows.size());
        for (std::size_t r : rows)
            fvs.push_back(features::extract(ds.recordings[r], {a}, wp, target));
        out[static_cast<std::size_t>(a)] = classifier::FeatureMatrix::from_vectors(fvs);
    }
    return out;
}

// train-eval: selective axis integration on the training split, final model
// on the full training split with the selected axes, evaluation on test.
inline TrainEvalResult train_eval(const sensor_sim::Dataset& ds, const features::WindowingParams& wp,
                                  const classifier::GbtHyperparams& hp) {
    if (ds.train_indices.empty() || ds.test_indices.empty())
        throw io::DataError("train_eval: dataset needs non-empty train and test splits");

    // Shared per-axis padded lengths so train and test vectors align.
    std::array<std::size_t, 6> lens{};
    for (const auto& rec : ds.recordings)
        for (int a = 0; a < 6; ++a)
            lens[static_cast<std::size_t>(a)] =
                std::max(lens[static_cast<std::size_t>(a)],
                         features::natural_length(rec.axes[0].samples.size(), 1, wp));

    const auto train_feats = per_axis_features(ds, ds.train_indices, wp, lens);
    const auto test_feats = per_axis_features(ds, ds.test_indices, wp, lens);

    TrainEvalResult res;
    res.axis_feature_len = lens;
    res.selection = classifier::select_axes(train_feats, hp, hp.seed);

    std::vector<const classifier::FeatureMatrix*> train_parts, test_parts;
    for (int a : res.selection.selected_axes) {
        train_parts.push_back(&train_feats[static_cast<std::size_t>(a)]);
        test_parts.push_back(&test_feats[static_cast<std::size_t>(a)]);
    }
    res.model = classifier::train(classifier::FeatureMatrix::hconcat(train_parts), hp);
    res.model.axes_used = res.selection.selected_axes;
    res.report = classifier::evaluate(res.model, classifier::FeatureMatrix::hconcat(test_parts));
    return res;
}

inline void write_train_eval_outputs(const TrainEvalResult& res, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    io::write_text(out_dir / "report.csv", io::report_to_csv(res.report));
    io::write_text(out_dir / "model.json", classifier::model_to_json(res.model).dump() + "\n");
    nlohmann::json sel{{"selected_axes", nlohmann::json::array()},
                       {"ranked_axes", nlohmann::json::array()},
                       {"best_val_accuracy", res.selection.best_val_accuracy},
                       {"candidates", nlohmann::json::array()}};
    for (int a : res.selection.selected_axes)
        sel["selected_axes"].push_back(sensor_sim::kAxisNames[static_cast<std::size_t>(a)]);
    for (int a : res.selection.ranked_axes)
        sel["ranked_axes"].push_back(sensor_sim::kAxisNames[static_cast<std::size_t>(a)]);
    for (const auto& [axes, acc] : res.selection.candidates) {
        nlohmann::json names = nlohmann::json::array();
        for (int a : axes) names.push_back(sensor_sim::kAxisNames[static_cast<std::size_t>(a)]);
        sel["candidates"].push_back({{"axes", names}, {"val_accuracy", acc}});
    }
    io::write_text(out_dir / "selection.json", sel.dump(2) + "\n");
}

inline TrainEvalResult cmd_train_eval(const std::filesystem::path& dataset_dir,
                                      const ExperimentConfig& cfg,
                                      const std::filesystem::path& out_dir) {
    auto [ds, manifest] = io::read_dataset(dataset_dir);
    auto res = train_eval(ds, cfg.windowing, cfg.gbt);
    write_train_eval_outputs(res, out_dir);
    return res;
}

struct SweepRow {
    std::string kind;
    std::string params;
    double bandwidth_hz = 0.0;
    double accuracy = 0.0;
    std::vector<int> axes;
    double runtime_s = 0.0;
};

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "mitigation,params,bandwidth_hz,accuracy,axes_selected,runtime_s\n";
    for (const auto& r : rows) {
        out << r.kind << "," << r.params << "," << io::fmt_double(r.bandwidth_hz) << ","
            << io::fmt_double(r.accuracy) << ",";
        for (std::size_t i = 0; i < r.axes.size(); ++i)
            out << (i ? "|" : "") << sensor_sim::kAxisNames[static_cast<std::size_t>(r.axes[i])];
        out << "," << io::fmt_double(r.runtime_s) << "\n";
    }
    return out.str();
}

inline std::string mitigation_param_string(const mitigation::MitigationConfig& c) {
    std::ostringstream s;
    if (c.kind == "downsample") s << "n=" << c.factor;
    if (c.kind == "lowpass") s << "fc=" << c.cutoff_hz << ";order=" << c.order;
    if (c.kind == "antialias")
        s << "fc=" << c.cutoff_hz << ";order=" << c.order << ";target=" << c.target_rate_hz;
    if (c.kind == "notch") s << "width=" << c.notch_width_hz << ";n_centers=" << c.notch_centers_hz.size();
    return s.str();
}

// sweep: for every configured mitigation, mitigate -> retrain -> evaluate.
// With fixed_model the attacker model is trained once on unmitigated data
// and reused on every mitigated test set.
inline std::vector<SweepRow> cmd_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                       bool fixed_model = false) {
    std::filesystem::create_directories(out_dir);
    const auto base = generate(cfg);

    std::vector<SweepRow> rows;
    TrainEvalResult fixed;
    std::array<std::size_t, 6> fixed_lens{};
    if (fixed_model && !cfg.mitigations.empty()) {
        fixed = train_eval(base, cfg.windowing, cfg.gbt);
        fixed_lens = fixed.axis_feature_len;
    }

    for (std::size_t mi = 0; mi < cfg.mitigations.size(); ++mi) {
        const auto& mc = cfg.mitigations[mi];
        const auto t0 = std::chrono::steady_clock::now();

        sensor_sim::Dataset mitigated;
        mitigated.train_indices = base.train_indices;
        mitigated.test_indices = base.test_indices;
        mitigated.recordings.reserve(base.recordings.size());
        for (const auto& rec : base.recordings)
            mitigated.recordings.push_back(mitigation::apply_mitigation(rec, mc));

        SweepRow row;
        row.kind = mc.kind;
        row.params = mitigation_param_string(mc);
        row.bandwidth_hz = mitigation::delivered_bandwidth_hz(mc, cfg.rate_hz);

        char cell_name[32];
        std::snprintf(cell_name, sizeof cell_name, "cell_%02zu", mi);
        const auto cell_dir = out_dir / cell_name;

        if (fixed_model) {
            const auto test_feats = per_axis_features(mitigated, mitigated.test_indices, cfg.windowing, fixed_lens);
            std::vector<const classifier::FeatureMatrix*> parts;
            for (int a : fixed.selection.selected_axes)
                parts.push_back(&test_feats[static_cast<std::size_t>(a)]);
            const auto rep = classifier::evaluate(fixed.model, classifier::FeatureMatrix::hconcat(parts));
            row.accuracy = rep.accuracy;
            row.axes = fixed.selection.selected_axes;
            std::filesystem::create_directories(cell_dir);
            io::write_text(cell_dir / "report.csv", io::report_to_csv(rep));
        } else {
            const auto res = train_eval(mitigated, cfg.windowing, cfg.gbt);
            row.accuracy = res.report.accuracy;
            row.axes = res.selection.selected_axes;
            write_train_eval_outputs(res, cell_dir);
        }

        row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(std::move(row));
    }

    io::write_text(out_dir / "sweep.csv", sweep_to_csv(rows));
    return rows;
}

inline std::string plan_to_csv(const mitigation::RatePlan& plan) {
    std::ostringstream out;
    out << "candidate_hz,attenuable_count,is_best\n";
    for (const auto& e : plan.table)
        out << io::fmt_double(e.candidate_rate_hz) << "," << e.attenuable_count << ","
            << (e.candidate_rate_hz == plan.best_rate_hz ? 1 : 0) << "\n";
    return out.str();
}

inline mitigation::RatePlan cmd_plan(const std::vector<double>& sensitive, double f_c,
                                     const std::vector<double>& candidates,
                                     const std::filesystem::path& out_path) {
    const auto plan = mitigation::plan_sampling_rate(sensitive, f_c, candidates);
    if (!out_path.empty()) io::write_text(out_path, plan_to_csv(plan));
    return plan;
}

}  // namespace toneleak::harness
