// File formats: recording CSV, dataset manifest JSON, feature-matrix CSV,
// evaluation-report CSV, SOS coefficient CSV. All text, all deterministic
// (doubles printed with %.17g round-trip precision).
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "toneleak/filter.hpp"
#include "toneleak/gbt.hpp"
#include "toneleak/sensor_sim.hpp"

namespace toneleak::io {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- DiscreteSignal CSV: comment header with rate, then time,value rows ---

inline std::string signal_to_csv(const sampling::DiscreteSignal& sig) {
    std::ostringstream out;
    out << "# rate=" << fmt_double(sig.rate_hz) << "\n";
    out << "t,value\n";
    for (std::size_t i = 0; i < sig.samples.size(); ++i)
        out << fmt_double(sig.start_time_s + static_cast<double>(i) / sig.rate_hz) << ","
            << fmt_double(sig.samples[i]) << "\n";
    return out.str();
}

// --- Recording CSV: "# rate=<Hz> label=<symbol> seed=<n>" then t,ax..gz ---

inline std::string recording_to_csv(const sensor_sim::Recording& rec) {
    std::ostringstream out;
    out << "# rate=" << fmt_double(rec.axes[0].rate_hz) << " label=" << rec.label.symbol()
        << " seed=" << rec.seed << "\n";
    out << "t,ax,ay,az,gx,gy,gz\n";
    const std::size_t n = rec.axes[0].samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        out << fmt_double(static_cast<double>(i) / rec.axes[0].rate_hz);
        for (const auto& axis : rec.axes) out << "," << fmt_double(axis.samples[i]);
        out << "\n";
    }
    return out.str();
}

inline sensor_sim::Recording recording_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# rate=", 0) != 0)
        throw DataError("recording CSV: missing metadata comment line");

    double rate = 0.0;
    char label_sym = 0;
    unsigned long long seed = 0;
    if (std::sscanf(line.c_str(), "# rate=%lf label=%c seed=%llu", &rate, &label_sym, &seed) != 3)
        throw DataError("recording CSV: malformed metadata line: " + line);

    if (!std::getline(in, line) || line != "t,ax,ay,az,gx,gy,gz")
        throw DataError("recording CSV: missing column header");

    sensor_sim::Recording rec{dtmf::ToneId::from_symbol(label_sym), {}, "", seed, 0.0};
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');  // time column, reconstructed from rate
        for (auto& axis : rec.axes) {
            if (!std::getline(row, cell, ',')) throw DataError("recording CSV: short row");
            axis.samples.push_back(std::stod(cell));
        }
    }
    for (auto& axis : rec.axes) axis.rate_hz = rate;
    if (rec.axes[0].samples.empty()) throw DataError("recording CSV: no samples");
    rec.duration_s = static_cast<double>(rec.axes[0].samples.size()) / rate;
    return rec;
}

// --- dataset directory: recordings/*.csv + manifest.json ---

struct Manifest {
    std::vector<std::string> files;
    std::vector<char> labels;
    std::vector<bool> is_test;
    std::string preset;
    std::uint64_t master_seed = 0;
    double rate_hz = 0.0;
    std::vector<nlohmann::json> mitigation_chain;
};

inline nlohmann::json manifest_to_json(const Manifest& m) {
    nlohmann::json recs = nlohmann::json::array();
    for (std::size_t i = 0; i < m.files.size(); ++i)
        recs.push_back({{"file", m.files[i]},
                        {"label", std::string(1, m.labels[i])},
                        {"split", m.is_test[i] ? "test" : "train"}});
    return {{"format_version", 1},
            {"preset", m.preset},
            {"master_seed", m.master_seed},
            {"rate_hz", m.rate_hz},
            {"mitigation_chain", m.mitigation_chain},
            {"recordings", recs}};
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
    Manifest m;
    m.preset = j.at("preset").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.rate_hz = j.at("rate_hz").get<double>();
    for (const auto& mc : j.at("mitigation_chain")) m.mitigation_chain.push_back(mc);
    for (const auto& r : j.at("recordings")) {
        m.files.push_back(r.at("file").get<std::string>());
        m.labels.push_back(r.at("label").get<std::string>().at(0));
        m.is_test.push_back(r.at("split").get<std::string>() == "test");
    }
    return m;
}

inline void write_dataset(const std::filesystem::path& dir, const sensor_sim::Dataset& ds,
                          const std::string& preset, std::uint64_t master_seed,
                          const std::vector<nlohmann::json>& mitigation_chain = {}) {
    std::filesystem::create_directories(dir / "recordings");
    Manifest m;
    m.preset = preset;
    m.master_seed = master_seed;
    m.rate_hz = ds.recordings.empty() ? 0.0 : ds.recordings[0].axes[0].rate_hz;
    m.mitigation_chain = mitigation_chain;
    std::vector<bool> test_flag(ds.recordings.size(), false);
    for (std::size_t i : ds.test_indices) test_flag[i] = true;
    for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "rec_%05zu.csv", i);
        write_text(dir / "recordings" / name, recording_to_csv(ds.recordings[i]));
        m.files.push_back(std::string("recordings/") + name);
        m.labels.push_back(ds.recordings[i].label.symbol());
        m.is_test.push_back(test_flag[i]);
    }
    write_text(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

inline std::pair<sensor_sim::Dataset, Manifest> read_dataset(const std::filesystem::path& dir) {
    const auto j = nlohmann::json::parse(read_text(dir / "manifest.json"));
    Manifest m = manifest_from_json(j);
    sensor_sim::Dataset ds;
    for (std::size_t i = 0; i < m.files.size(); ++i) {
        const auto path = dir / m.files[i];
        if (!std::filesystem::exists(path)) throw DataError("manifest references missing file: " + path.string());
        ds.recordings.push_back(recording_from_csv(read_text(path)));
        if (ds.recordings.back().label.symbol() != m.labels[i])
            throw DataError("manifest label disagrees with recording file: " + path.string());
        (m.is_test[i] ? ds.test_indices : ds.train_indices).push_back(i);
    }
    return {std::move(ds), std::move(m)};
}

// --- feature matrix CSV: one row per recording, final column = label symbol ---

inline std::string features_to_csv(const classifier::FeatureMatrix& m) {
    std::ostringstream out;
    for (std::size_t j = 0; j < m.d; ++j) out << "f" << j << ",";
    out << "label\n";
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.d; ++j) out << fmt_double(m.x[i * m.d + j]) << ",";
        out << dtmf::ToneId(m.y[i]).symbol() << "\n";
    }
    return out.str();
}

// --- EvalReport CSV: accuracy line, then the confusion matrix ---

inline std::string report_to_csv(const classifier::EvalReport& rep) {
    std::ostringstream out;
    out << "accuracy," << fmt_double(rep.accuracy) << "\n";
    out << "confusion";
    for (std::size_t c = 0; c < rep.confusion.size(); ++c)
        out << ",pred_" << dtmf::ToneId(static_cast<int>(c)).symbol();
    out << "\n";
    for (std::size_t r = 0; r < rep.confusion.size(); ++r) {
        out << "true_" << dtmf::ToneId(static_cast<int>(r)).symbol();
        for (int v : rep.confusion[r]) out << "," << v;
        out << "\n";
    }
    return out.str();
}

// --- FilterSpec SOS dump ---

inline std::string sos_to_csv(const mitigation::FilterSpec& spec) {
    std::ostringstream out;
    out << "b0,b1,b2,a1,a2\n";
    for (const auto& s : spec.sections)
        out << fmt_double(s.b0) << "," << fmt_double(s.b1) << "," << fmt_double(s.b2) << ","
            << fmt_double(s.a1) << "," << fmt_double(s.a2) << "\n";
    return out.str();
}

}  // namespace toneleak::io
