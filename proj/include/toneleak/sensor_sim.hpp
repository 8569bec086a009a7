// Simulates touchtone leakage into a 6-axis IMU (accel x/y/z, gyro x/y/z).
//
// Channel model per axis: multiplicative gain applied to each component at
// its true (pre-sampling) frequency, integer harmonics of each fundamental,
// exact point sampling at the configured rate, additive Gaussian noise.
// Aliasing is never injected; it emerges from sampling.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "toneleak/dtmf.hpp"
#include "toneleak/rng.hpp"
#include "toneleak/sampling.hpp"

namespace toneleak::sensor_sim {

inline constexpr int kAxisCount = 6;
inline constexpr std::array<const char*, 6> kAxisNames = {"ax", "ay", "az", "gx", "gy", "gz"};

struct ResonancePeak {
    double center_hz;
    double peak_gain;
    double width_hz;
};

// Piecewise-linear base gain curve plus additive triangular resonance bumps.
struct AxisResponse {
    std::vector<std::pair<double, double>> gain_knots;  // (Hz, gain), ascending Hz
    std::vector<ResonancePeak> peaks;

    static AxisResponse flat(double gain = 1.0, double f_max = 5000.0) {
        return AxisResponse{{{0.0, gain}, {f_max, gain}}, {}};
    }

    double gain(double f) const {
        double g = 0.0;
        if (!gain_knots.empty()) {
            if (f <= gain_knots.front().first) {
                g = gain_knots.front().second;
            } else if (f >= gain_knots.back().first) {
                g = gain_knots.back().second;
            } else {
                for (std::size_t i = 1; i < gain_knots.size(); ++i) {
                    if (f <= gain_knots[i].first) {
                        const auto& [f0, g0] = gain_knots[i - 1];
                        const auto& [f1, g1] = gain_knots[i];
                        g = g0 + (g1 - g0) * (f - f0) / (f1 - f0);
                        break;
                    }
                }
            }
        }
        for (const auto& p : peaks) {
            const double d = std::abs(f - p.center_hz);
            if (d < p.width_hz) g += p.peak_gain * (1.0 - d / p.width_hz);
        }
        return g;
    }
};

struct SensorModel {
    std::array<AxisResponse, 6> axes;
    std::array<double, 6> noise_std;
    std::vector<std::pair<int, double>> harmonic_gains;  // (order k >= 2, relative amplitude)
    sampling::SamplingConfig cfg;
    std::uint64_t rng_seed = 0;
    std::string preset_name = "custom";
};

struct Recording {
    dtmf::ToneId label;
    std::array<sampling::DiscreteSignal, 6> axes;
    std::string model_id;
    std::uint64_t seed = 0;
    double duration_s = 0.0;
};

struct Dataset {
    std::vector<Recording> recordings;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

// Fundamentals plus harmonics, gains applied at true frequencies.
inline dtmf::SinusoidSum enrich_for_axis(const dtmf::SinusoidSum& tone_sig, const SensorModel& model,
                                         int axis, const std::vector<double>& phases) {
    dtmf::SinusoidSum out;
    out.duration_s = tone_sig.duration_s;
    std::size_t pi = 0;
    const auto& resp = model.axes[static_cast<std::size_t>(axis)];
    for (const auto& c : tone_sig.components) {
        out.components.push_back({c.frequency_hz, c.amplitude * resp.gain(c.frequency_hz), phases[pi++]});
        for (const auto& [k, hg] : model.harmonic_gains) {
            const double hf = static_cast<double>(k) * c.frequency_hz;
            out.components.push_back({hf, c.amplitude * hg * resp.gain(hf), phases[pi++]});
        }
    }
    return out;
}

inline Recording leak(const dtmf::SinusoidSum& tone_sig, dtmf::ToneId label, const SensorModel& model,
                      std::uint64_t per_recording_seed) {
    const auto n = static_cast<std::size_t>(std::llround(tone_sig.duration_s * model.cfg.actual_rate_hz));
    if (n < 1) throw std::invalid_argument("leak: duration too short for one sample");

    Rng rng(per_recording_seed);
    // One phase per enriched component, shared across axes (one acoustic source).
    const std::size_t ncomp = tone_sig.components.size() * (1 + model.harmonic_gains.size());
    std::vector<double> phases(ncomp);
    for (auto& p : phases) p = rng.uniform(0.0, 2.0 * M_PI);

    Recording rec{label, {}, model.preset_name, per_recording_seed, tone_sig.duration_s};
    for (int a = 0; a < kAxisCount; ++a) {
        const auto enriched = enrich_for_axis(tone_sig, model, a, phases);
        rec.axes[static_cast<std::size_t>(a)] = sampling::sample_signal(enriched, model.cfg, n);
        const double sd = model.noise_std[static_cast<std::size_t>(a)];
        if (sd > 0.0)
            for (auto& s : rec.axes[static_cast<std::size_t>(a)].samples) s += sd * rng.gaussian();
    }
    return rec;
}

// Tone playback protocol: reps recordings per tone in a seed-randomized
// order, stratified 80/20 train/test split with equal per-tone test counts.
inline Dataset generate_dataset(const SensorModel& model, std::size_t reps_per_tone, double duration_s,
                                std::uint64_t master_seed) {
    if (reps_per_tone < 1) throw std::invalid_argument("generate_dataset: reps_per_tone must be >= 1");
    std::vector<dtmf::ToneId> order;
    order.reserve(16 * reps_per_tone);
    for (auto t : dtmf::ToneId::all())
        for (std::size_t r = 0; r < reps_per_tone; ++r) order.push_back(t);
    Rng shuffler(derive_seed(master_seed, 0xd5));
    shuffler.shuffle(order);

    Dataset ds;
    ds.recordings.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto sig = dtmf::synthesize_tone(order[i], duration_s, 1.0);
        ds.recordings.push_back(leak(sig, order[i], model, derive_seed(master_seed, i + 1)));
    }

    // Stratified split: last 20% of each tone's recordings (in generation
    // order, itself randomized) go to test.
    const std::size_t test_per_tone = reps_per_tone / 5;
    std::array<std::size_t, 16> seen{};
    for (std::size_t i = 0; i < ds.recordings.size(); ++i) {
        const auto cls = static_cast<std::size_t>(ds.recordings[i].label.index());
        if (seen[cls]++ < reps_per_tone - test_per_tone)
            ds.train_indices.push_back(i);
        else
            ds.test_indices.push_back(i);
    }
    return ds;
}

// Named presets. The "resonant" preset retries its internal seed until at
// least two axes differ by >= 2x in gain at some touchtone frequency.
inline SensorModel make_default_model(const std::string& profile, std::uint64_t seed,
                                      double rate_hz = 400.0) {
    SensorModel m{{}, {}, {{2, 0.3}, {3, 0.1}}, sampling::SamplingConfig(rate_hz), seed, profile};
    for (auto& a : m.axes) a = AxisResponse::flat();

    if (profile == "flat") {
        m.noise_std.fill(0.01);
        return m;
    }
    if (profile != "resonant" && profile != "noisy")
        throw std::invalid_argument("make_default_model: unknown profile " + profile);

    m.noise_std.fill(profile == "noisy" ? 0.5 : 0.05);

    std::vector<double> probe;
    for (double f : dtmf::kRowHz) probe.push_back(f);
    for (double f : dtmf::kColHz) probe.push_back(f);

    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(derive_seed(seed, 0xa11 + attempt));
        for (auto& axis : m.axes) {
            axis = AxisResponse::flat();
            const int npeaks = rng.uniform_int(1, 3);
            for (int p = 0; p < npeaks; ++p)
                axis.peaks.push_back({rng.uniform(50.0, 2000.0), rng.uniform(1.0, 5.0),
                                      rng.uniform(100.0, 400.0)});
        }
        bool complementary = false;
        for (double f : probe) {
            for (int a = 0; a < kAxisCount && !complementary; ++a)
                for (int b = a + 1; b < kAxisCount; ++b) {
                    const double ga = m.axes[static_cast<std::size_t>(a)].gain(f);
                    const double gb = m.axes[static_cast<std::size_t>(b)].gain(f);
                    if (std::max(ga, gb) >= 2.0 * std::min(ga, gb)) {
                        complementary = true;
                        break;
                    }
                }
            if (complementary) break;
        }
        if (complementary) return m;
    }
}

}  // namespace toneleak::sensor_sim
