// Windowed per-axis statistical and spectral features.
//
// Each selected axis is cut into overlapping frames; per frame we compute a
// fixed-order statistics block followed by the one-sided FFT magnitudes,
// then concatenate (axis, window, feature) and zero-pad to a fixed length.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "toneleak/sensor_sim.hpp"
#include "toneleak/spectrum.hpp"

namespace toneleak::features {

struct WindowingParams {
    std::size_t frame_size = 50;
    std::size_t frame_step = 5;

    WindowingParams(std::size_t size, std::size_t step) : frame_size(size), frame_step(step) {
        if (size < 2) throw std::invalid_argument("WindowingParams: frame_size must be >= 2");
        if (step < 1 || step > size)
            throw std::invalid_argument("WindowingParams: frame_step must be in [1, frame_size]");
    }
    WindowingParams() = default;
};

struct FeatureVector {
    std::vector<double> values;
    int label = -1;  // tone index, -1 when unknown
};

inline constexpr std::size_t kStatCount = 18;

inline std::size_t features_per_frame(std::size_t frame_size) {
    return kStatCount + frame_size / 2 + 1;
}

inline std::size_t frames_per_axis(std::size_t n_samples, const WindowingParams& p) {
    if (n_samples < p.frame_size) throw std::invalid_argument("recording shorter than one frame");
    return (n_samples - p.frame_size) / p.frame_step + 1;
}

// Frames for each selected axis; frame i covers [i*step, i*step + size).
inline std::vector<std::vector<std::vector<double>>> align_and_window(
    const sensor_sim::Recording& rec, const std::vector<int>& axes, const WindowingParams& p) {
    std::vector<std::vector<std::vector<double>>> out;
    for (int a : axes) {
        const auto& s = rec.axes[static_cast<std::size_t>(a)].samples;
        const std::size_t nframes = frames_per_axis(s.size(), p);
        std::vector<std::vector<double>> frames;
        frames.reserve(nframes);
        for (std::size_t i = 0; i < nframes; ++i)
            frames.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(i * p.frame_step),
                                s.begin() + static_cast<std::ptrdiff_t>(i * p.frame_step + p.frame_size));
        out.push_back(std::move(frames));
    }
    return out;
}

// Linear interpolation between order statistics of a sorted vector.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Fixed feature order: mean, median, kurtosis, absolute area, % mean
// crossings, min, variance, signal power, std, IQR, range, max, variation,
// spectral entropy, skew, Q1, Q2, Q3, then one-sided FFT magnitudes.
inline std::vector<double> frame_features(const std::vector<double>& frame, double rate_hz) {
    if (frame.size() < 2) throw std::invalid_argument("frame_features: frame length must be >= 2");
    const double n = static_cast<double>(frame.size());

    const double mean = std::accumulate(frame.begin(), frame.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, abs_sum = 0.0, sq_sum = 0.0;
    for (double x : frame) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        abs_sum += std::abs(x);
        sq_sum += x * x;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double variance = m2;
    const double stdev = std::sqrt(variance);
    const double kurtosis = variance > 0.0 ? m4 / (variance * variance) - 3.0 : 0.0;
    const double skew = variance > 0.0 ? m3 / (stdev * stdev * stdev) : 0.0;
    const double abs_area = abs_sum / rate_hz;
    const double power = sq_sum / n;
    const double variation = std::abs(mean) < 1e-12 ? 0.0 : stdev / std::abs(mean);

    std::size_t crossings = 0;
    for (std::size_t i = 0; i + 1 < frame.size(); ++i)
        if ((frame[i] - mean) * (frame[i + 1] - mean) < 0.0) ++crossings;
    const double pct_crossings = static_cast<double>(crossings) / (n - 1.0);

    std::vector<double> sorted = frame;
    std::sort(sorted.begin(), sorted.end());
    const double q1 = quantile_sorted(sorted, 0.25);
    const double q2 = quantile_sorted(sorted, 0.50);
    const double q3 = quantile_sorted(sorted, 0.75);

    const auto mags = spectrum::one_sided_magnitude(frame);

    // Shannon entropy (natural log) of the normalized one-sided power
    // spectrum, DC included; all-zero frame gives 0.
    double ptotal = 0.0;
    for (double m : mags) ptotal += m * m;
    double entropy = 0.0;
    if (ptotal > 0.0)
        for (double m : mags) {
            const double pk = m * m / ptotal;
            if (pk > 0.0) entropy -= pk * std::log(pk);
        }

    std::vector<double> out;
    out.reserve(kStatCount + mags.size());
    out.insert(out.end(), {mean, q2, kurtosis, abs_area, pct_crossings, sorted.front(), variance,
                           power, stdev, q3 - q1, sorted.back() - sorted.front(), sorted.back(),
                           variation, entropy, skew, q1, q2, q3});
    out.insert(out.end(), mags.begin(), mags.end());
    return out;
}

// Per-axis per-window features in fixed (axis, window, feature) order,
// zero-padded to target_len. Throws if the natural length exceeds target_len.
inline FeatureVector extract(const sensor_sim::Recording& rec, const std::vector<int>& axes,
                             const WindowingParams& p, std::size_t target_len) {
    FeatureVector fv;
    fv.label = rec.label.index();
    const auto framed = align_and_window(rec, axes, p);
    const double rate = rec.axes[0].rate_hz;
    for (const auto& axis_frames : framed)
        for (const auto& frame : axis_frames) {
            const auto f = frame_features(frame, rate);
            fv.values.insert(fv.values.end(), f.begin(), f.end());
        }
    if (fv.values.size() > target_len)
        throw std::length_error("extract: natural feature length exceeds target_len");
    fv.values.resize(target_len, 0.0);
    return fv;
}

// Natural (unpadded) length for a recording with n_samples per axis.
inline std::size_t natural_length(std::size_t n_samples, std::size_t n_axes, const WindowingParams& p) {
    return n_axes * frames_per_axis(n_samples, p) * features_per_frame(p.frame_size);
}

}  // namespace toneleak::features
