// Aliasing math and the discrete sampling primitive.
//
// Sampling is exact point evaluation of the continuous model, so aliasing
// is emergent: a component above the Nyquist frequency folds to
// |2m*f_N - f| for the integer m that lands it in [0, f_N].
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "toneleak/dtmf.hpp"

namespace toneleak::sampling {

struct SamplingConfig {
    double nominal_rate_hz;
    double actual_rate_hz;

    SamplingConfig(double nominal, double actual) : nominal_rate_hz(nominal), actual_rate_hz(actual) {
        if (actual <= 0.0) throw std::invalid_argument("SamplingConfig: actual rate must be > 0");
        if (std::abs(actual - nominal) / nominal > 0.1)
            throw std::invalid_argument("SamplingConfig: actual rate deviates >10% from nominal");
    }
    explicit SamplingConfig(double rate) : SamplingConfig(rate, rate) {}

    double nyquist_hz() const { return actual_rate_hz / 2.0; }
};

struct DiscreteSignal {
    std::vector<double> samples;
    double rate_hz = 0.0;
    double start_time_s = 0.0;
};

// Fold f into [0, f_s/2].
inline double alias_frequency(double f, double f_s) {
    if (f < 0.0) throw std::invalid_argument("alias_frequency: f must be >= 0");
    if (f_s <= 0.0) throw std::invalid_argument("alias_frequency: f_s must be > 0");
    double r = std::fmod(f, f_s);
    if (r > f_s / 2.0) r = f_s - r;
    return r;
}

inline std::vector<double> alias_set(const std::vector<double>& freqs, double f_s) {
    std::vector<double> out;
    out.reserve(freqs.size());
    for (double f : freqs) out.push_back(alias_frequency(f, f_s));
    return out;
}

inline DiscreteSignal sample_signal(const dtmf::SinusoidSum& sig, const SamplingConfig& cfg, std::size_t n) {
    if (n < 1) throw std::invalid_argument("sample_signal: need n >= 1");
    DiscreteSignal out;
    out.rate_hz = cfg.actual_rate_hz;
    out.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        out.samples[k] = sig.eval(static_cast<double>(k) / cfg.actual_rate_hz);
    return out;
}

// Keep samples 0, n, 2n, ...; no prefiltering.
inline DiscreteSignal decimate(const DiscreteSignal& sig, std::size_t n) {
    if (n < 1) throw std::invalid_argument("decimate: factor must be >= 1");
    DiscreteSignal out;
    out.rate_hz = sig.rate_hz / static_cast<double>(n);
    out.start_time_s = sig.start_time_s;
    out.samples.reserve((sig.samples.size() + n - 1) / n);
    for (std::size_t i = 0; i < sig.samples.size(); i += n) out.samples.push_back(sig.samples[i]);
    return out;
}

}  // namespace toneleak::sampling
