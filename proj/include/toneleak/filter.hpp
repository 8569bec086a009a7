// IIR filter design and the four evaluated mitigations.
//
// Butterworth low-pass: analog prototype poles, cutoff pre-warping,
// bilinear transform, factored into second-order sections. Notch bank:
// biquad notches with Q = center/width. Mitigations operate per axis on
// whole recordings.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "toneleak/sampling.hpp"
#include "toneleak/sensor_sim.hpp"

namespace toneleak::mitigation {

struct Sos {
    double b0, b1, b2;  // numerator
    double a1, a2;      // denominator (a0 normalized to 1)
};

enum class FilterKind { lowpass, notch };

struct FilterSpec {
    std::vector<Sos> sections;
    FilterKind kind = FilterKind::lowpass;
    std::vector<double> cutoffs_hz;
    int order = 0;
    double design_rate_hz = 0.0;

    // |H(e^{j 2 pi f / rate})|
    double magnitude(double f) const {
        const double w = 2.0 * M_PI * f / design_rate_hz;
        const std::complex<double> z1 = std::polar(1.0, -w);
        const std::complex<double> z2 = z1 * z1;
        std::complex<double> h(1.0, 0.0);
        for (const auto& s : sections)
            h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
        return std::abs(h);
    }

    bool stable() const {
        for (const auto& s : sections) {
            // poles of z^2 + a1 z + a2 inside unit circle iff
            // |a2| < 1 and |a1| < 1 + a2
            if (!(std::abs(s.a2) < 1.0 && std::abs(s.a1) < 1.0 + s.a2)) return false;
        }
        return true;
    }
};

inline FilterSpec butterworth_lowpass(int order, double f_c, double rate) {
    if (order < 1 || order > 12) throw std::invalid_argument("butterworth_lowpass: order must be in [1,12]");
    if (!(f_c > 0.0 && f_c < rate / 2.0))
        throw std::invalid_argument("butterworth_lowpass: cutoff must be in (0, rate/2)");

    // Pre-warped analog cutoff; bilinear transform maps it back to f_c.
    const double warped = 2.0 * rate * std::tan(M_PI * f_c / rate);

    FilterSpec spec;
    spec.kind = FilterKind::lowpass;
    spec.cutoffs_hz = {f_c};
    spec.order = order;
    spec.design_rate_hz = rate;

    // Left-half-plane prototype poles, paired with their conjugates.
    for (int k = 0; k < order / 2; ++k) {
        const double theta = M_PI * (2.0 * k + 1.0) / (2.0 * order) + M_PI / 2.0;
        const std::complex<double> p = warped * std::polar(1.0, theta);
        const std::complex<double> zp = (1.0 + p / (2.0 * rate)) / (1.0 - p / (2.0 * rate));
        Sos s;
        s.a1 = -2.0 * zp.real();
        s.a2 = std::norm(zp);
        // both zeros at z = -1; gain normalized to unity at DC
        const double g = (1.0 + s.a1 + s.a2) / 4.0;
        s.b0 = g;
        s.b1 = 2.0 * g;
        s.b2 = g;
        spec.sections.push_back(s);
    }
    if (order % 2 == 1) {
        const double p = -warped;  // real pole
        const double zp = (1.0 + p / (2.0 * rate)) / (1.0 - p / (2.0 * rate));
        Sos s;
        s.a1 = -zp;
        s.a2 = 0.0;
        const double g = (1.0 + s.a1) / 2.0;
        s.b0 = g;
        s.b1 = g;
        s.b2 = 0.0;
        spec.sections.push_back(s);
    }
    return spec;
}

// Biquad notch bank, Q = center/width. Empty centers gives an identity filter.
inline FilterSpec notch_bank(const std::vector<double>& centers, double width, double rate) {
    FilterSpec spec;
    spec.kind = FilterKind::notch;
    spec.cutoffs_hz = centers;
    spec.order = static_cast<int>(2 * centers.size());
    spec.design_rate_hz = rate;
    for (double c : centers) {
        if (!(c - width / 2.0 > 0.0 && c + width / 2.0 < rate / 2.0))
            throw std::invalid_argument("notch_bank: center +- width/2 must lie inside (0, rate/2)");
        const double w0 = 2.0 * M_PI * c / rate;
        const double q = c / width;
        const double alpha = std::sin(w0) / (2.0 * q);
        const double a0 = 1.0 + alpha;
        Sos s;
        s.b0 = 1.0 / a0;
        s.b1 = -2.0 * std::cos(w0) / a0;
        s.b2 = 1.0 / a0;
        s.a1 = -2.0 * std::cos(w0) / a0;
        s.a2 = (1.0 - alpha) / a0;
        spec.sections.push_back(s);
    }
    return spec;
}

// Cascaded direct-form-II-transposed filtering, zero initial state.
inline sampling::DiscreteSignal apply_filter(const FilterSpec& spec, const sampling::DiscreteSignal& sig) {
    if (sig.rate_hz != spec.design_rate_hz)
        throw std::invalid_argument("apply_filter: signal rate does not match filter design rate");
    sampling::DiscreteSignal out = sig;
    for (const auto& s : spec.sections) {
        double s1 = 0.0, s2 = 0.0;
        for (auto& x : out.samples) {
            const double y = s.b0 * x + s1;
            s1 = s.b1 * x - s.a1 * y + s2;
            s2 = s.b2 * x - s.a2 * y;
            x = y;
        }
    }
    return out;
}

using sensor_sim::Recording;

inline Recording mitigate_downsample(const Recording& rec, std::size_t n) {
    Recording out = rec;
    for (auto& axis : out.axes) axis = sampling::decimate(axis, n);
    return out;
}

inline Recording mitigate_lowpass(const Recording& rec, double f_c, int order = 5) {
    const auto spec = butterworth_lowpass(order, f_c, rec.axes[0].rate_hz);
    Recording out = rec;
    for (auto& axis : out.axes) axis = apply_filter(spec, axis);
    return out;
}

// Oversampled anti-aliasing: low-pass at the oversampled rate, then decimate.
inline Recording mitigate_antialias(const Recording& rec, double target_rate, double f_c, int order) {
    const double rate = rec.axes[0].rate_hz;
    const double ratio = rate / target_rate;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(n)) > 1e-9 || n < 1)
        throw std::invalid_argument("mitigate_antialias: rate must be an integer multiple of target_rate");
    if (f_c > target_rate / 2.0)
        throw std::invalid_argument("mitigate_antialias: cutoff must be <= target_rate/2");
    const auto spec = butterworth_lowpass(order, f_c, rate);
    Recording out = rec;
    for (auto& axis : out.axes) axis = sampling::decimate(apply_filter(spec, axis), n);
    return out;
}

inline Recording mitigate_notch(const Recording& rec, const std::vector<double>& centers, double width) {
    const auto spec = notch_bank(centers, width, rec.axes[0].rate_hz);
    Recording out = rec;
    for (auto& axis : out.axes) axis = apply_filter(spec, axis);
    return out;
}

// One mitigation setting, as configured in the harness.
struct MitigationConfig {
    std::string kind = "none";  // none | downsample | lowpass | antialias | notch
    std::size_t factor = 1;        // downsample
    double cutoff_hz = 0.0;        // lowpass, antialias
    int order = 5;                 // lowpass, antialias
    double target_rate_hz = 0.0;   // antialias
    std::vector<double> notch_centers_hz;  // notch
    double notch_width_hz = 6.0;           // notch

    void validate() const {
        if (kind == "none") return;
        if (kind == "downsample") {
            if (factor < 1) throw std::invalid_argument("downsample: factor must be >= 1");
        } else if (kind == "lowpass") {
            if (cutoff_hz <= 0.0) throw std::invalid_argument("lowpass: cutoff must be > 0");
        } else if (kind == "antialias") {
            if (cutoff_hz <= 0.0 || target_rate_hz <= 0.0)
                throw std::invalid_argument("antialias: cutoff and target rate must be > 0");
        } else if (kind == "notch") {
            if (notch_width_hz <= 0.0) throw std::invalid_argument("notch: width must be > 0");
        } else {
            throw std::invalid_argument("unknown mitigation kind: " + kind);
        }
    }
};

inline Recording apply_mitigation(const Recording& rec, const MitigationConfig& cfg) {
    cfg.validate();
    if (cfg.kind == "none") return rec;
    if (cfg.kind == "downsample") return mitigate_downsample(rec, cfg.factor);
    if (cfg.kind == "lowpass") return mitigate_lowpass(rec, cfg.cutoff_hz, cfg.order);
    if (cfg.kind == "antialias")
        return mitigate_antialias(rec, cfg.target_rate_hz, cfg.cutoff_hz, cfg.order);
    return mitigate_notch(rec, cfg.notch_centers_hz, cfg.notch_width_hz);
}

// Delivered (unattenuated) bandwidth after the mitigation.
inline double delivered_bandwidth_hz(const MitigationConfig& cfg, double input_rate_hz) {
    if (cfg.kind == "downsample") return input_rate_hz / (2.0 * static_cast<double>(cfg.factor));
    if (cfg.kind == "lowpass" || cfg.kind == "antialias") return cfg.cutoff_hz;
    return input_rate_hz / 2.0;
}

struct RatePlanEntry {
    double candidate_rate_hz;
    int attenuable_count;
};

struct RatePlan {
    std::vector<RatePlanEntry> table;
    double best_rate_hz = 0.0;  // smallest candidate achieving the max count
};

// How many sensitive frequencies alias above f_c (and can therefore be
// attenuated by a low-pass at f_c) for each candidate sampling rate.
inline RatePlan plan_sampling_rate(const std::vector<double>& sensitive, double f_c,
                                   const std::vector<double>& candidates) {
    if (f_c < 0.0) throw std::invalid_argument("plan_sampling_rate: f_c must be >= 0");
    for (double f_s : candidates)
        if (!(f_s > 2.0 * f_c) || f_s <= 0.0)
            throw std::invalid_argument("plan_sampling_rate: candidates must exceed 2*f_c");
    RatePlan plan;
    for (double f_s : candidates) {
        int count = 0;
        for (double f : sensitive)
            if (sampling::alias_frequency(f, f_s) > f_c) ++count;
        plan.table.push_back({f_s, count});
    }
    int best_count = -1;
    for (const auto& e : plan.table) best_count = std::max(best_count, e.attenuable_count);
    for (const auto& e : plan.table)
        if (e.attenuable_count == best_count &&
            (plan.best_rate_hz == 0.0 || e.candidate_rate_hz < plan.best_rate_hz))
            plan.best_rate_hz = e.candidate_rate_hz;
    return plan;
}

}  // namespace toneleak::mitigation
