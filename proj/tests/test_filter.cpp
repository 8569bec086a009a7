#include <cmath>

#include "doctest.h"

#include "toneleak/filter.hpp"
#include "toneleak/rng.hpp"
#include "toneleak/sensor_sim.hpp"
#include "toneleak/spectrum.hpp"

using namespace toneleak;
using namespace toneleak::mitigation;

namespace {

// Steady-state gain of a filter for a sinusoid at f: feed a long sinusoid,
// measure the output amplitude over the second half by projection.
double measured_gain(const FilterSpec& spec, double f, double rate, double seconds = 4.0) {
    const auto n = static_cast<std::size_t>(rate * seconds);
    sampling::DiscreteSignal sig;
    sig.rate_hz = rate;
    sig.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        sig.samples[k] = std::sin(2.0 * M_PI * f * static_cast<double>(k) / rate);
    auto out = apply_filter(spec, sig);
    std::vector<double> tail(out.samples.begin() + static_cast<std::ptrdiff_t>(n / 2), out.samples.end());
    return spectrum::amplitude_at(tail, rate, f);
}

double analytic_butterworth(double f, double f_c, int order) {
    return 1.0 / std::sqrt(1.0 + std::pow(f / f_c, 2.0 * order));
}

}  // namespace

TEST_CASE("butterworth: -3 dB point, DC gain, stability") {
    for (int order : {2, 5, 8}) {
        for (double fc : {40.0, 100.0, 180.0}) {
            auto spec = butterworth_lowpass(order, fc, 400.0);
            CHECK(spec.stable());
            CHECK(spec.magnitude(0.0) == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(spec.magnitude(fc) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.01));
            CHECK(spec.sections.size() == static_cast<std::size_t>((order + 1) / 2));
        }
    }
    CHECK_THROWS_AS(butterworth_lowpass(5, 200.0, 400.0), std::invalid_argument);
    CHECK_THROWS_AS(butterworth_lowpass(5, 0.0, 400.0), std::invalid_argument);
    CHECK_THROWS_AS(butterworth_lowpass(0, 50.0, 400.0), std::invalid_argument);
}

TEST_CASE("butterworth magnitude is monotone non-increasing") {
    for (int order : {2, 5, 8}) {
        auto spec = butterworth_lowpass(order, 100.0, 400.0);
        double prev = spec.magnitude(0.0);
        for (int i = 1; i <= 512; ++i) {
            const double f = 200.0 * i / 512.0;
            const double m = spec.magnitude(f);
            CHECK(m <= prev + 1e-12);
            prev = m;
        }
    }
}

TEST_CASE("order-8 attenuation ratio exceeds the analytic octave bound") {
    auto spec = butterworth_lowpass(8, 180.0, 1600.0);
    const double ratio = spec.magnitude(180.0) / spec.magnitude(360.0);
    // analytic octave ratio 2^8/sqrt(2); the bilinear transform attenuates
    // more in the stopband, never less than 20% under the analytic value
    CHECK(ratio >= std::pow(2.0, 8) / std::sqrt(2.0) * 0.8);
}

TEST_CASE("measured steady-state gains match the analytic magnitude in the passband") {
    for (int order : {2, 5, 8})
        for (double fc : {40.0, 100.0, 180.0})
            for (double rate : {400.0, 1600.0}) {
                auto spec = butterworth_lowpass(order, fc, rate);
                for (double frac : {0.25, 0.5, 1.0}) {
                    const double f = frac * fc;
                    CHECK(measured_gain(spec, f, rate) ==
                          doctest::Approx(analytic_butterworth(f, fc, order)).epsilon(0.05));
                }
            }
}

TEST_CASE("apply_filter basics") {
    auto spec = butterworth_lowpass(5, 100.0, 400.0);

    sampling::DiscreteSignal zeros{std::vector<double>(256, 0.0), 400.0, 0.0};
    for (double v : apply_filter(spec, zeros).samples) CHECK(v == 0.0);

    sampling::DiscreteSignal dc{std::vector<double>(2000, 1.0), 400.0, 0.0};
    auto out = apply_filter(spec, dc);
    CHECK(out.samples.size() == dc.samples.size());
    CHECK(out.samples.back() == doctest::Approx(1.0).epsilon(1e-3));

    sampling::DiscreteSignal wrong_rate{std::vector<double>(16, 0.0), 800.0, 0.0};
    CHECK_THROWS_AS(apply_filter(spec, wrong_rate), std::invalid_argument);
}

TEST_CASE("170 Hz sinusoid through a 40 Hz lowpass matches the digital analytic gain") {
    auto spec = butterworth_lowpass(5, 40.0, 400.0);
    // oracle: analytic magnitude of the bilinear-transformed design,
    // (1 + (tan(pi f/fs)/tan(pi fc/fs))^(2N))^(-1/2)
    const double warp = std::tan(M_PI * 170.0 / 400.0) / std::tan(M_PI * 40.0 / 400.0);
    const double expected = 1.0 / std::sqrt(1.0 + std::pow(warp, 10.0));
    CHECK(measured_gain(spec, 170.0, 400.0, 8.0) == doctest::Approx(expected).epsilon(0.05));
    CHECK(spec.magnitude(170.0) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("filter impulse response decays (stability in the time domain)") {
    for (int order : {2, 5, 8}) {
        for (double fc : {40.0, 100.0}) {
            auto spec = butterworth_lowpass(order, fc, 400.0);
            // the slowest pole of a high-order design decays like
            // exp(-t * w_c * sin(pi/2N)), so leave a generous settle window
            const auto n = static_cast<std::size_t>(25.0 * 400.0 / fc) + 200;
            sampling::DiscreteSignal imp{std::vector<double>(n, 0.0), 400.0, 0.0};
            imp.samples[0] = 1.0;
            auto out = apply_filter(spec, imp);
            double peak = 0.0;
            for (double v : out.samples) peak = std::max(peak, std::abs(v));
            const auto settle = static_cast<std::size_t>(25.0 * 400.0 / fc);
            for (std::size_t i = settle; i < n; ++i) CHECK(std::abs(out.samples[i]) < 1e-6 * peak);
        }
    }
}

TEST_CASE("notch bank attenuates centers and passes elsewhere") {
    const std::vector<double> dtmf_freqs = {697, 770, 852, 941, 1209, 1336, 1477, 1633};
    const auto centers = sampling::alias_set(dtmf_freqs, 400.0);
    const double width = 6.0;
    auto spec = notch_bank(centers, width, 400.0);
    CHECK(spec.stable());
    for (double c : centers) CHECK(spec.magnitude(c) <= 0.1);
    CHECK(spec.magnitude(33.0) <= 0.1);

    // 250-point grid excluding center +- 2*width neighborhoods
    for (int i = 1; i < 250; ++i) {
        const double f = 200.0 * i / 250.0;
        bool near = false;
        for (double c : centers)
            if (std::abs(f - c) <= 2.0 * width) near = true;
        if (!near) CHECK(spec.magnitude(f) >= 0.9);
    }

    // empty bank is the identity
    auto id = notch_bank({}, 6.0, 400.0);
    CHECK(id.sections.empty());
    sampling::DiscreteSignal sig{{1, 2, 3, 4}, 400.0, 0.0};
    CHECK(apply_filter(id, sig).samples == sig.samples);

    CHECK_THROWS_AS(notch_bank({199.0}, 6.0, 400.0), std::invalid_argument);
    CHECK_THROWS_AS(notch_bank({1.0}, 6.0, 400.0), std::invalid_argument);
}

TEST_CASE("mitigations on recordings") {
    auto model = sensor_sim::make_default_model("flat", 3);
    auto sig = dtmf::synthesize_tone(dtmf::ToneId::from_symbol('5'), 0.5, 1.0);
    auto rec = sensor_sim::leak(sig, dtmf::ToneId::from_symbol('5'), model, 11);

    SUBCASE("downsample changes rate and preserves label") {
        auto d2 = mitigate_downsample(rec, 2);
        CHECK(d2.axes[0].rate_hz == 200.0);
        CHECK(d2.label == rec.label);
        auto d8 = mitigate_downsample(rec, 8);
        CHECK(d8.axes[0].rate_hz == 50.0);
        auto d1 = mitigate_downsample(rec, 1);
        CHECK(d1.axes[0].samples == rec.axes[0].samples);
    }

    SUBCASE("lowpass keeps the rate and attenuates per the design") {
        auto lp = mitigate_lowpass(rec, 100.0);
        CHECK(lp.axes[0].rate_hz == 400.0);
        CHECK(lp.axes[0].samples.size() == rec.axes[0].samples.size());

        // near-identity at a cutoff just under Nyquist
        auto nearid = mitigate_lowpass(rec, 199.9);
        double diff = 0.0, ref = 0.0;
        const auto& a = rec.axes[0].samples;
        const auto& b = nearid.axes[0].samples;
        for (std::size_t i = a.size() / 2; i < a.size(); ++i) {
            diff += (a[i] - b[i]) * (a[i] - b[i]);
            ref += a[i] * a[i];
        }
        CHECK(diff < 0.05 * ref);
    }

    SUBCASE("lowpass at 50 Hz leaves the 33 Hz alias nearly untouched") {
        // tone D has a component at 1633 Hz -> alias 33 Hz at 400 Hz sampling
        auto model0 = sensor_sim::make_default_model("flat", 3);
        model0.noise_std.fill(0.0);
        model0.harmonic_gains.clear();
        auto sigd = dtmf::synthesize_tone(dtmf::ToneId::from_symbol('D'), 2.56, 1.0);
        auto recd = sensor_sim::leak(sigd, dtmf::ToneId::from_symbol('D'), model0, 12);
        auto lp = mitigate_lowpass(recd, 50.0);
        const double before = spectrum::amplitude_at(recd.axes[0].samples, 400.0, 33.0);
        const double after = spectrum::amplitude_at(lp.axes[0].samples, 400.0, 33.0);
        CHECK(after / before > std::pow(10.0, -3.0 / 20.0));  // less than 3 dB loss
    }

    SUBCASE("antialias rejects non-integer rate ratios") {
        CHECK_THROWS_AS(mitigate_antialias(rec, 300.0, 100.0, 8), std::invalid_argument);
        CHECK_THROWS_AS(mitigate_antialias(rec, 400.0, 300.0, 8), std::invalid_argument);
    }
}

TEST_CASE("antialias attenuates what lowpass at the base rate cannot") {
    // tone D recorded at 1600 Hz: 941 Hz is above the cutoff and gets
    // removed by the oversampled filter before decimation, while 1633 Hz
    // aliases to 33 Hz already at 1600 Hz and slips through the passband.
    sensor_sim::SensorModel model{{}, {}, {}, sampling::SamplingConfig(1600.0), 0, "test"};
    for (auto& a : model.axes) a = sensor_sim::AxisResponse::flat();
    model.noise_std.fill(0.0);
    auto sig = dtmf::synthesize_tone(dtmf::ToneId::from_symbol('D'), 2.56, 1.0);
    auto rec = sensor_sim::leak(sig, dtmf::ToneId::from_symbol('D'), model, 21);

    auto aa = mitigate_antialias(rec, 400.0, 180.0, 8);
    CHECK(aa.axes[0].rate_hz == 400.0);

    // 941 Hz would alias to 141 Hz after plain decimation; the oversampled
    // filter removes it first
    auto plain = mitigate_downsample(rec, 4);
    const double plain141 = spectrum::amplitude_at(plain.axes[0].samples, 400.0, 141.0);
    const double aa141 = spectrum::amplitude_at(aa.axes[0].samples, 400.0, 141.0);
    CHECK(aa141 < plain141 * std::pow(10.0, -40.0 / 20.0));  // >= 40 dB down

    // alias(1633, 1600) = 33 Hz sits inside the passband and survives
    const double aa33 = spectrum::amplitude_at(aa.axes[0].samples, 400.0, 33.0);
    const double plain33 = spectrum::amplitude_at(plain.axes[0].samples, 400.0, 33.0);
    CHECK(aa33 > 0.7 * plain33);

    // a passband component is preserved within 5%
    dtmf::SinusoidSum pass;
    pass.duration_s = 2.56;
    pass.components = {{100.0, 1.0, 0.0}};
    auto prec = sensor_sim::leak(pass, dtmf::ToneId(0), model, 22);
    auto paa = mitigate_antialias(prec, 400.0, 180.0, 8);
    const double amp = spectrum::amplitude_at(
        std::vector<double>(paa.axes[0].samples.begin() + 200, paa.axes[0].samples.end()), 400.0, 100.0);
    CHECK(amp == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("plan_sampling_rate reproduces the planner table") {
    const std::vector<double> dtmf_freqs = {697, 770, 852, 941, 1209, 1336, 1477, 1633};
    auto plan = plan_sampling_rate(dtmf_freqs, 180.0, {400.0, 800.0, 1600.0});
    REQUIRE(plan.table.size() == 3);
    CHECK(plan.table[0].attenuable_count == 0);
    CHECK(plan.table[1].attenuable_count == 2);
    CHECK(plan.table[2].attenuable_count == 6);
    CHECK(plan.best_rate_hz == 1600.0);

    auto all = plan_sampling_rate(dtmf_freqs, 180.0, {4000.0});
    CHECK(all.table[0].attenuable_count == 8);

    auto empty = plan_sampling_rate({}, 180.0, {400.0, 800.0});
    for (const auto& e : empty.table) CHECK(e.attenuable_count == 0);
}

TEST_CASE("planner agrees with an exhaustive recount on random instances") {
    Rng rng(1234);
    for (int trial = 0; trial < 1000; ++trial) {
        const double fc = rng.uniform(10.0, 300.0);
        std::vector<double> sensitive(static_cast<std::size_t>(rng.uniform_int(1, 10)));
        for (auto& f : sensitive) f = rng.uniform(0.0, 5000.0);
        std::vector<double> candidates(static_cast<std::size_t>(rng.uniform_int(1, 5)));
        for (auto& c : candidates) c = rng.uniform(2.0 * fc + 1.0, 4000.0);

        auto plan = plan_sampling_rate(sensitive, fc, candidates);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            int recount = 0;
            for (double f : sensitive) {
                double best = f;
                for (int m = 0; m <= 64; ++m)
                    best = std::min(best, std::abs(2.0 * m * (candidates[i] / 2.0) - f));
                if (best > fc) ++recount;
            }
            CHECK(plan.table[i].attenuable_count == recount);
        }
    }
}
