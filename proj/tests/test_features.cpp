#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"

#include "toneleak/features.hpp"
#include "toneleak/rng.hpp"
#include "toneleak/sensor_sim.hpp"

using namespace toneleak;
using namespace toneleak::features;

namespace {

// Naive direct-formula oracles, independent of the implementation path.
namespace oracle {

double mean(const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double moment(const std::vector<double>& x, int k) {
    const double mu = mean(x);
    double s = 0;
    for (double v : x) s += std::pow(v - mu, k);
    return s / static_cast<double>(x.size());
}

double quantile(std::vector<double> x, double q) {
    std::sort(x.begin(), x.end());
    const double pos = q * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

// hand-rolled DFT, written without reference to spectrum.hpp
std::vector<double> one_sided_mags(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> mags(n / 2 + 1);
    for (std::size_t k = 0; k < mags.size(); ++k) {
        double re = 0, im = 0;
        for (std::size_t j = 0; j < n; ++j) {
            re += x[j] * std::cos(2.0 * M_PI * k * j / n);
            im -= x[j] * std::sin(2.0 * M_PI * k * j / n);
        }
        mags[k] = std::hypot(re, im);
    }
    return mags;
}

double spectral_entropy(const std::vector<double>& x) {
    auto mags = one_sided_mags(x);
    double total = 0;
    for (double m : mags) total += m * m;
    if (total == 0) return 0;
    double h = 0;
    for (double m : mags) {
        const double p = m * m / total;
        if (p > 0) h -= p * std::log(p);
    }
    return h;
}

}  // namespace oracle

// Feature indices in the fixed order emitted by frame_features.
enum Stat {
    kMean = 0, kMedian, kKurtosis, kAbsArea, kPctCrossings, kMin, kVariance, kPower,
    kStd, kIqr, kRange, kMax, kVariation, kSpectralEntropy, kSkew, kQ1, kQ2, kQ3, kFft0
};

}  // namespace

TEST_CASE("frame counts from windowing") {
    WindowingParams p{50, 5};
    CHECK(frames_per_axis(200, p) == 31);
    CHECK(frames_per_axis(50, p) == 1);
    CHECK_THROWS(frames_per_axis(49, p));
    CHECK_THROWS_AS(WindowingParams(1, 1), std::invalid_argument);
    CHECK_THROWS_AS(WindowingParams(50, 51), std::invalid_argument);
}

TEST_CASE("constant frame identities") {
    std::vector<double> frame(50, 1.0);
    auto f = frame_features(frame, 400.0);
    REQUIRE(f.size() == features_per_frame(50));
    CHECK(f[kMean] == doctest::Approx(1.0));
    CHECK(f[kVariance] == 0.0);
    CHECK(f[kKurtosis] == 0.0);
    CHECK(f[kSkew] == 0.0);
    CHECK(f[kPctCrossings] == 0.0);
    CHECK(f[kVariation] == 0.0);
    CHECK(f[kFft0] == doctest::Approx(50.0));  // DC bin magnitude = N * 1
    for (std::size_t i = kFft0 + 1; i < f.size(); ++i) CHECK(f[i] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("bin-aligned sinusoid has near-zero spectral entropy contribution") {
    std::vector<double> frame(64);
    for (std::size_t i = 0; i < frame.size(); ++i)
        frame[i] = std::sin(2.0 * M_PI * 8.0 * static_cast<double>(i) / 64.0);
    auto f = frame_features(frame, 400.0);
    // single dominant bin -> entropy near 0
    CHECK(f[kSpectralEntropy] < 0.01);
    auto mags = std::vector<double>(f.begin() + kFft0, f.end());
    const auto peak = static_cast<std::size_t>(std::max_element(mags.begin(), mags.end()) - mags.begin());
    CHECK(peak == 8);
}

TEST_CASE("negation symmetry") {
    Rng rng(5);
    std::vector<double> frame(50), neg(50);
    for (std::size_t i = 0; i < 50; ++i) {
        frame[i] = rng.gaussian();
        neg[i] = -frame[i];
    }
    auto a = frame_features(frame, 400.0);
    auto b = frame_features(neg, 400.0);
    CHECK(a[kVariance] == doctest::Approx(b[kVariance]).epsilon(1e-12));
    CHECK(a[kStd] == doctest::Approx(b[kStd]).epsilon(1e-12));
    CHECK(a[kPower] == doctest::Approx(b[kPower]).epsilon(1e-12));
    CHECK(a[kMean] == doctest::Approx(-b[kMean]).epsilon(1e-12));
}

TEST_CASE("statistics match naive oracles on 100 random frames") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(10, 120));
        std::vector<double> frame(n);
        for (auto& v : frame) v = rng.uniform(-3.0, 3.0) + rng.gaussian();
        const double rate = rng.uniform(100.0, 1000.0);
        auto f = frame_features(frame, rate);

        const double mu = oracle::mean(frame);
        const double var = oracle::moment(frame, 2);
        const double sd = std::sqrt(var);
        CHECK(f[kMean] == doctest::Approx(mu).epsilon(1e-9));
        CHECK(f[kVariance] == doctest::Approx(var).epsilon(1e-9));
        CHECK(f[kStd] == doctest::Approx(sd).epsilon(1e-9));
        CHECK(f[kSkew] == doctest::Approx(oracle::moment(frame, 3) / (sd * sd * sd)).epsilon(1e-9));
        CHECK(f[kKurtosis] == doctest::Approx(oracle::moment(frame, 4) / (var * var) - 3.0).epsilon(1e-9));
        CHECK(f[kQ1] == doctest::Approx(oracle::quantile(frame, 0.25)).epsilon(1e-9));
        CHECK(f[kQ2] == doctest::Approx(oracle::quantile(frame, 0.50)).epsilon(1e-9));
        CHECK(f[kMedian] == doctest::Approx(oracle::quantile(frame, 0.50)).epsilon(1e-9));
        CHECK(f[kQ3] == doctest::Approx(oracle::quantile(frame, 0.75)).epsilon(1e-9));
        CHECK(f[kIqr] == doctest::Approx(f[kQ3] - f[kQ1]).epsilon(1e-12));
        CHECK(f[kMin] == *std::min_element(frame.begin(), frame.end()));
        CHECK(f[kMax] == *std::max_element(frame.begin(), frame.end()));
        CHECK(f[kRange] == doctest::Approx(f[kMax] - f[kMin]).epsilon(1e-12));

        double abs_sum = 0, sq = 0;
        for (double v : frame) {
            abs_sum += std::abs(v);
            sq += v * v;
        }
        CHECK(f[kAbsArea] == doctest::Approx(abs_sum / rate).epsilon(1e-9));
        CHECK(f[kPower] == doctest::Approx(sq / static_cast<double>(n)).epsilon(1e-9));
        CHECK(f[kVariation] == doctest::Approx(sd / std::abs(mu)).epsilon(1e-9));

        std::size_t crossings = 0;
        for (std::size_t i = 0; i + 1 < n; ++i)
            if ((frame[i] - mu) * (frame[i + 1] - mu) < 0) ++crossings;
        CHECK(f[kPctCrossings] ==
              doctest::Approx(static_cast<double>(crossings) / static_cast<double>(n - 1)).epsilon(1e-12));

        CHECK(f[kSpectralEntropy] == doctest::Approx(oracle::spectral_entropy(frame)).epsilon(1e-9));

        auto mags = oracle::one_sided_mags(frame);
        for (std::size_t k = 0; k < mags.size(); ++k)
            CHECK(f[kFft0 + k] == doctest::Approx(mags[k]).epsilon(1e-7));
    }
}

TEST_CASE("Parseval: time energy equals (1/N) sum of squared DFT magnitudes") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(16, 200));
        std::vector<double> x(n);
        for (auto& v : x) v = rng.gaussian();
        double time_energy = 0;
        for (double v : x) time_energy += v * v;
        const auto spec = spectrum::dft(x);
        double freq_energy = 0;
        for (const auto& c : spec) freq_energy += std::norm(c);
        freq_energy /= static_cast<double>(n);
        CHECK(freq_energy == doctest::Approx(time_energy).epsilon(1e-6));
    }
}

TEST_CASE("extract: layout, padding, determinism") {
    auto model = sensor_sim::make_default_model("flat", 2);
    auto sig = dtmf::synthesize_tone(dtmf::ToneId::from_symbol('5'), 0.5, 1.0);
    auto rec = sensor_sim::leak(sig, dtmf::ToneId::from_symbol('5'), model, 7);
    WindowingParams p{50, 5};

    const std::size_t natural6 = natural_length(rec.axes[0].samples.size(), 6, p);
    auto fv = extract(rec, {0, 1, 2, 3, 4, 5}, p, natural6);
    CHECK(fv.values.size() == natural6);
    CHECK(fv.label == dtmf::ToneId::from_symbol('5').index());

    // determinism
    auto fv2 = extract(rec, {0, 1, 2, 3, 4, 5}, p, natural6);
    CHECK(fv.values == fv2.values);

    // more axes means strictly longer natural vector
    const std::size_t n1 = natural_length(rec.axes[0].samples.size(), 1, p);
    auto one = extract(rec, {0}, p, n1);
    auto two = extract(rec, {0, 4}, p, 2 * n1);
    CHECK(two.values.size() == 2 * one.values.size());

    // padding fills the tail with zeros
    auto padded = extract(rec, {0}, p, n1 + 10);
    for (std::size_t i = n1; i < padded.values.size(); ++i) CHECK(padded.values[i] == 0.0);

    // overlong input fails loudly
    CHECK_THROWS_AS(extract(rec, {0, 1}, p, n1), std::length_error);
}

TEST_CASE("windows align across axes") {
    auto model = sensor_sim::make_default_model("flat", 2);
    auto sig = dtmf::synthesize_tone(dtmf::ToneId::from_symbol('1'), 0.5, 1.0);
    auto rec = sensor_sim::leak(sig, dtmf::ToneId::from_symbol('1'), model, 8);
    WindowingParams p{50, 5};
    auto framed = align_and_window(rec, {0, 3}, p);
    REQUIRE(framed.size() == 2);
    CHECK(framed[0].size() == framed[1].size());
    CHECK(framed[0][0].size() == 50);
    // frame i covers [i*step, i*step+size)
    CHECK(framed[0][2][0] == rec.axes[0].samples[10]);
    CHECK(framed[1][2][0] == rec.axes[3].samples[10]);
}
