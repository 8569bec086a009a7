// Small spectral helpers: DFT (radix-2 FFT for power-of-two lengths,
// direct evaluation otherwise), one-sided magnitude spectra and peak lookup.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace toneleak::spectrum {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline std::vector<std::complex<double>> dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    if (n == 0) return out;
    if (is_pow2(n)) {
        for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
        fft_radix2(out);
        return out;
    }
    for (std::size_t k = 0; k < n; ++k) {
        double re = 0.0, im = 0.0;
        const double w = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = w * static_cast<double>(j);
            re += x[j] * std::cos(ang);
            im += x[j] * std::sin(ang);
        }
        out[k] = {re, im};
    }
    return out;
}

// Unnormalized one-sided magnitudes, floor(n/2)+1 bins including DC.
inline std::vector<double> one_sided_magnitude(const std::vector<double>& x) {
    const auto spec = dft(x);
    std::vector<double> mags(x.size() / 2 + 1);
    for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(spec[k]);
    return mags;
}

// Frequency of the largest one-sided magnitude bin, DC excluded when
// skip_dc is set.
inline double dominant_frequency(const std::vector<double>& x, double rate_hz, bool skip_dc = true) {
    const auto mags = one_sided_magnitude(x);
    std::size_t best = skip_dc ? 1 : 0;
    for (std::size_t k = best; k < mags.size(); ++k)
        if (mags[k] > mags[best]) best = k;
    return static_cast<double>(best) * rate_hz / static_cast<double>(x.size());
}

inline double bin_width(std::size_t n, double rate_hz) { return rate_hz / static_cast<double>(n); }

// Magnitude at a single frequency via direct projection (Goertzel-style),
// returns the amplitude of a sinusoid at f estimated over the window.
inline double amplitude_at(const std::vector<double>& x, double rate_hz, double f) {
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double ang = 2.0 * M_PI * f * static_cast<double>(j) / rate_hz;
        re += x[j] * std::cos(ang);
        im += x[j] * std::sin(ang);
    }
    const double n = static_cast<double>(x.size());
    return 2.0 * std::sqrt(re * re + im * im) / n;
}

}  // namespace toneleak::spectrum
