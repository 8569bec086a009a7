// The 16-symbol touchtone alphabet and continuous-time tone synthesis.
//
// Each key press emits two simultaneous sinusoids, one from the low (row)
// group and one from the high (column) group. Tones are modeled as exact
// sums of sinusoids so downstream sampling can evaluate them at arbitrary
// time instants.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace toneleak::dtmf {

inline constexpr std::array<double, 4> kRowHz = {697.0, 770.0, 852.0, 941.0};
inline constexpr std::array<double, 4> kColHz = {1209.0, 1336.0, 1477.0, 1633.0};

// Row-major keypad order: rows top to bottom, columns left to right.
inline constexpr std::array<char, 16> kSymbols = {
    '1', '2', '3', 'A',
    '4', '5', '6', 'B',
    '7', '8', '9', 'C',
    '*', '0', '#', 'D'};

class ToneId {
public:
    constexpr explicit ToneId(int index) : index_(index) {
        if (index < 0 || index > 15) throw std::invalid_argument("ToneId index out of range");
    }

    static ToneId from_symbol(char symbol) {
        for (int i = 0; i < 16; ++i)
            if (kSymbols[static_cast<std::size_t>(i)] == symbol) return ToneId(i);
        throw std::invalid_argument(std::string("unknown touchtone symbol: ") + symbol);
    }

    static std::array<ToneId, 16> all() {
        std::array<ToneId, 16> out{ToneId(0), ToneId(1), ToneId(2), ToneId(3),
                                   ToneId(4), ToneId(5), ToneId(6), ToneId(7),
                                   ToneId(8), ToneId(9), ToneId(10), ToneId(11),
                                   ToneId(12), ToneId(13), ToneId(14), ToneId(15)};
        return out;
    }

    constexpr int index() const { return index_; }
    constexpr int row() const { return index_ / 4; }
    constexpr int col() const { return index_ % 4; }
    char symbol() const { return kSymbols[static_cast<std::size_t>(index_)]; }

    auto operator<=>(const ToneId&) const = default;

private:
    int index_;
};

// (row Hz, col Hz) for a tone
inline std::pair<double, double> tone_frequencies(ToneId tone) {
    return {kRowHz[static_cast<std::size_t>(tone.row())],
            kColHz[static_cast<std::size_t>(tone.col())]};
}

inline nlohmann::json tone_table_json() {
    nlohmann::json j = nlohmann::json::object();
    for (ToneId t : ToneId::all()) {
        auto [lo, hi] = tone_frequencies(t);
        j[std::string(1, t.symbol())] = {lo, hi};
    }
    return j;
}

struct SinusoidComponent {
    double frequency_hz;
    double amplitude;
    double phase_rad;
};

// Continuous-time signal model: a finite sum of sinusoids, exactly
// evaluable at any time instant.
struct SinusoidSum {
    std::vector<SinusoidComponent> components;
    double duration_s = 0.0;

    double eval(double t) const {
        double v = 0.0;
        for (const auto& c : components)
            v += c.amplitude * std::sin(2.0 * M_PI * c.frequency_hz * t + c.phase_rad);
        return v;
    }
};

// Two components at the tone's (row, col) frequencies, amplitude split
// equally, zero phase.
inline SinusoidSum synthesize_tone(ToneId tone, double duration_s, double amplitude) {
    if (duration_s <= 0.0) throw std::invalid_argument("synthesize_tone: duration must be > 0");
    if (amplitude <= 0.0) throw std::invalid_argument("synthesize_tone: amplitude must be > 0");
    auto [lo, hi] = tone_frequencies(tone);
    SinusoidSum s;
    s.duration_s = duration_s;
    s.components = {{lo, amplitude / 2.0, 0.0}, {hi, amplitude / 2.0, 0.0}};
    return s;
}

// Oracle decoder: the unique tone whose row and col frequencies both match
// within tol. Throws if two tones match (only possible for large tol).
inline std::optional<ToneId> classify_frequency_pair(double f1, double f2, double tol) {
    if (tol < 0.0) throw std::invalid_argument("classify_frequency_pair: tol must be >= 0");
    std::optional<ToneId> found;
    for (ToneId t : ToneId::all()) {
        auto [lo, hi] = tone_frequencies(t);
        const bool direct = std::abs(f1 - lo) <= tol && std::abs(f2 - hi) <= tol;
        const bool swapped = std::abs(f2 - lo) <= tol && std::abs(f1 - hi) <= tol;
        if (direct || swapped) {
            if (found && *found != t)
                throw std::runtime_error("classify_frequency_pair: ambiguous match");
            found = t;
        }
    }
    return found;
}

}  // namespace toneleak::dtmf
