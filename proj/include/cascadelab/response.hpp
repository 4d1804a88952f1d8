#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>

namespace cascadelab {

// Influence level of a node. S2 nodes are also S1-active.
enum class Stage : std::uint8_t { S0 = 0, S1 = 1, S2 = 2 };

constexpr bool operator<(Stage a, Stage b) noexcept {
    return static_cast<std::uint8_t>(a) < static_cast<std::uint8_t>(b);
}
constexpr bool operator>=(Stage a, Stage b) noexcept { return !(a < b); }

// Whether peer pressure is divided by the node degree.
enum class PressureScale : std::uint8_t { Fraction, Count };

// Distribution of activation thresholds for one stage: a fixed value
// (possibly +infinity, which disables the stage) or a Gaussian. Gaussian
// thresholds are not truncated; a negative draw means the node activates on
// its first update.
struct ThresholdLaw {
    enum class Kind : std::uint8_t { Fixed, Gaussian };
    Kind kind = Kind::Fixed;
    double value = 0.0;  // fixed threshold or Gaussian mean
    double sigma = 0.0;

    static ThresholdLaw fixed(double r) { return {Kind::Fixed, r, 0.0}; }
    static ThresholdLaw gaussian(double mean, double sd) { return {Kind::Gaussian, mean, sd}; }

    // Probability that a threshold drawn from this law is <= pressure.
    double cdf(double pressure) const;
    double sample(std::mt19937_64& rng) const;
    bool is_deterministic() const noexcept { return kind == Kind::Fixed; }
};

inline constexpr double kInfiniteThreshold = std::numeric_limits<double>::infinity();

// Activation at equality is inclusive; pressures within this relative
// distance below a threshold count as equal so that rational bonus values
// such as beta = 1/3 hit their steps exactly.
inline constexpr double kThresholdTolerance = 1e-12;

inline bool reaches(double pressure, double threshold) noexcept {
    if (std::isinf(threshold)) return threshold < 0;
    return pressure >= threshold - kThresholdTolerance * std::max(1.0, std::abs(threshold));
}

// The pair of response functions (F1, F2) and the bonus influence beta.
//
// A node becomes S2-active only when its pressure reaches both its S1 and S2
// thresholds, so F2 = C1 * C2 for independent laws. This keeps F1 >= F2 even
// when a distributed S2 threshold puts mass below R1.
struct ResponseSpec {
    double beta = 0.0;
    PressureScale scale = PressureScale::Fraction;
    std::array<ThresholdLaw, 2> thresholds{ThresholdLaw::fixed(0.0), ThresholdLaw::fixed(kInfiniteThreshold)};

    static ResponseSpec fraction_uniform(double r1, double r2, double beta);
    static ResponseSpec count_uniform(double r1, double r2, double beta);
    static ResponseSpec distributed(ThresholdLaw c1, ThresholdLaw c2, double beta,
                                    PressureScale scale = PressureScale::Fraction);

    bool is_deterministic() const noexcept {
        return thresholds[0].is_deterministic() && thresholds[1].is_deterministic();
    }

    // Throws ConfigError if beta < 0, thresholds are NaN, sigma <= 0, or
    // fixed R2 < fixed R1.
    void validate() const;
};

// (m1 + beta m2) / k. Empty for k = 0: an isolated node only activates by seeding.
std::optional<double> peer_pressure(std::size_t m1, std::size_t m2, std::size_t k, double beta);

// Pressure under the spec's scale (count-based uses k = 1 in the denominator).
std::optional<double> scaled_pressure(const ResponseSpec& spec, std::size_t m1, std::size_t m2, std::size_t k);

// F_i(m1, m2, k) for stage i in {1, 2}. Throws ConfigError for other stages.
double response(const ResponseSpec& spec, int stage, std::size_t m1, std::size_t m2, std::size_t k);

}  // namespace cascadelab
