#include "cascadelab/response.hpp"

#include <cmath>

#include "cascadelab/error.hpp"

namespace cascadelab {

double ThresholdLaw::cdf(double pressure) const {
    if (kind == Kind::Fixed) return reaches(pressure, value) ? 1.0 : 0.0;
    return 0.5 * std::erfc(-(pressure - value) / (sigma * std::sqrt(2.0)));
}

double ThresholdLaw::sample(std::mt19937_64& rng) const {
    if (kind == Kind::Fixed) return value;
    return std::normal_distribution<double>(value, sigma)(rng);
}

ResponseSpec ResponseSpec::fraction_uniform(double r1, double r2, double beta) {
    return {beta, PressureScale::Fraction, {ThresholdLaw::fixed(r1), ThresholdLaw::fixed(r2)}};
}

ResponseSpec ResponseSpec::count_uniform(double r1, double r2, double beta) {
    return {beta, PressureScale::Count, {ThresholdLaw::fixed(r1), ThresholdLaw::fixed(r2)}};
}

ResponseSpec ResponseSpec::distributed(ThresholdLaw c1, ThresholdLaw c2, double beta, PressureScale scale) {
    return {beta, scale, {c1, c2}};
}

void ResponseSpec::validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("bonus influence beta must be finite and >= 0");
    for (const auto& law : thresholds) {
        if (std::isnan(law.value)) throw ConfigError("threshold is NaN");
        if (law.kind == ThresholdLaw::Kind::Gaussian && (!(law.sigma > 0.0) || !std::isfinite(law.value)))
            throw ConfigError("Gaussian threshold needs a finite mean and sigma > 0");
    }
    if (thresholds[0].is_deterministic() && thresholds[1].is_deterministic() &&
        thresholds[1].value < thresholds[0].value)
        throw ConfigError("R2 must be >= R1");
}

std::optional<double> peer_pressure(std::size_t m1, std::size_t m2, std::size_t k, double beta) {
    if (k == 0) return std::nullopt;
    return (static_cast<double>(m1) + beta * static_cast<double>(m2)) / static_cast<double>(k);
}

std::optional<double> scaled_pressure(const ResponseSpec& spec, std::size_t m1, std::size_t m2, std::size_t k) {
    if (k == 0) return std::nullopt;
    return peer_pressure(m1, m2, spec.scale == PressureScale::Count ? 1 : k, spec.beta);
}

double response(const ResponseSpec& spec, int stage, std::size_t m1, std::size_t m2, std::size_t k) {
    if (stage != 1 && stage != 2) throw ConfigError("stage index must be 1 or 2");
    auto p = scaled_pressure(spec, m1, m2, k);
    if (!p) return 0.0;
    double f1 = spec.thresholds[0].cdf(*p);
    return stage == 1 ? f1 : f1 * spec.thresholds[1].cdf(*p);
}

}  // namespace cascadelab
