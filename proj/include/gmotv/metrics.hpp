#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "gmotv/signal.hpp"

namespace gmotv {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Standard-normal variates via Box-Muller over mt19937_64. Implemented
/// explicitly because std::normal_distribution is not specified bit-exactly
/// across standard libraries and the bench output must be reproducible.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;  // [0,1) with 53 bits
    }

    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline double mean(const Signal& s) {
    double m = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) m += s[i];
    return m / static_cast<double>(s.size());
}

/// Population variance over the segment.
inline double variance(const Signal& s) {
    const double m = mean(s);
    double v = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = s[i] - m;
        v += d * d;
    }
    return v / static_cast<double>(s.size());
}

inline double sum_squares(const Signal& s) {
    double v = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) v += s[i] * s[i];
    return v;
}

/// Sampled Gaussian blur: taps exp(-x^2 / (2 var)) on x in [-ceil(3 sigma),
/// +ceil(3 sigma)], normalized to unit sum, origin at the center.
inline Kernel gaussian_kernel(double variance_b) {
    if (!(variance_b > 0.0))
        throw std::invalid_argument("gaussian_kernel: variance must be > 0");
    const double sigma = std::sqrt(variance_b);
    const std::ptrdiff_t radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (std::ptrdiff_t x = -radius; x <= radius; ++x) {
        const double t = std::exp(-static_cast<double>(x * x) / (2.0 * variance_b));
        taps[static_cast<std::size_t>(x + radius)] = t;
        sum += t;
    }
    // exp(-x^2/...) is evaluated identically for +/-x, so symmetry is exact
    for (double& t : taps) t /= sum;
    return Kernel(std::move(taps), radius);
}

enum class NoiseReference { signal_power, blurred_variance };

/// Additive white Gaussian noise, rescaled after the draw so the empirical
/// ratio matches target_db exactly:
///   signal_power:     10 log10( sum g^2 / sum eta^2 )   = target_db
///   blurred_variance: 10 log10( var(g) / var(eta) )     = target_db
/// The raw draw is centered to exact zero mean first. Deterministic in seed.
inline Signal add_noise(const Signal& clean, double target_db, NoiseReference ref,
                        std::uint64_t seed) {
    if (!std::isfinite(target_db))
        throw std::invalid_argument("add_noise: non-finite target");
    const std::size_t n = clean.size();
    if (n < 2) throw std::invalid_argument("add_noise: need at least 2 samples");

    GaussianSampler draw(seed);
    Signal eta = Signal::zeros(n);
    for (std::size_t i = 0; i < n; ++i) eta[i] = draw();
    const double m = mean(eta);
    for (std::size_t i = 0; i < n; ++i) eta[i] -= m;

    const double ref_power = ref == NoiseReference::signal_power ? sum_squares(clean)
                                                                 : variance(clean);
    if (!(ref_power > 0.0)) throw std::invalid_argument("add_noise: zero-power reference");
    const double eta_power =
        ref == NoiseReference::signal_power ? sum_squares(eta) : variance(eta);
    if (!(eta_power > 0.0)) throw std::runtime_error("add_noise: degenerate noise draw");

    const double target_power = ref_power * std::pow(10.0, -target_db / 10.0);
    const double scale = std::sqrt(target_power / eta_power);

    Signal out = clean;
    for (std::size_t i = 0; i < n; ++i) out[i] += scale * eta[i];
    return out;
}

/// Improvement in SNR, 20 log10(||g - f|| / ||g - ghat||), in dB.
inline double isnr_db(const Signal& original, const Signal& degraded, const Signal& restored) {
    check_same_size(original, degraded, "isnr_db");
    check_same_size(original, restored, "isnr_db");
    const double den = norm(original - restored);
    if (den == 0.0)
        throw std::invalid_argument("isnr_db: restored equals original (infinite ISNR)");
    const double num = norm(original - degraded);
    if (num == 0.0)
        throw std::invalid_argument("isnr_db: degraded equals original");
    return 20.0 * std::log10(num / den);
}

}  // namespace gmotv
