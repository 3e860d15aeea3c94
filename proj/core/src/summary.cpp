#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "csuv/engine.hpp"
#include "csuv/error.hpp"

namespace csuv {

namespace {

constexpr std::array<double, 5> kBoxPercentiles{5.0, 25.0, 50.0, 75.0, 95.0};
constexpr int kViolinPoints = 64;

double sample_sd(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

// Silverman's rule of thumb with the usual fallbacks for degenerate samples.
double silverman_bandwidth(const std::vector<double>& sorted) {
    const double sd = sample_sd(sorted);
    const double iqr = quantile_sorted(sorted, 75.0) - quantile_sorted(sorted, 25.0);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd;
    if (!(spread > 0.0)) spread = std::abs(sorted.front());
    if (!(spread > 0.0)) spread = 1.0;
    return 0.9 * spread * std::pow(static_cast<double>(sorted.size()), -0.2);
}

}  // namespace

double quantile_sorted(const std::vector<double>& sorted, double percent) {
    if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
    if (!(percent >= 0.0 && percent <= 100.0)) throw InvalidInput("quantile percent must lie in [0, 100]");
    const double h = static_cast<double>(sorted.size() - 1) * percent / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

void kernel_density(const std::vector<double>& sorted, int points, std::vector<double>& x, std::vector<double>& density) {
    x.clear();
    density.clear();
    if (sorted.empty() || points < 2) return;
    const double h = silverman_bandwidth(sorted);
    const double lo = sorted.front() - 3.0 * h;
    const double hi = sorted.back() + 3.0 * h;
    const double norm = 1.0 / (static_cast<double>(sorted.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    x.resize(static_cast<std::size_t>(points));
    density.resize(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        const double at = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
        double sum = 0.0;
        for (double v : sorted) {
            const double u = (at - v) / h;
            sum += std::exp(-0.5 * u * u);
        }
        x[static_cast<std::size_t>(k)] = at;
        density[static_cast<std::size_t>(k)] = sum * norm;
    }
}

CoefficientSummary summarize_coefficients(std::vector<double> nonzero, int total, std::array<double, 2> whiskers) {
    CoefficientSummary s;
    s.count_nonzero = static_cast<int>(nonzero.size());
    if (total < s.count_nonzero) throw InvalidInput("more nonzero coefficients than models");
    for (double v : nonzero) {
        if (v > 0.0) ++s.count_positive;
        else if (v < 0.0) ++s.count_negative;
    }
    if (nonzero.empty()) return s;

    std::sort(nonzero.begin(), nonzero.end());
    for (std::size_t k = 0; k < kBoxPercentiles.size(); ++k) s.conditional[k] = quantile_sorted(nonzero, kBoxPercentiles[k]);
    s.whiskers = {quantile_sorted(nonzero, whiskers[0]), quantile_sorted(nonzero, whiskers[1])};

    std::vector<double> all(static_cast<std::size_t>(total - s.count_nonzero), 0.0);
    all.insert(all.end(), nonzero.begin(), nonzero.end());
    std::sort(all.begin(), all.end());
    for (std::size_t k = 0; k < kBoxPercentiles.size(); ++k) s.unconditional[k] = quantile_sorted(all, kBoxPercentiles[k]);

    kernel_density(nonzero, kViolinPoints, s.violin_x, s.violin_density);
    return s;
}

}  // namespace csuv
