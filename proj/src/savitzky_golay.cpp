#include "gazestream/savitzky_golay.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "gazestream/core.hpp"

namespace gaze {

std::vector<double> sg_coefficients(std::size_t window, std::size_t order, std::size_t deriv) {
    if (window % 2 == 0 || window < order + 1 || deriv > order) {
        throw ConfigError("invalid Savitzky-Golay parameters: window=" + std::to_string(window) +
                          " order=" + std::to_string(order) + " deriv=" + std::to_string(deriv));
    }
    const std::size_t cols = order + 1;
    const long half = static_cast<long>(window / 2);

    // Normal equations G = A^T A with A[j][k] = z_j^k, z_j in [-half, half].
    // Solve G X = A^T for all window positions at once.
    std::vector<std::vector<long double>> aug(cols, std::vector<long double>(cols + window, 0.0L));
    for (std::size_t r = 0; r < cols; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            long double s = 0.0L;
            for (long z = -half; z <= half; ++z) {
                s += std::pow(static_cast<long double>(z), static_cast<int>(r + c));
            }
            aug[r][c] = s;
        }
        for (std::size_t j = 0; j < window; ++j) {
            const long z = static_cast<long>(j) - half;
            aug[r][cols + j] = std::pow(static_cast<long double>(z), static_cast<int>(r));
        }
    }

    // Gauss-Jordan with partial pivoting.
    for (std::size_t p = 0; p < cols; ++p) {
        std::size_t best = p;
        for (std::size_t r = p + 1; r < cols; ++r) {
            if (std::fabs(aug[r][p]) > std::fabs(aug[best][p])) best = r;
        }
        std::swap(aug[p], aug[best]);
        const long double pivot = aug[p][p];
        for (auto& v : aug[p]) v /= pivot;
        for (std::size_t r = 0; r < cols; ++r) {
            if (r == p) continue;
            const long double f = aug[r][p];
            if (f == 0.0L) continue;
            for (std::size_t c = 0; c < aug[r].size(); ++c) aug[r][c] -= f * aug[p][c];
        }
    }

    long double factorial = 1.0L;
    for (std::size_t i = 2; i <= deriv; ++i) factorial *= static_cast<long double>(i);

    std::vector<double> w(window);
    for (std::size_t j = 0; j < window; ++j) {
        w[j] = static_cast<double>(factorial * aug[deriv][cols + j]);
    }
    return w;
}

SgFilter::SgFilter(std::size_t window_, std::size_t order_, std::size_t deriv_)
    : window(window_), order(order_), deriv(deriv_), weights(sg_coefficients(window_, order_, deriv_)) {
    // Mirror the right half so the stored weights match what apply() uses.
    const std::size_t c = weights.size() / 2;
    for (std::size_t k = 1; k <= c; ++k) {
        weights[c - k] = deriv % 2 == 1 ? -weights[c + k] : weights[c + k];
    }
    if (deriv % 2 == 1) weights[c] = 0.0;
}

double SgFilter::apply(std::span<const double> samples) const {
    if (samples.size() != weights.size()) {
        throw std::invalid_argument("SgFilter::apply: expected " + std::to_string(weights.size()) + " samples");
    }
    // Centre weights are symmetric for even and antisymmetric for odd
    // derivative orders; pairing the samples keeps that exact, so e.g. the
    // slope of a constant signal is exactly zero.
    const std::size_t c = weights.size() / 2;
    const bool odd = deriv % 2 == 1;
    double acc = odd ? 0.0 : weights[c] * samples[c];
    for (std::size_t k = 1; k <= c; ++k) {
        const double w = weights[c + k];
        acc += odd ? w * (samples[c + k] - samples[c - k]) : w * (samples[c + k] + samples[c - k]);
    }
    return acc;
}

}  // namespace gaze
