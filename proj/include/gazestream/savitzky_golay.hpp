#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gaze {

/// Least-squares polynomial convolution weights for the centre of an odd
/// window of `window` samples, for derivative order `deriv` (per unit sample
/// step). Throws ConfigError for an invalid combination.
std::vector<double> sg_coefficients(std::size_t window, std::size_t order, std::size_t deriv);

/// A fixed Savitzky-Golay filter evaluated on the most recent window.
struct SgFilter {
    std::size_t window = 11;
    std::size_t order = 2;
    std::size_t deriv = 0;
    std::vector<double> weights;

    SgFilter(std::size_t window, std::size_t order, std::size_t deriv);

    /// `samples` holds exactly `window` values, oldest first. With deriv=1
    /// the result is per sample step; divide by dt for a rate.
    double apply(std::span<const double> samples) const;
};

}  // namespace gaze
