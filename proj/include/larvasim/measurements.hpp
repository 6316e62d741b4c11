#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "larvasim/errors.hpp"

namespace larvasim {

/// Centered moving average with edge truncation. For even window sizes the
/// window covers [i - (w-1)/2, i + w/2].
inline std::vector<double> moving_average(const std::vector<double>& v, std::size_t window) {
    if (window < 1) throw ConfigError("moving_average: window must be >= 1");
    if (v.size() < window) throw ConfigError("moving_average: series shorter than window");
    const std::size_t lo_off = (window - 1) / 2;
    const std::size_t hi_off = window / 2;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t a = i >= lo_off ? i - lo_off : 0;
        const std::size_t b = std::min(v.size() - 1, i + hi_off);
        double s = 0.0;
        for (std::size_t j = a; j <= b; ++j) s += v[j];
        out[i] = s / static_cast<double>(b - a + 1);
    }
    return out;
}

struct ResampledSeries {
    std::vector<double> t;
    std::vector<double> y;
};

/// Linear interpolation of (t, y) onto a uniform grid of step dt covering
/// [t.front(), t.back()].
inline ResampledSeries resample_linear(const std::vector<double>& t,
                                       const std::vector<double>& y, double dt) {
    if (t.size() != y.size() || t.size() < 2)
        throw ConfigError("resample_linear: need at least two samples");
    if (!(dt > 0.0)) throw ConfigError("resample_linear: dt must be positive");
    ResampledSeries out;
    std::size_t j = 1;
    for (double tq = t.front(); tq <= t.back() + 1e-9 * dt; tq += dt) {
        const double tc = std::min(tq, t.back());
        while (j + 1 < t.size() && t[j] < tc) ++j;
        const double w = (tc - t[j - 1]) / (t[j] - t[j - 1]);
        out.t.push_back(tc);
        out.y.push_back((1.0 - w) * y[j - 1] + w * y[j]);
    }
    return out;
}

/// Standard measurement preprocessing: centered moving average followed by
/// resampling onto a uniform grid.
inline ResampledSeries preprocess_measurements(const std::vector<double>& t,
                                               const std::vector<double>& y, std::size_t window,
                                               double resample_dt) {
    return resample_linear(t, moving_average(y, window), resample_dt);
}

}  // namespace larvasim
