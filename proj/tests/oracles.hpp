// Independent reference computations used by the tests. None of these call
// into the library's numerical routines.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

// Straight-line interpolation between two anchors.
inline double lerp(double x0, double y0, double x1, double y1, double x) { return y0 + (y1 - y0) * (x - x0) / (x1 - x0); }

// Root of f on [lo, hi] by the Illinois variant of regula falsi; f(lo) and
// f(hi) must bracket a root.
inline double illinois(const std::function<double(double)> & f, double lo, double hi) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    int side = 0;
    for (int i = 0; i < 400; ++i) {
        const double x = (lo * fhi - hi * flo) / (fhi - flo);
        const double fx = f(x);
        if (fx == 0.0 || std::abs(hi - lo) < 1e-16) return x;
        if ((fx > 0) == (fhi > 0)) {
            hi = x;
            fhi = fx;
            if (side == -1) flo /= 2;
            side = -1;
        } else {
            lo = x;
            flo = fx;
            if (side == 1) fhi /= 2;
            side = 1;
        }
    }
    return (lo + hi) / 2;
}

// Axial induction from 2 rho A u^3 a (1 - a)^2 = P on [0, 1/3].
inline double induction(double power, double radius, double u, double rho) {
    const double area = std::numbers::pi * radius * radius;
    const auto f = [&](double a) { return 2.0 * rho * area * u * u * u * a * (1 - a) * (1 - a) - power; };
    if (power <= 0) return 0.0;
    if (f(1.0 / 3.0) <= 0) return 1.0 / 3.0;
    return illinois(f, 0.0, 1.0 / 3.0);
}

// Posterior mean and variance of a Gaussian-mean parameter with a Gaussian
// prior and Gaussian likelihood, by trapezoidal integration of the
// unnormalized density in log space.
inline std::pair<double, double> posterior_by_quadrature(double mu, double sigma, double noise,
                                                         const std::vector<double> & ys) {
    double lo = mu, hi = mu, width = sigma;
    if (!ys.empty()) {
        double ybar = 0.0;
        for (double y : ys) ybar += y;
        ybar /= static_cast<double>(ys.size());
        lo = std::min(lo, ybar);
        hi = std::max(hi, ybar);
        width = std::min(sigma, noise / std::sqrt(static_cast<double>(ys.size())));
    }
    lo -= 40 * width;
    hi += 40 * width;
    const double h = width / 40;
    const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / h));
    const auto logp = [&](double t) {
        double l = -0.5 * (t - mu) * (t - mu) / (sigma * sigma);
        for (double y : ys) l -= 0.5 * (y - t) * (y - t) / (noise * noise);
        return l;
    };
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= steps; ++i) peak = std::max(peak, logp(lo + h * static_cast<double>(i)));
    double z = 0, m1 = 0;
    for (std::size_t i = 0; i <= steps; ++i) {
        const double t = lo + h * static_cast<double>(i);
        const double wgt = (i == 0 || i == steps ? 0.5 : 1.0) * std::exp(logp(t) - peak);
        z += wgt;
        m1 += wgt * t;
    }
    const double mean = m1 / z;
    double m2 = 0;
    for (std::size_t i = 0; i <= steps; ++i) {
        const double t = lo + h * static_cast<double>(i);
        const double wgt = (i == 0 || i == steps ? 0.5 : 1.0) * std::exp(logp(t) - peak);
        m2 += wgt * (t - mean) * (t - mean);
    }
    return {mean, m2 / z};
}

// Best two-group partition of 1-D data under the classification likelihood
// with per-group Gaussian fits (variance floored), over every subset of the
// distinct values. Returns a group label (0 for the group holding the
// smallest value) per datum.
inline std::vector<int> best_two_partition(const std::vector<double> & raw, double variance_floor) {
    const std::size_t n = raw.size();
    double mean = 0, var = 0;
    for (double x : raw) mean += x;
    mean /= static_cast<double>(n);
    for (double x : raw) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (raw[i] - mean) / sd;

    std::vector<double> distinct(raw);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const std::size_t d = distinct.size();

    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_label;
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << d); ++mask) {
        if (mask & 1) continue; // the smallest value always sits in group 0
        std::vector<int> label(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto pos = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), raw[i]) - distinct.begin());
            label[i] = (mask >> pos) & 1 ? 1 : 0;
        }
        double ll = 0;
        for (int g = 0; g < 2; ++g) {
            double cnt = 0, m = 0, v = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (label[i] == g) cnt += 1, m += x[i];
            m /= cnt;
            for (std::size_t i = 0; i < n; ++i)
                if (label[i] == g) v += (x[i] - m) * (x[i] - m);
            v = std::max(v / cnt, variance_floor);
            for (std::size_t i = 0; i < n; ++i)
                if (label[i] == g)
                    ll += std::log(cnt / static_cast<double>(n)) - 0.5 * std::log(2 * std::numbers::pi * v) -
                          0.5 * (x[i] - m) * (x[i] - m) / v;
        }
        if (ll > best) {
            best = ll;
            best_label = label;
        }
    }
    return best_label;
}

} // namespace oracle
