#include "kickdyn/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kickdyn::spectral {

namespace {

constexpr double kSeriesLimit = 8.0;
constexpr double kAsymptoticStart = 25.0;

// Power series sum_k (-1)^k (x/2)^(2k+order) / (k! (k+order)!).
double series(int order, double x)
{
    const double h = 0.5 * x;
    const double h2 = h * h;
    double term = (order == 0) ? 1.0 : h;
    double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= -h2 / (static_cast<double>(k) * static_cast<double>(k + order));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// Miller backward recurrence normalized by J0 + 2 sum J_2k = 1. Returns
// {J0, J1}; stable and accurate to a few ulps of 1 for moderate x.
std::pair<double, double> miller(double x)
{
    int start = static_cast<int>(x + 30.0 + 12.0 * std::sqrt(x));
    start += start % 2;
    double next = 0.0;   // J_{n+1}
    double cur = 1e-300; // J_n
    double norm = 0.0;
    for (int n = start; n >= 1; --n) {
        const double prev = 2.0 * n / x * cur - next; // J_{n-1}
        next = cur;
        cur = prev;
        if ((n - 1) % 2 == 0 && n > 1) norm += 2.0 * cur;
        if (std::abs(cur) > 1e250) {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    return {cur / norm, next / norm};
}

// Hankel asymptotic expansion, summed until the terms stop decreasing.
double asymptotic(int order, double x)
{
    const double mu = 4.0 * order * order;
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    double last = 1e300;
    for (int k = 1; k < 100; ++k) {
        term *= (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * x);
        if (std::abs(term) >= last) break;
        last = std::abs(term);
        switch (k % 4) {
        case 1: q += term; break;
        case 2: p -= term; break;
        case 3: q -= term; break;
        case 0: p += term; break;
        }
        if (std::abs(term) < 1e-17) break;
    }
    const double chi = x - (0.5 * order + 0.25) * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

} // namespace

double bessel_j0(double x)
{
    x = std::abs(x);
    if (x < kSeriesLimit) return series(0, x);
    if (x < kAsymptoticStart) return miller(x).first;
    return asymptotic(0, x);
}

double bessel_j1(double x)
{
    const double sign = (x < 0.0) ? -1.0 : 1.0;
    x = std::abs(x);
    if (x < kSeriesLimit) return sign * series(1, x);
    if (x < kAsymptoticStart) return sign * miller(x).second;
    return sign * asymptotic(1, x);
}

std::vector<double> bessel_j0_zeros(std::size_t count)
{
    if (count < 1) throw std::domain_error("bessel_j0_zeros: count must be >= 1");
    std::vector<double> zeros;
    zeros.reserve(count);
    for (std::size_t s = 1; s <= count; ++s) {
        // McMahon's expansion as the starting guess, then Newton with J0' = -J1.
        const double b = (static_cast<double>(s) - 0.25) * std::numbers::pi;
        double x = b + 1.0 / (8.0 * b) - 124.0 / (3.0 * std::pow(8.0 * b, 3));
        for (int it = 0; it < 50; ++it) {
            const double step = bessel_j0(x) / bessel_j1(x);
            x += step;
            if (std::abs(step) < 1e-16 * x) break;
        }
        zeros.push_back(x);
    }
    return zeros;
}

} // namespace kickdyn::spectral
