#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace cpmfit {

// Golden-section search for a minimum of `f` on [lo, hi]; stops once the
// bracket is narrower than `tol`. Assumes `f` is unimodal on the bracket.
template <class F>
double golden_section_minimize(F&& f, double lo, double hi, double tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

double mean(std::span<const double> values);

// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_sd(std::span<const double> values);

// Median; NaN for an empty input.
double median(std::vector<double> values);

// Deterministic 64-bit mixing used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Seed salt derived from the bit pattern of a speed value.
std::uint64_t speed_salt(double speed);

}  // namespace cpmfit
