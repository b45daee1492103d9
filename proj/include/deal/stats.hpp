#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace deal {

// Mean over the window [1, ceil(fraction * pool_size)] of a per-iteration
// accuracy curve, integrated with the trapezoid rule and divided by the
// window length. A one-point window returns that point.
double auc_at(std::span<const double> curve, double checkpoint_fraction, std::size_t pool_size);

// Same, with an explicit last iteration (1-based).
double auc_until(std::span<const double> curve, std::size_t last_iteration);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

enum class Decision { win, tie, loss };
std::string_view to_string(Decision d);

// Two-sided Welch test; win when mean(a) > mean(b) at p < significance.
Decision win_tie_loss(std::span<const double> a, std::span<const double> b, double significance = 0.05);

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);
double standard_error(std::span<const double> v);

}  // namespace deal
