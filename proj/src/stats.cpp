#include "deal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "deal/diagnostics.hpp"

namespace deal {

double auc_until(std::span<const double> curve, std::size_t last_iteration) {
    if (curve.empty()) throw std::invalid_argument("empty accuracy curve");
    if (last_iteration < 1) last_iteration = 1;
    if (last_iteration > curve.size()) {
        warn("checkpoint at iteration " + std::to_string(last_iteration) + " beyond curve length " +
             std::to_string(curve.size()) + "; clipped");
        last_iteration = curve.size();
    }
    if (last_iteration == 1) return curve[0];
    double area = 0.0;
    for (std::size_t i = 1; i < last_iteration; ++i) area += 0.5 * (curve[i - 1] + curve[i]);
    return area / static_cast<double>(last_iteration - 1);
}

double auc_at(std::span<const double> curve, double checkpoint_fraction, std::size_t pool_size) {
    if (!(checkpoint_fraction > 0.0)) throw std::invalid_argument("checkpoint fraction must be positive");
    const auto last =
        static_cast<std::size_t>(std::ceil(checkpoint_fraction * static_cast<double>(pool_size) - 1e-9));
    return auc_until(curve, last);
}

double mean(std::span<const double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double standard_error(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("Welch test needs at least 2 samples per side");
    const double ma = mean(a), mb = mean(b);
    const double va = sample_variance(a) / static_cast<double>(a.size());
    const double vb = sample_variance(b) / static_cast<double>(b.size());
    const double se2 = va + vb;
    WelchResult r;
    if (se2 == 0.0) {
        // Both samples constant: identical means are indistinguishable, distinct ones are certain.
        r.t = ma == mb ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), ma - mb);
        r.df = static_cast<double>(a.size() + b.size() - 2);
        r.p_value = ma == mb ? 1.0 : 0.0;
        return r;
    }
    r.t = (ma - mb) / std::sqrt(se2);
    const double da = va * va / static_cast<double>(a.size() - 1);
    const double db = vb * vb / static_cast<double>(b.size() - 1);
    r.df = se2 * se2 / (da + db);
    boost::math::students_t dist(r.df);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    r.p_value = std::min(1.0, r.p_value);
    return r;
}

std::string_view to_string(Decision d) {
    switch (d) {
        case Decision::win: return "win";
        case Decision::tie: return "tie";
        case Decision::loss: return "loss";
    }
    return "?";
}

Decision win_tie_loss(std::span<const double> a, std::span<const double> b, double significance) {
    if (a.size() < 2 || b.size() < 2) {
        warn("fewer than 2 samples per side; comparison declared a tie");
        return Decision::tie;
    }
    const auto r = welch_t_test(a, b);
    if (r.p_value >= significance) return Decision::tie;
    return mean(a) > mean(b) ? Decision::win : Decision::loss;
}

}  // namespace deal
