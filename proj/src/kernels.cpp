#include "deal/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

namespace deal {
namespace {

double nearest_anchor(const Matrix& x, std::size_t row, std::span<const std::size_t> anchors) {
    double best = std::numeric_limits<double>::infinity();
    for (auto a : anchors) best = std::min(best, squared_distance(x.row(row), x.row(a)));
    return std::sqrt(best);
}

std::size_t nearest_index(std::span<const double> p, const Matrix& centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d = squared_distance(p, centroids.row(c));
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

void component_terms(const DiagonalGmm& gmm, std::span<const double> p, std::span<double> out) {
    constexpr double log_2pi = 1.8378770664093453;
    const std::size_t d = p.size();
    for (std::size_t c = 0; c < gmm.components(); ++c) {
        auto mu = gmm.means.row(c);
        auto var = gmm.variances.row(c);
        double acc = gmm.log_weights[c] - 0.5 * static_cast<double>(d) * log_2pi;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = p[j] - mu[j];
            acc -= 0.5 * (std::log(var[j]) + diff * diff / var[j]);
        }
        out[c] = acc;
    }
}

}  // namespace

double log_sum_exp(std::span<const double> v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    const double top = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(top)) return top;
    double s = 0.0;
    for (double e : v) s += std::exp(e - top);
    return top + std::log(s);
}

std::vector<double> min_distances(const Matrix& x, std::span<const std::size_t> candidates,
                                  std::span<const std::size_t> anchors) {
    std::vector<double> out(candidates.size());
    const long n = static_cast<long>(candidates.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = nearest_anchor(x, candidates[static_cast<std::size_t>(i)], anchors);
    return out;
}

std::vector<double> distances_to(const Matrix& x, std::span<const std::size_t> rows, std::span<const double> point) {
    std::vector<double> out(rows.size());
    const long n = static_cast<long>(rows.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = std::sqrt(squared_distance(x.row(rows[static_cast<std::size_t>(i)]), point));
    return out;
}

std::vector<std::size_t> nearest_centroid(const Matrix& x, std::span<const std::size_t> rows, const Matrix& centroids) {
    std::vector<std::size_t> out(rows.size());
    const long n = static_cast<long>(rows.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = nearest_index(x.row(rows[static_cast<std::size_t>(i)]), centroids);
    return out;
}

Matrix component_log_densities(const DiagonalGmm& gmm, const Matrix& x, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), gmm.components());
    const long n = static_cast<long>(rows.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
        component_terms(gmm, x.row(rows[r]), out.row(r));
    }
    return out;
}

std::vector<double> gmm_log_density(const DiagonalGmm& gmm, const Matrix& x, std::span<const std::size_t> rows) {
    std::vector<double> out(rows.size());
    const long n = static_cast<long>(rows.size());
#pragma omp parallel
    {
        std::vector<double> terms(gmm.components());
#pragma omp for schedule(static)
        for (long i = 0; i < n; ++i) {
            const auto r = static_cast<std::size_t>(i);
            component_terms(gmm, x.row(rows[r]), terms);
            out[r] = log_sum_exp(terms);
        }
    }
    return out;
}

namespace reference {

std::vector<double> min_distances(const Matrix& x, std::span<const std::size_t> candidates,
                                  std::span<const std::size_t> anchors) {
    std::vector<double> out;
    out.reserve(candidates.size());
    for (auto c : candidates) out.push_back(nearest_anchor(x, c, anchors));
    return out;
}

std::vector<double> distances_to(const Matrix& x, std::span<const std::size_t> rows, std::span<const double> point) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(std::sqrt(squared_distance(x.row(r), point)));
    return out;
}

std::vector<std::size_t> nearest_centroid(const Matrix& x, std::span<const std::size_t> rows, const Matrix& centroids) {
    std::vector<std::size_t> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(nearest_index(x.row(r), centroids));
    return out;
}

Matrix component_log_densities(const DiagonalGmm& gmm, const Matrix& x, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), gmm.components());
    for (std::size_t i = 0; i < rows.size(); ++i) component_terms(gmm, x.row(rows[i]), out.row(i));
    return out;
}

std::vector<double> gmm_log_density(const DiagonalGmm& gmm, const Matrix& x, std::span<const std::size_t> rows) {
    std::vector<double> out;
    std::vector<double> terms(gmm.components());
    for (auto r : rows) {
        component_terms(gmm, x.row(r), terms);
        out.push_back(log_sum_exp(terms));
    }
    return out;
}

}  // namespace reference
}  // namespace deal
