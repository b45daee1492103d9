#include <doctest.h>

#include <cmath>
#include <numeric>

#include "deal/kernels.hpp"
#include "deal/random.hpp"

using namespace deal;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = standard_normal(rng);
    return m;
}

std::vector<std::size_t> random_subset(std::size_t n, std::size_t count, Rng& rng) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    shuffle(ids, rng);
    ids.resize(count);
    return ids;
}

DiagonalGmm random_gmm(std::size_t k, std::size_t d, Rng& rng) {
    DiagonalGmm g;
    g.means = random_matrix(k, d, rng);
    g.variances = Matrix(k, d);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j) g.variances(c, j) = 0.1 + uniform01(rng);
    std::vector<double> w(k);
    for (auto& v : w) v = 0.05 + uniform01(rng);
    const double z = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto v : w) g.log_weights.push_back(std::log(v / z));
    return g;
}

}  // namespace

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
    auto rng = make_rng(99);
    for (int c = 0; c < 30; ++c) {
        const std::size_t n = 1 + uniform_index(rng, 400), d = 1 + uniform_index(rng, 12);
        const auto x = random_matrix(n, d, rng);
        const auto cands = random_subset(n, 1 + uniform_index(rng, n), rng);
        const auto anchors = random_subset(n, 1 + uniform_index(rng, n), rng);
        REQUIRE(min_distances(x, cands, anchors) == reference::min_distances(x, cands, anchors));

        const std::vector<double> point(x.row(0).begin(), x.row(0).end());
        REQUIRE(distances_to(x, cands, point) == reference::distances_to(x, cands, point));

        const auto centroids = random_matrix(1 + uniform_index(rng, 10), d, rng);
        REQUIRE(nearest_centroid(x, cands, centroids) == reference::nearest_centroid(x, cands, centroids));

        const auto g = random_gmm(1 + uniform_index(rng, 20), d, rng);
        REQUIRE(component_log_densities(g, x, cands) == reference::component_log_densities(g, x, cands));
        REQUIRE(gmm_log_density(g, x, cands) == reference::gmm_log_density(g, x, cands));
    }
}

TEST_CASE("kernel values against direct formulas") {
    auto rng = make_rng(5);
    const auto x = random_matrix(30, 3, rng);
    std::vector<std::size_t> rows(30);
    std::iota(rows.begin(), rows.end(), 0);
    const auto g = random_gmm(4, 3, rng);
    const auto lp = gmm_log_density(g, x, rows);
    for (std::size_t i = 0; i < 30; ++i) {
        double dens = 0.0;
        for (std::size_t c = 0; c < 4; ++c) {
            double comp = std::exp(g.log_weights[c]);
            for (std::size_t j = 0; j < 3; ++j) {
                const double v = g.variances(c, j), diff = x(i, j) - g.means(c, j);
                comp *= std::exp(-diff * diff / (2 * v)) / std::sqrt(2 * M_PI * v);
            }
            dens += comp;
        }
        REQUIRE(lp[i] == doctest::Approx(std::log(dens)).epsilon(1e-12));
    }

    const Matrix c(2, 3, {0, 0, 0, 1, 1, 1});
    const Matrix p(3, 3, {0.4, 0.4, 0.4, 0.6, 0.6, 0.6, 0.5, 0.5, 0.5});
    const std::vector<std::size_t> r{0, 1, 2};
    CHECK(nearest_centroid(p, r, c) == std::vector<std::size_t>{0, 1, 0});  // tie goes to the lower index

    const Matrix q(3, 1, {0.0, 3.0, -1.0});
    const std::vector<std::size_t> cand{1, 2}, anch{0};
    CHECK(min_distances(q, cand, anch) == std::vector<double>{3.0, 1.0});
}

TEST_CASE("log_sum_exp") {
    CHECK(log_sum_exp(std::vector<double>{0.0, 0.0}) == doctest::Approx(std::log(2.0)));
    CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
    CHECK(log_sum_exp(std::vector<double>{-1000.0}) == -1000.0);
    CHECK(std::isinf(log_sum_exp(std::vector<double>{-INFINITY, -INFINITY})));
}
