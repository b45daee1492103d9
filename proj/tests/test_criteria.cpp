#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deal/criteria.hpp"
#include "deal/random.hpp"

using namespace deal;

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

LinearModel binary_model(std::vector<double> w, double b) {
    LinearModel m;
    m.classes = 2;
    const std::size_t d = w.size();
    m.weights = Matrix(1, d, std::move(w));
    m.bias = {b};
    return m;
}

Matrix points(std::initializer_list<std::vector<double>> rows) {
    Matrix m;
    for (const auto& r : rows) m.append_row(r);
    return m;
}

Matrix random_points(std::size_t n, std::size_t d, Rng& rng) {
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = standard_normal(rng);
    return m;
}

bool is_permutation_of_positions(const std::vector<std::size_t>& order) {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i] != i) return false;
    return true;
}

}  // namespace

TEST_CASE("criterion names") {
    CHECK(parse_criterion("us") == Criterion::us);
    CHECK(parse_criterion("dff") == Criterion::dff);
    CHECK_THROWS(parse_criterion("qbc"));
    CHECK(parse_criteria_list("us,rs,de,rand") ==
          std::vector<Criterion>{Criterion::us, Criterion::rs, Criterion::de, Criterion::rand});
    CHECK(to_string(Criterion::rand) == "rand");
}

TEST_CASE("preference ties keep position order") {
    const std::vector<double> raw{2.0, 1.0, 2.0, 1.0};
    CHECK(preference_from(raw, false) == std::vector<std::size_t>{1, 3, 0, 2});
    CHECK(preference_from(raw, true) == std::vector<std::size_t>{0, 2, 1, 3});
}

TEST_CASE("uncertainty sampling") {
    const auto m = binary_model({1.0}, 0.0);
    SUBCASE("ascending absolute margin") {
        const auto x = points({{0.1}, {1.5}, {-2.0}});
        const auto s = us_scores(m, x, all_rows(3));
        CHECK(s.preference_order == std::vector<std::size_t>{0, 1, 2});
    }
    SUBCASE("the 50/50 point ranks first") {
        const auto x = points({{0.7}, {-0.2}, {0.0}, {3.0}});
        CHECK(us_scores(m, x, all_rows(4)).preference_order.front() == 2);
    }
    SUBCASE("multiclass best-versus-second-best") {
        // zero-weight scorer rows with biases log(p) reproduce p exactly
        LinearModel mc;
        mc.classes = 3;
        const std::vector<double> a{0.4, 0.39, 0.21}, b{0.5, 0.3, 0.2};
        mc.weights = Matrix(3, 1);
        mc.bias.resize(3);
        for (std::size_t c = 0; c < 3; ++c) {
            mc.bias[c] = std::log(a[c]);
            mc.weights(c, 0) = std::log(b[c]) - std::log(a[c]);
        }
        const auto x = points({{1.0}, {0.0}});  // B first, then A
        const auto s = us_scores(mc, x, all_rows(2));
        CHECK(s.raw[1] == doctest::Approx(0.01));
        CHECK(s.raw[0] == doctest::Approx(0.2));
        CHECK(s.preference_order == std::vector<std::size_t>{1, 0});
    }
    SUBCASE("degenerate model ties fall back to position order") {
        auto d = binary_model({0.0, 0.0}, 1.0);
        d.degenerate = true;
        const auto x = points({{3, 1}, {0, 0}, {-1, 2}});
        CHECK(us_scores(d, x, all_rows(3)).preference_order == std::vector<std::size_t>{0, 1, 2});
    }
}

TEST_CASE("k-means converges to a Lloyd fixed point") {
    auto rng = make_rng(6);
    for (int c = 0; c < 20; ++c) {
        const auto x = random_points(40, 2, rng);
        const auto rows = all_rows(40);
        const auto km = kmeans(x, rows, 4, 500, c);
        // brute force: every point sits at its nearest centroid, every centroid is its members' mean
        for (std::size_t i = 0; i < 40; ++i) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < 4; ++k)
                if (squared_distance(x.row(i), km.centroids.row(k)) < squared_distance(x.row(i), km.centroids.row(best)))
                    best = k;
            REQUIRE(km.assignment[i] == best);
        }
        for (std::size_t k = 0; k < 4; ++k) {
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < 40; ++i)
                if (km.assignment[i] == k) mx += x(i, 0), my += x(i, 1);
            REQUIRE(km.sizes[k] > 0);
            REQUIRE(km.centroids(k, 0) == doctest::Approx(mx / km.sizes[k]));
            REQUIRE(km.centroids(k, 1) == doctest::Approx(my / km.sizes[k]));
        }
    }
}

TEST_CASE("representative sampling") {
    const auto m = binary_model({0.0, 1.0}, 0.0);  // margin = second coordinate
    RsConfig cfg;
    SUBCASE("coincident band points outrank everything outside the band") {
        const auto x = points({{5, 3}, {1, 0.5}, {1, 0.5}, {-4, -6}, {1, 0.5}, {2, 4}});
        const auto s = rs_scores(m, x, all_rows(6), cfg);
        CHECK(s.raw[1] == 0.0);
        CHECK(s.raw[2] == 0.0);
        CHECK(s.raw[4] == 0.0);
        CHECK(s.preference_order == std::vector<std::size_t>{1, 2, 4, 5, 0, 3});
    }
    SUBCASE("two band clusters: distance to the larger one's centroid") {
        const auto x = points({{0.0, 0.1}, {0.2, -0.3}, {-0.1, 0.0}, {0.1, 0.4}, {-0.2, -0.1},  // 5 near origin
                               {10.0, 0.2}, {10.3, -0.2},                                       // 2 far right
                               {3.0, 5.0}, {-2.0, -4.0}});                                      // outside band
        cfg.clusters = 2;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            cfg.seed = seed;
            const auto s = rs_scores(m, x, all_rows(9), cfg);
            const double cx = (0.0 + 0.2 - 0.1 + 0.1 - 0.2) / 5, cy = (0.1 - 0.3 + 0.0 + 0.4 - 0.1) / 5;
            for (std::size_t i = 0; i < 9; ++i)
                REQUIRE(s.raw[i] == doctest::Approx(std::hypot(x(i, 0) - cx, x(i, 1) - cy)));
        }
    }
    SUBCASE("one cluster: distance to the band mean") {
        cfg.clusters = 1;
        const auto x = points({{0, 0.5}, {2, -0.5}, {4, 0.0}, {9, 9}});
        const auto s = rs_scores(m, x, all_rows(4), cfg);
        for (std::size_t i = 0; i < 4; ++i) CHECK(s.raw[i] == doctest::Approx(std::hypot(x(i, 0) - 2.0, x(i, 1) - 0.0)));
    }
    SUBCASE("empty band widens to the quarter closest to the boundary") {
        cfg.clusters = 1;
        const auto x = points({{0, 2}, {1, -3}, {5, 1.5}, {7, 8}, {1, 9}, {2, -9}, {3, 4}, {4, 7}});
        const auto s = rs_scores(m, x, all_rows(8), cfg);
        // |margin| smallest two: rows 2 (1.5) and 0 (2)
        for (std::size_t i = 0; i < 8; ++i)
            CHECK(s.raw[i] == doctest::Approx(std::hypot(x(i, 0) - 2.5, x(i, 1) - 1.75)));
    }
    SUBCASE("multiclass models are rejected") {
        LinearModel mc;
        mc.classes = 3;
        mc.weights = Matrix(3, 2);
        mc.bias = {0, 0, 0};
        CHECK_THROWS(rs_scores(mc, points({{0, 0}}), all_rows(1), cfg));
    }
}

TEST_CASE("furthest first") {
    SUBCASE("radii") {
        const auto x = points({{0, 0}, {1, 0}, {0, 2}, {-5, 0}});
        const std::vector<std::size_t> labeled{0}, pool{1, 2, 3};
        const auto s = dff_scores(x, labeled, pool);
        CHECK(s.preference_order.front() == 2);
        CHECK(s.raw == std::vector<double>{1.0, 2.0, 5.0});
    }
    SUBCASE("coincident point scores zero and ranks last") {
        const auto x = points({{1, 1}, {1, 1}, {0, 0}, {3, 3}});
        const std::vector<std::size_t> labeled{0}, pool{1, 2, 3};
        const auto s = dff_scores(x, labeled, pool);
        CHECK(s.raw[0] == 0.0);
        CHECK(s.preference_order.back() == 0);
    }
    SUBCASE("brute force on random instances") {
        auto rng = make_rng(13);
        for (int c = 0; c < 100; ++c) {
            const std::size_t n = 2 + uniform_index(rng, 29), d = 1 + uniform_index(rng, 4);
            const auto x = random_points(n, d, rng);
            auto ids = all_rows(n);
            shuffle(ids, rng);
            const std::size_t nl = 1 + uniform_index(rng, n - 1);
            std::vector<std::size_t> labeled(ids.begin(), ids.begin() + nl), pool(ids.begin() + nl, ids.end());
            const auto s = dff_scores(x, labeled, pool);
            for (std::size_t i = 0; i < pool.size(); ++i) {
                double best = INFINITY;
                for (auto l : labeled) {
                    double acc = 0;
                    for (std::size_t j = 0; j < d; ++j) acc += (x(pool[i], j) - x(l, j)) * (x(pool[i], j) - x(l, j));
                    best = std::min(best, std::sqrt(acc));
                }
                REQUIRE(s.raw[i] == doctest::Approx(best).epsilon(1e-12));
            }
            REQUIRE(x(pool[s.preference_order.front()], 0) == x(pool[s.preference_order.front()], 0));
            REQUIRE(s.raw[s.preference_order.front()] == *std::max_element(s.raw.begin(), s.raw.end()));
        }
    }
}

TEST_CASE("density estimate") {
    GmmConfig cfg;
    SUBCASE("one component on isotropic data prefers the point nearest the mean") {
        auto rng = make_rng(2);
        const auto x = random_points(200, 2, rng);
        cfg.components = 1;
        const auto s = de_scores(x, all_rows(200), all_rows(200), cfg);
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < 200; ++i) mx += x(i, 0) / 200, my += x(i, 1) / 200;
        std::size_t nearest = 0;
        for (std::size_t i = 1; i < 200; ++i)
            if (std::hypot(x(i, 0) - mx, x(i, 1) - my) < std::hypot(x(nearest, 0) - mx, x(nearest, 1) - my)) nearest = i;
        // the fitted variances differ per axis, so compare against the Mahalanobis-nearest point
        const auto g = fit_gmm(x, all_rows(200), cfg);
        std::size_t maha = 0;
        auto md = [&](std::size_t i) {
            return (x(i, 0) - g.means(0, 0)) * (x(i, 0) - g.means(0, 0)) / g.variances(0, 0) +
                   (x(i, 1) - g.means(0, 1)) * (x(i, 1) - g.means(0, 1)) / g.variances(0, 1);
        };
        for (std::size_t i = 1; i < 200; ++i)
            if (md(i) < md(maha)) maha = i;
        CHECK(s.preference_order.front() == maha);
        CHECK(g.means(0, 0) == doctest::Approx(mx));
        CHECK(g.means(0, 1) == doctest::Approx(my));
        (void)nearest;
    }
    SUBCASE("dense blob outranks a sparse blob; top-1 agrees with a kernel density") {
        auto rng = make_rng(4);
        Matrix x;
        for (int i = 0; i < 50; ++i) x.append_row(std::vector<double>{0.3 * standard_normal(rng), 0.3 * standard_normal(rng)});
        for (int i = 0; i < 5; ++i) x.append_row(std::vector<double>{8 + 2 * standard_normal(rng), 8 + 2 * standard_normal(rng)});
        // Two components: with 20 on 55 points EM parks components on single
        // sparse points and the variance floor turns them into spikes.
        cfg.components = 2;
        const auto s = de_scores(x, all_rows(55), all_rows(55), cfg);
        const double best_dense = *std::max_element(s.raw.begin(), s.raw.begin() + 50);
        const double best_sparse = *std::max_element(s.raw.begin() + 50, s.raw.end());
        CHECK(best_dense > best_sparse);
        // brute-force Gaussian KDE, bandwidth 0.5
        std::vector<double> kde(55, 0.0);
        for (std::size_t i = 0; i < 55; ++i)
            for (std::size_t j = 0; j < 55; ++j)
                kde[i] += std::exp(-squared_distance(x.row(i), x.row(j)) / (2 * 0.25));
        const auto kde_top = std::max_element(kde.begin(), kde.end()) - kde.begin();
        CHECK(s.preference_order.front() < 50);
        CHECK(kde_top < 50);
    }
    SUBCASE("duplicated points share scores") {
        auto rng = make_rng(5);
        auto x = random_points(30, 3, rng);
        x.append_row(std::vector<double>(x.row(7).begin(), x.row(7).end()));
        const auto s = de_scores(x, all_rows(31), all_rows(31), cfg);
        CHECK(s.raw[7] == s.raw[30]);
    }
    SUBCASE("component count is clamped for small pools") {
        auto rng = make_rng(6);
        const auto x = random_points(10, 2, rng);
        CHECK(fit_gmm(x, all_rows(10), cfg).components() == 5);
        CHECK(fit_gmm(x, all_rows(2), cfg).components() == 1);
        CHECK_THROWS(fit_gmm(x, all_rows(1), cfg));
    }
    SUBCASE("fit is deterministic") {
        auto rng = make_rng(7);
        const auto x = random_points(60, 2, rng);
        const auto a = fit_gmm(x, all_rows(60), cfg);
        const auto b = fit_gmm(x, all_rows(60), cfg);
        CHECK(a.means == b.means);
        CHECK(a.variances == b.variances);
        CHECK(a.log_weights == b.log_weights);
    }
}

TEST_CASE("random expert is exactly uniform") {
    const auto a = advice_vector(rand_scores(4), 0.1, 100);
    CHECK(a == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    CHECK(advice_vector(rand_scores(1), 0.1, 100) == std::vector<double>{1.0});
    auto rng = make_rng(1);
    for (int c = 0; c < 100; ++c) {
        const auto k = 1 + uniform_index(rng, 500);
        const auto v = advice_vector(rand_scores(k), 0.1, 100);
        REQUIRE(std::accumulate(v.begin(), v.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("rank normalisation") {
    CriterionScores s;
    s.preference_order = {2, 0, 1};
    const auto v = rank_normalize(s, 0.1);
    CHECK(std::abs(v[2] + 0.90483741803595957) < 1e-15);
    CHECK(v[2] < v[0]);
    CHECK(v[0] < v[1]);
    CHECK(v[1] < 0.0);
    for (double x : rank_normalize(s, 0.0)) CHECK(x == -1.0);
    s.preference_order = {0, 0, 1};
    CHECK_THROWS(rank_normalize(s, 0.1));
    s.preference_order = {0, 3, 1};
    CHECK_THROWS(rank_normalize(s, 0.1));
}

TEST_CASE("Gibbs advice") {
    for (double x : gibbs_advice(std::vector<double>{-0.9, -0.5, -0.1}, 0.0)) CHECK(x == doctest::Approx(1.0 / 3));
    CriterionScores s;
    s.preference_order = {0, 1, 2};
    const auto g = gibbs_advice(rank_normalize(s, 0.1), 100.0);
    // 50-digit reference values
    CHECK(std::abs(g[0] - 0.99981780544490389) < 1e-14);
    CHECK(std::abs(g[1] - 1.8211927890555236e-4) / 1.8211927890555236e-4 < 1e-10);
    CHECK(std::abs(g[2] - 7.5276190558807583e-8) / 7.5276190558807583e-8 < 1e-10);
    CHECK_THROWS(gibbs_advice(std::vector<double>{-1.0}, -1.0));

    const std::vector<double> in{-0.3, -0.9, -0.5, -0.7};
    const std::vector<std::size_t> perm{2, 0, 3, 1};
    std::vector<double> permuted(4);
    for (std::size_t i = 0; i < 4; ++i) permuted[i] = in[perm[i]];
    const auto a = gibbs_advice(in, 7.0), b = gibbs_advice(permuted, 7.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(b[i] == doctest::Approx(a[perm[i]]).epsilon(1e-15));

    // no overflow at extreme beta
    const auto big = gibbs_advice(std::vector<double>{-0.9, -0.8}, 1e6);
    CHECK(std::isfinite(big[0]));
    CHECK(big[0] == doctest::Approx(1.0));
}

TEST_CASE("advice properties over criteria and pool sizes") {
    auto rng = make_rng(31);
    const auto x = random_points(40, 2, rng);
    const auto model = binary_model({1.0, -0.5}, 0.1);
    const auto gmm = fit_gmm(x, all_rows(40), GmmConfig{});
    for (std::size_t K = 1; K <= 30; ++K) {
        const auto rows = all_rows(40);
        std::vector<std::size_t> pool(rows.begin() + 10, rows.begin() + 10 + static_cast<long>(K));
        std::vector<std::size_t> labeled{0, 1, 2};
        const std::vector<CriterionScores> all{us_scores(model, x, pool), rs_scores(model, x, pool, RsConfig{}),
                                               dff_scores(x, labeled, pool), de_scores(gmm, x, pool),
                                               rand_scores(K)};
        for (const auto& s : all) {
            REQUIRE(s.preference_order.size() == K);
            REQUIRE(is_permutation_of_positions(s.preference_order));
            const auto a = advice_vector(s, 0.1, 100);
            REQUIRE(std::accumulate(a.begin(), a.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
            for (double v : a) REQUIRE(v >= 0.0);
            const double top = a[s.preference_order.front()];
            REQUIRE(top == *std::max_element(a.begin(), a.end()));
        }
    }
}

TEST_CASE("only the ordering of raw scores matters") {
    auto rng = make_rng(17);
    for (int c = 0; c < 50; ++c) {
        const std::size_t K = 1 + uniform_index(rng, 40);
        std::vector<double> raw(K), cubed(K);
        for (std::size_t i = 0; i < K; ++i) {
            raw[i] = 0.01 + uniform01(rng);
            cubed[i] = raw[i] * raw[i] * raw[i];
        }
        for (bool higher : {true, false}) {
            CriterionScores a, b;
            a.raw = raw;
            a.preference_order = preference_from(raw, higher);
            b.raw = cubed;
            b.preference_order = preference_from(cubed, higher);
            REQUIRE(advice_vector(a, 0.1, 100) == advice_vector(b, 0.1, 100));
        }
    }
}
