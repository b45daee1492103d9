#include <doctest.h>

#include <cmath>

#include "deal/learner.hpp"
#include "deal/random.hpp"
#include "deal/synthetic_data.hpp"

using namespace deal;

namespace {

LinearModel hand_model(std::vector<double> w, double b) {
    LinearModel m;
    m.classes = 2;
    const std::size_t d = w.size();
    m.weights = Matrix(1, d, std::move(w));
    m.bias = {b};
    return m;
}

Dataset duplicated(const Dataset& d) {
    Dataset out = d;
    for (std::size_t i = 0; i < d.size(); ++i) {
        out.features.append_row(d.features.row(i));
        out.labels.push_back(d.labels[i]);
    }
    return out;
}

}  // namespace

TEST_CASE("two separable points") {
    Dataset d;
    d.features = Matrix(2, 2, {1.0, 0.5, -1.0, -0.5});
    d.labels = {1, 0};
    d.class_names = {"a", "b"};
    const auto m = train(d, {});
    CHECK_FALSE(m.degenerate);
    CHECK(test_accuracy(m, d) == 1.0);
}

TEST_CASE("duplicating every point keeps the decision boundary") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto d = make_named_dataset("overlapping:60", seed);
        const auto a = train(d, {});
        const auto b = train(duplicated(d), {});
        for (std::size_t j = 0; j < d.dims(); ++j) CHECK(std::abs(a.weights(0, j) - b.weights(0, j)) < 1e-6);
        CHECK(std::abs(a.bias[0] - b.bias[0]) < 1e-6);
    }
}

TEST_CASE("well separated Gaussians: close to the Bayes rule") {
    // Independent reference: the Bayes classifier thresholds the first axis at 0.
    const auto train_set = make_two_gaussians(200, 4.0, 2, 5);
    const auto test_set = make_two_gaussians(2000, 4.0, 2, 6);
    const auto m = train(train_set, {});
    std::size_t bayes_correct = 0;
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        const std::string guess = test_set.features(i, 0) > 0.0 ? "+1" : "-1";
        bayes_correct += test_set.class_names[static_cast<std::size_t>(test_set.labels[i])] == guess;
    }
    const double bayes = static_cast<double>(bayes_correct) / test_set.size();
    const double acc = test_accuracy(m, test_set);
    CHECK(bayes > 0.95);
    CHECK(acc >= 0.95);
    CHECK(acc >= bayes - 0.02);
}

TEST_CASE("objective is non-increasing across epochs") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto d = make_named_dataset("moons:80", seed);
        TrainConfig cfg;
        cfg.seed = seed;
        const auto m = train(d, cfg);
        const auto& h = m.objective_history;
        REQUIRE(h.size() >= 1);
        for (std::size_t e = 1; e < h.size(); ++e) REQUIRE(h[e] <= h[e - 1] * (1.0 + 1e-9) + 1e-12);
    }
}

TEST_CASE("single-class training set gives a degenerate constant model") {
    Dataset d;
    d.features = Matrix(3, 2, {1, 2, 3, 4, 5, 6});
    d.labels = {1, 1, 1};
    d.class_names = {"x", "y"};
    const auto m = train(d, {});
    CHECK(m.degenerate);
    CHECK(test_accuracy(m, d) == 1.0);
    CHECK(predict(m, std::vector<double>{-100.0, 3.0}) == 1);
}

TEST_CASE("training is deterministic given the seed") {
    const auto d = make_named_dataset("overlapping:80", 3);
    TrainConfig cfg;
    cfg.seed = 17;
    cfg.max_epochs = 5;
    const auto a = train(d, cfg);
    const auto b = train(d, cfg);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
}

TEST_CASE("decision values") {
    const auto zero = hand_model({0.0, 0.0}, 0.0);
    CHECK(decision_values(zero, std::vector<double>{3.0, -2.0}) == std::vector<double>{0.0});
    const auto biased = hand_model({0.7, -1.3}, 0.25);
    CHECK(decision_values(biased, std::vector<double>{0.0, 0.0}) == std::vector<double>{0.25});
    const auto hand = hand_model({1.0, -1.0}, 0.0);
    CHECK(decision_values(hand, std::vector<double>{2.0, 1.0})[0] == doctest::Approx(1.0));
    CHECK(margin(hand, std::vector<double>{2.0, 1.0}) == doctest::Approx(1.0));
    CHECK_THROWS(decision_values(hand, std::vector<double>{2.0}));
}

TEST_CASE("class probabilities") {
    const auto p = softmax(std::vector<double>{0.3, 0.3, 0.3});
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3));
    const auto q = softmax(std::vector<double>{1000.0, 0.0});
    CHECK(q[0] == doctest::Approx(1.0));
    CHECK(q[1] < 1e-300);
    const auto r = softmax(std::vector<double>{1.0, 0.0});
    CHECK(std::abs(r[0] - 0.73105857863000488) < 1e-15);
    CHECK(std::abs(r[0] + r[1] - 1.0) < 1e-15);
    // binary models feed (0, s): class 1 gets e^s / (1 + e^s)
    const auto hm = hand_model({1.0, 0.0}, 0.0);
    const auto cp = class_probabilities(hm, std::vector<double>{1.0, 5.0});
    CHECK(std::abs(cp[1] - 0.73105857863000488) < 1e-15);
}

TEST_CASE("test accuracy") {
    Dataset d;
    d.features = Matrix(4, 1, {-2.0, -1.0, 1.0, 2.0});
    d.labels = {0, 0, 1, 1};
    d.class_names = {"neg", "pos"};
    CHECK(test_accuracy(hand_model({1.0}, 0.0), d) == 1.0);
    CHECK(test_accuracy(hand_model({0.0}, 1.0), d) == 0.5);

    Dataset three;
    three.features = Matrix(3, 1, {-1.0, 1.0, 2.0});
    three.labels = {0, 1, 0};
    three.class_names = {"neg", "pos"};
    CHECK(test_accuracy(hand_model({1.0}, 0.0), three) == doctest::Approx(2.0 / 3.0));

    Dataset empty;
    empty.class_names = {"neg", "pos"};
    empty.features = Matrix(0, 1);
    CHECK_THROWS(test_accuracy(hand_model({1.0}, 0.0), empty));
}

TEST_CASE("subgradient matches central finite differences away from kinks") {
    const auto d = make_named_dataset("overlapping:40", 9);
    std::vector<double> y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) y[i] = d.labels[i] == 1 ? 1.0 : -1.0;
    auto rng = make_rng(4);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> params(d.dims() + 1);
        for (auto& p : params) p = 2.0 * standard_normal(rng);
        const double h = 1e-6;
        bool near_kink = false;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double s = y[i] * (dot(std::span<const double>(params.data(), d.dims()), d.features.row(i)) +
                                     params.back());
            if (std::abs(1.0 - s) < 1e-3) near_kink = true;
        }
        if (near_kink) continue;
        ++checked;
        const auto g = svm::subgradient(params, d.features, y, 0.7);
        for (std::size_t j = 0; j < params.size(); ++j) {
            auto plus = params, minus = params;
            plus[j] += h;
            minus[j] -= h;
            const double fd = (svm::objective(plus, d.features, y, 0.7) - svm::objective(minus, d.features, y, 0.7)) /
                              (2 * h);
            REQUIRE(std::abs(fd - g[j]) <= 1e-4 * std::max(1.0, std::abs(g[j])));
        }
    }
    CHECK(checked >= 20);
}

TEST_CASE("predictions are invariant to positive rescaling") {
    const auto d = make_named_dataset("moons:60", 2);
    auto m = train(d, {});
    auto scaled = m;
    for (std::size_t j = 0; j < m.dims(); ++j) scaled.weights(0, j) *= 3.7;
    scaled.bias[0] *= 3.7;
    for (std::size_t i = 0; i < d.size(); ++i) REQUIRE(predict(m, d.features.row(i)) == predict(scaled, d.features.row(i)));
}

TEST_CASE("duplicating a far, correctly classified point barely moves accuracy") {
    const auto train_set = make_two_gaussians(100, 3.0, 2, 12);
    const auto test_set = make_two_gaussians(1000, 3.0, 2, 13);
    const auto base = train(train_set, {});
    std::size_t far = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < train_set.size(); ++i) {
        const double s = margin(base, train_set.features.row(i)) * (train_set.labels[i] == 1 ? 1.0 : -1.0);
        if (s > best) best = s, far = i;
    }
    auto bigger = train_set;
    bigger.features.append_row(train_set.features.row(far));
    bigger.labels.push_back(train_set.labels[far]);
    const auto again = train(bigger, {});
    CHECK(std::abs(test_accuracy(base, test_set) - test_accuracy(again, test_set)) <= 0.01);
}

TEST_CASE("one-vs-rest on three blobs") {
    Dataset d;
    d.class_names = {"a", "b", "c"};
    auto rng = make_rng(3);
    const double cx[3] = {0.0, 6.0, 0.0}, cy[3] = {0.0, 0.0, 6.0};
    for (int i = 0; i < 90; ++i) {
        const int c = i % 3;
        d.features.append_row(std::vector<double>{cx[c] + standard_normal(rng), cy[c] + standard_normal(rng)});
        d.labels.push_back(c);
    }
    TrainConfig cfg;
    cfg.regularization = 0.01;
    const auto m = train(d, cfg);
    CHECK(m.weights.rows() == 3);
    CHECK(test_accuracy(m, d) >= 0.95);
    const auto p = class_probabilities(m, d.features.row(0));
    CHECK(p.size() == 3);
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0));
}
