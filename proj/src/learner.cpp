#include "deal/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "deal/random.hpp"

namespace deal {
namespace {

struct BinaryFit {
    std::vector<double> w;
    double b = 0.0;
    std::vector<double> history;
};

// Dual coordinate descent for  1/2 |w~|^2 + C sum hinge  with C = 1/(lambda n)
// and the bias folded in as a constant feature. Scaling back by lambda gives
// the mean-hinge objective, which is invariant to duplicating the data.
BinaryFit fit_binary(const Matrix& x, std::span<const double> y, const TrainConfig& cfg) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const double C = 1.0 / (cfg.regularization * static_cast<double>(n));

    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = dot(x.row(i), x.row(i)) + 1.0;

    std::vector<double> alpha(n, 0.0);
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(cfg.seed, 0x5e3);

    BinaryFit fit;
    double best_primal = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        shuffle(order, rng);
        for (std::size_t i : order) {
            const double g = y[i] * (dot(w, x.row(i)) + b) - 1.0;
            const double a_old = alpha[i];
            const double a_new = std::clamp(a_old - g / q[i], 0.0, C);
            const double delta = (a_new - a_old) * y[i];
            if (delta == 0.0) continue;
            alpha[i] = a_new;
            auto xi = x.row(i);
            for (std::size_t j = 0; j < d; ++j) w[j] += delta * xi[j];
            b += delta;
        }

        double hinge = 0.0;
        for (std::size_t i = 0; i < n; ++i) hinge += std::max(0.0, 1.0 - y[i] * (dot(w, x.row(i)) + b));
        const double norm2 = dot(w, w) + b * b;
        const double primal = 0.5 * norm2 + C * hinge;
        const double dual = std::accumulate(alpha.begin(), alpha.end(), 0.0) - 0.5 * norm2;
        // Coordinate steps increase the dual monotonically but the primal can
        // wobble, so the best primal iterate is the one kept and reported.
        if (primal < best_primal) {
            best_primal = primal;
            fit.w = w;
            fit.b = b;
        }
        fit.history.push_back(cfg.regularization * best_primal);
        if (primal - dual <= cfg.tolerance * std::max(1.0, std::abs(primal))) break;
    }
    if (fit.w.empty()) {
        fit.w = std::move(w);
        fit.b = b;
    }
    return fit;
}

LinearModel constant_model(std::size_t classes, std::size_t dims, int only_class) {
    LinearModel m;
    m.classes = classes;
    m.degenerate = true;
    if (classes == 2) {
        m.weights = Matrix(1, dims);
        m.bias = {only_class == 1 ? 1.0 : -1.0};
    } else {
        m.weights = Matrix(classes, dims);
        m.bias.assign(classes, -1.0);
        m.bias[static_cast<std::size_t>(only_class)] = 1.0;
    }
    return m;
}

}  // namespace

LinearModel train(const Matrix& x, std::span<const int> labels, std::size_t classes, const TrainConfig& config) {
    if (!(config.regularization > 0.0)) throw std::invalid_argument("regularization must be > 0");
    if (config.max_epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (classes < 2) throw std::invalid_argument("need at least two classes");
    if (labels.size() != x.rows() || labels.empty()) throw std::invalid_argument("training set is empty or ragged");
    for (double v : x.data())
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");

    std::vector<bool> present(classes, false);
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= classes) throw std::invalid_argument("label out of range");
        present[static_cast<std::size_t>(l)] = true;
    }
    if (std::count(present.begin(), present.end(), true) < 2) return constant_model(classes, x.cols(), labels[0]);

    LinearModel m;
    m.classes = classes;
    const std::size_t scorers = classes == 2 ? 1 : classes;
    m.weights = Matrix(scorers, x.cols());
    m.bias.assign(scorers, 0.0);
    std::vector<double> y(labels.size());
    for (std::size_t s = 0; s < scorers; ++s) {
        const int positive = classes == 2 ? 1 : static_cast<int>(s);
        for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == positive ? 1.0 : -1.0;
        TrainConfig cfg = config;
        cfg.seed = config.seed + s;
        auto fit = fit_binary(x, y, cfg);
        std::copy(fit.w.begin(), fit.w.end(), m.weights.row(s).begin());
        m.bias[s] = fit.b;
        if (s == 0) m.objective_history = std::move(fit.history);
    }
    return m;
}

LinearModel train(const Dataset& labelled, const TrainConfig& config) {
    return train(labelled.features, labelled.labels, labelled.classes(), config);
}

std::vector<double> decision_values(const LinearModel& model, std::span<const double> x) {
    if (x.size() != model.dims()) throw std::invalid_argument("instance dimension mismatch");
    std::vector<double> s(model.weights.rows());
    for (std::size_t c = 0; c < s.size(); ++c) s[c] = dot(model.weights.row(c), x) + model.bias[c];
    return s;
}

double margin(const LinearModel& model, std::span<const double> x) {
    auto s = decision_values(model, x);
    if (model.binary()) return s[0];
    std::partial_sort(s.begin(), s.begin() + 2, s.end(), std::greater<>());
    return s[0] - s[1];
}

std::vector<double> softmax(std::span<const double> scores) {
    const double top = *std::max_element(scores.begin(), scores.end());
    std::vector<double> p(scores.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) z += (p[i] = std::exp(scores[i] - top));
    for (double& v : p) v /= z;
    return p;
}

std::vector<double> class_probabilities(const LinearModel& model, std::span<const double> x) {
    auto s = decision_values(model, x);
    if (model.binary()) {
        const double pair[2] = {0.0, s[0]};
        return softmax(pair);
    }
    return softmax(s);
}

int predict(const LinearModel& model, std::span<const double> x) {
    auto s = decision_values(model, x);
    if (model.binary()) return s[0] > 0.0 ? 1 : 0;
    return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

double test_accuracy(const LinearModel& model, const Dataset& test) {
    if (test.size() == 0) throw std::invalid_argument("empty test set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i)
        if (predict(model, test.features.row(i)) == test.labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

namespace svm {

double objective(std::span<const double> params, const Matrix& x, std::span<const double> y, double lambda) {
    const std::size_t d = x.cols();
    auto w = params.first(d);
    const double b = params[d];
    double hinge = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) hinge += std::max(0.0, 1.0 - y[i] * (dot(w, x.row(i)) + b));
    return 0.5 * lambda * (dot(w, w) + b * b) + hinge / static_cast<double>(x.rows());
}

std::vector<double> subgradient(std::span<const double> params, const Matrix& x, std::span<const double> y,
                                double lambda) {
    const std::size_t d = x.cols();
    auto w = params.first(d);
    const double b = params[d];
    std::vector<double> g(params.begin(), params.end());
    for (double& v : g) v *= lambda;
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (1.0 - y[i] * (dot(w, x.row(i)) + b) <= 0.0) continue;
        auto xi = x.row(i);
        for (std::size_t j = 0; j < d; ++j) g[j] -= inv_n * y[i] * xi[j];
        g[d] -= inv_n * y[i];
    }
    return g;
}

}  // namespace svm
}  // namespace deal
