#pragma once

// Linear SVM base learner: L2-regularised hinge loss, one-vs-rest for more
// than two classes, solved exactly (to tolerance) by dual coordinate descent.

#include <cstdint>
#include <span>
#include <vector>

#include "deal/dataset.hpp"
#include "deal/matrix.hpp"

namespace deal {

struct TrainConfig {
    double regularization = 1.0;  // lambda in  lambda/2 |w|^2 + mean hinge
    std::size_t max_epochs = 1000;
    double tolerance = 1e-14;  // relative duality gap at which training stops
    std::uint64_t seed = 0;
};

struct LinearModel {
    // One row per scorer: a single row for two classes (positive = class 1),
    // otherwise one row per class.
    Matrix weights;
    std::vector<double> bias;
    std::size_t classes = 0;
    bool degenerate = false;  // trained on a single class; predicts it everywhere
    std::vector<double> objective_history;  // primal objective after each epoch (first scorer)

    bool binary() const { return classes == 2; }
    std::size_t dims() const { return weights.cols(); }
};

LinearModel train(const Matrix& x, std::span<const int> labels, std::size_t classes, const TrainConfig& config);
LinearModel train(const Dataset& labelled, const TrainConfig& config);

// w_c . x + b_c per scorer; one signed score for binary models.
std::vector<double> decision_values(const LinearModel& model, std::span<const double> x);

// Signed binary score (class 1 positive). Multiclass: best minus runner-up score.
double margin(const LinearModel& model, std::span<const double> x);

std::vector<double> softmax(std::span<const double> scores);

// Softmax over class scores; binary models use scores (0, s).
std::vector<double> class_probabilities(const LinearModel& model, std::span<const double> x);

int predict(const LinearModel& model, std::span<const double> x);

double test_accuracy(const LinearModel& model, const Dataset& test);

namespace svm {

// Binary primal objective over params = (w_1..w_d, b) with y in {-1, +1}:
//   lambda/2 (|w|^2 + b^2) + 1/n sum max(0, 1 - y (w.x + b))
double objective(std::span<const double> params, const Matrix& x, std::span<const double> y, double lambda);
std::vector<double> subgradient(std::span<const double> params, const Matrix& x, std::span<const double> y,
                                double lambda);

}  // namespace svm
}  // namespace deal
