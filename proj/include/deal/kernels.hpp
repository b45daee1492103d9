#pragma once

// Data-parallel inner loops over pool instances. Every kernel writes each
// output element independently, so the OpenMP versions are bit-identical to
// the serial reference versions kept in deal::reference.

#include <span>
#include <vector>

#include "deal/matrix.hpp"

namespace deal {

struct DiagonalGmm {
    std::vector<double> log_weights;  // per component
    Matrix means;                     // components x d
    Matrix variances;                 // components x d

    std::size_t components() const { return means.rows(); }
};

// Euclidean distance from each candidate row to its nearest anchor row.
std::vector<double> min_distances(const Matrix& x, std::span<const std::size_t> candidates,
                                  std::span<const std::size_t> anchors);

// Euclidean distance from each listed row to a point.
std::vector<double> distances_to(const Matrix& x, std::span<const std::size_t> rows, std::span<const double> point);

// Index (into centroids) of the nearest centroid for each listed row; ties go to the lower index.
std::vector<std::size_t> nearest_centroid(const Matrix& x, std::span<const std::size_t> rows, const Matrix& centroids);

// Per-component log(pi_c N(x | mu_c, diag var_c)) for each listed row (rows x components).
Matrix component_log_densities(const DiagonalGmm& gmm, const Matrix& x, std::span<const std::size_t> rows);

// Mixture log-density for each listed row.
std::vector<double> gmm_log_density(const DiagonalGmm& gmm, const Matrix& x, std::span<const std::size_t> rows);

double log_sum_exp(std::span<const double> v);

namespace reference {

std::vector<double> min_distances(const Matrix& x, std::span<const std::size_t> candidates,
                                  std::span<const std::size_t> anchors);
std::vector<double> distances_to(const Matrix& x, std::span<const std::size_t> rows, std::span<const double> point);
std::vector<std::size_t> nearest_centroid(const Matrix& x, std::span<const std::size_t> rows, const Matrix& centroids);
Matrix component_log_densities(const DiagonalGmm& gmm, const Matrix& x, std::span<const std::size_t> rows);
std::vector<double> gmm_log_density(const DiagonalGmm& gmm, const Matrix& x, std::span<const std::size_t> rows);

}  // namespace reference
}  // namespace deal
