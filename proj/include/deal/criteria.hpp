#pragma once

// Active-learning criteria (the ensemble experts) and the rank/Gibbs
// normalisation that turns their raw scores into advice vectors.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deal/kernels.hpp"
#include "deal/learner.hpp"
#include "deal/matrix.hpp"

namespace deal {

enum class Criterion { us, rs, dff, de, rand };

std::string_view to_string(Criterion c);
Criterion parse_criterion(std::string_view name);
std::vector<Criterion> parse_criteria_list(std::string_view comma_separated);

struct CriterionScores {
    Criterion id = Criterion::rand;
    std::vector<double> raw;                   // one per pool position
    std::vector<std::size_t> preference_order; // pool positions, best first
    bool uniform = false;                      // advice bypasses normalisation (RAND)
};

// Stable ordering by (score, position): descending when higher is better.
std::vector<std::size_t> preference_from(std::span<const double> raw, bool higher_is_better);

// Binary: ascending |margin| (max entropy first). Multiclass: ascending
// best-versus-second-best probability gap.
CriterionScores us_scores(const LinearModel& model, const Matrix& x, std::span<const std::size_t> pool);

struct KMeansResult {
    Matrix centroids;
    std::vector<std::size_t> assignment;  // per input row
    std::vector<std::size_t> sizes;
};

// Lloyd iterations from k-means++ seeding. Empty clusters keep their centroid.
KMeansResult kmeans(const Matrix& x, std::span<const std::size_t> rows, std::size_t k, std::size_t iterations,
                    std::uint64_t seed);

struct RsConfig {
    std::size_t clusters = 10;
    std::size_t iterations = 50;
    std::uint64_t seed = 0;
};

// Cluster the unlabelled points inside the margin band |m| <= 1 (or the K/4
// closest to the boundary if the band is empty) and prefer points nearest
// the centroid of the largest cluster. Binary models only.
CriterionScores rs_scores(const LinearModel& model, const Matrix& x, std::span<const std::size_t> pool,
                          const RsConfig& config);

// Distance to the nearest labelled instance, furthest first.
CriterionScores dff_scores(const Matrix& x, std::span<const std::size_t> labeled, std::span<const std::size_t> pool);

struct GmmConfig {
    std::size_t components = 20;
    std::size_t max_iterations = 100;
    double tolerance = 1e-6;  // on mean log-likelihood per point
    double variance_floor = 1e-6;
    std::uint64_t seed = 0;
};

// Diagonal-covariance EM. Component count is clamped to max(1, n/2) when it
// exceeds the number of rows.
DiagonalGmm fit_gmm(const Matrix& x, std::span<const std::size_t> rows, const GmmConfig& config);

// Highest mixture log-density first.
CriterionScores de_scores(const DiagonalGmm& gmm, const Matrix& x, std::span<const std::size_t> pool);
CriterionScores de_scores(const Matrix& x, std::span<const std::size_t> fit_rows, std::span<const std::size_t> pool,
                          const GmmConfig& config);

CriterionScores rand_scores(std::size_t pool_size);

// Rank r (1-based, best = 1) maps to -exp(-alpha r); output indexed by pool position.
std::vector<double> rank_normalize(const CriterionScores& scores, double alpha);

// exp(-beta s_k) / sum_j exp(-beta s_j), max-shifted.
std::vector<double> gibbs_advice(std::span<const double> normalized, double beta);

// Full normalisation pipeline; RAND yields exact 1/K.
std::vector<double> advice_vector(const CriterionScores& scores, double alpha, double beta);

}  // namespace deal
