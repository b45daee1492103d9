#include "deal/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "deal/random.hpp"

namespace deal {

std::string_view to_string(Criterion c) {
    switch (c) {
        case Criterion::us: return "us";
        case Criterion::rs: return "rs";
        case Criterion::dff: return "dff";
        case Criterion::de: return "de";
        case Criterion::rand: return "rand";
    }
    return "?";
}

Criterion parse_criterion(std::string_view name) {
    for (auto c : {Criterion::us, Criterion::rs, Criterion::dff, Criterion::de, Criterion::rand})
        if (name == to_string(c)) return c;
    throw std::invalid_argument("unknown criterion '" + std::string(name) + "'");
}

std::vector<Criterion> parse_criteria_list(std::string_view list) {
    std::vector<Criterion> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        auto comma = list.find(',', pos);
        if (comma == std::string_view::npos) comma = list.size();
        auto tok = list.substr(pos, comma - pos);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        if (!tok.empty()) out.push_back(parse_criterion(tok));
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty criteria list");
    return out;
}

std::vector<std::size_t> preference_from(std::span<const double> raw, bool higher_is_better) {
    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return higher_is_better ? raw[a] > raw[b] : raw[a] < raw[b];
    });
    return order;
}

CriterionScores us_scores(const LinearModel& model, const Matrix& x, std::span<const std::size_t> pool) {
    CriterionScores s;
    s.id = Criterion::us;
    s.raw.reserve(pool.size());
    for (auto i : pool) {
        if (model.binary()) {
            s.raw.push_back(std::abs(margin(model, x.row(i))));
        } else {
            auto p = class_probabilities(model, x.row(i));
            std::partial_sort(p.begin(), p.begin() + 2, p.end(), std::greater<>());
            s.raw.push_back(p[0] - p[1]);
        }
    }
    s.preference_order = preference_from(s.raw, false);
    return s;
}

KMeansResult kmeans(const Matrix& x, std::span<const std::size_t> rows, std::size_t k, std::size_t iterations,
                    std::uint64_t seed) {
    if (rows.empty()) throw std::invalid_argument("k-means needs at least one point");
    k = std::clamp<std::size_t>(k, 1, rows.size());
    const std::size_t d = x.cols();
    Rng rng = make_rng(seed, 0xc1u);

    // k-means++ seeding
    Matrix centroids(k, d);
    std::size_t first = rows[uniform_index(rng, rows.size())];
    std::copy_n(x.row(first).begin(), d, centroids.row(0).begin());
    std::vector<double> d2(rows.size(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            d2[i] = std::min(d2[i], squared_distance(x.row(rows[i]), centroids.row(c - 1)));
            total += d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double u = uniform01(rng) * total;
            double cum = 0.0;
            pick = rows.size() - 1;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                cum += d2[i];
                if (u < cum && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = uniform_index(rng, rows.size());
        }
        std::copy_n(x.row(rows[pick]).begin(), d, centroids.row(c).begin());
    }

    KMeansResult res;
    for (std::size_t it = 0; it < iterations; ++it) {
        auto assignment = nearest_centroid(x, rows, centroids);
        const bool stable = assignment == res.assignment;
        res.assignment = std::move(assignment);
        if (stable) break;
        Matrix sums(k, d);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto c = res.assignment[i];
            ++counts[c];
            auto p = x.row(rows[i]);
            for (std::size_t j = 0; j < d; ++j) sums(c, j) += p[j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < d; ++j) centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
        }
    }
    if (res.assignment.empty()) res.assignment = nearest_centroid(x, rows, centroids);
    res.centroids = std::move(centroids);
    res.sizes.assign(k, 0);
    for (auto c : res.assignment) ++res.sizes[c];
    return res;
}

CriterionScores rs_scores(const LinearModel& model, const Matrix& x, std::span<const std::size_t> pool,
                          const RsConfig& config) {
    if (!model.binary()) throw std::invalid_argument("representative sampling needs a binary model");
    if (pool.empty()) throw std::invalid_argument("empty pool");
    std::vector<double> abs_margin;
    abs_margin.reserve(pool.size());
    for (auto i : pool) abs_margin.push_back(std::abs(margin(model, x.row(i))));

    std::vector<std::size_t> band;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (abs_margin[i] <= 1.0) band.push_back(pool[i]);
    if (band.empty()) {
        const auto order = preference_from(abs_margin, false);
        const std::size_t take = std::max<std::size_t>(1, pool.size() / 4);
        for (std::size_t r = 0; r < take; ++r) band.push_back(pool[order[r]]);
    }

    const auto km = kmeans(x, band, config.clusters, config.iterations, config.seed);
    const std::size_t largest =
        static_cast<std::size_t>(std::max_element(km.sizes.begin(), km.sizes.end()) - km.sizes.begin());

    CriterionScores s;
    s.id = Criterion::rs;
    s.raw = distances_to(x, pool, km.centroids.row(largest));
    s.preference_order = preference_from(s.raw, false);
    return s;
}

CriterionScores dff_scores(const Matrix& x, std::span<const std::size_t> labeled, std::span<const std::size_t> pool) {
    if (labeled.empty()) throw std::invalid_argument("furthest-first needs at least one labelled instance");
    CriterionScores s;
    s.id = Criterion::dff;
    s.raw = min_distances(x, pool, labeled);
    s.preference_order = preference_from(s.raw, true);
    return s;
}

DiagonalGmm fit_gmm(const Matrix& x, std::span<const std::size_t> rows, const GmmConfig& config) {
    const std::size_t n = rows.size();
    if (n < 2) throw std::invalid_argument("density estimate needs at least 2 points");
    std::size_t k = config.components;
    if (k > n) k = std::max<std::size_t>(1, n / 2);
    const std::size_t d = x.cols();

    // Global per-dimension variance seeds every component.
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (auto r : rows)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(r, j);
    for (double& m : mean) m /= static_cast<double>(n);
    for (auto r : rows)
        for (std::size_t j = 0; j < d; ++j) var[j] += (x(r, j) - mean[j]) * (x(r, j) - mean[j]);
    for (double& v : var) v = std::max(v / static_cast<double>(n), config.variance_floor);

    DiagonalGmm gmm;
    gmm.means = kmeans(x, rows, k, 0, config.seed).centroids;  // seeding only
    k = gmm.means.rows();
    gmm.variances = Matrix(k, d);
    for (std::size_t c = 0; c < k; ++c) std::copy(var.begin(), var.end(), gmm.variances.row(c).begin());
    gmm.log_weights.assign(k, -std::log(static_cast<double>(k)));

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < config.max_iterations; ++it) {
        Matrix resp = component_log_densities(gmm, x, rows);
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto row = resp.row(i);
            const double lse = log_sum_exp(row);
            ll += lse;
            for (double& v : row) v = std::exp(v - lse);
        }
        ll /= static_cast<double>(n);

        const long kc = static_cast<long>(k);
#pragma omp parallel for schedule(static)
        for (long ci = 0; ci < kc; ++ci) {
            const auto c = static_cast<std::size_t>(ci);
            double nc = 0.0;
            for (std::size_t i = 0; i < n; ++i) nc += resp(i, c);
            if (nc < 1e-10) continue;  // starved component keeps its parameters
            gmm.log_weights[c] = std::log(nc / static_cast<double>(n));
            for (std::size_t j = 0; j < d; ++j) {
                double m = 0.0;
                for (std::size_t i = 0; i < n; ++i) m += resp(i, c) * x(rows[i], j);
                m /= nc;
                double v = 0.0;
                for (std::size_t i = 0; i < n; ++i) v += resp(i, c) * (x(rows[i], j) - m) * (x(rows[i], j) - m);
                gmm.means(c, j) = m;
                gmm.variances(c, j) = std::max(v / nc, config.variance_floor);
            }
        }
        // Renormalise mixing weights (starved components keep their old share).
        const double lz = log_sum_exp(gmm.log_weights);
        for (double& lw : gmm.log_weights) lw -= lz;

        if (std::abs(ll - prev_ll) < config.tolerance) break;
        prev_ll = ll;
    }
    return gmm;
}

CriterionScores de_scores(const DiagonalGmm& gmm, const Matrix& x, std::span<const std::size_t> pool) {
    CriterionScores s;
    s.id = Criterion::de;
    s.raw = gmm_log_density(gmm, x, pool);
    s.preference_order = preference_from(s.raw, true);
    return s;
}

CriterionScores de_scores(const Matrix& x, std::span<const std::size_t> fit_rows, std::span<const std::size_t> pool,
                          const GmmConfig& config) {
    return de_scores(fit_gmm(x, fit_rows, config), x, pool);
}

CriterionScores rand_scores(std::size_t pool_size) {
    CriterionScores s;
    s.id = Criterion::rand;
    s.raw.assign(pool_size, 0.0);
    s.preference_order.resize(pool_size);
    std::iota(s.preference_order.begin(), s.preference_order.end(), 0);
    s.uniform = true;
    return s;
}

std::vector<double> rank_normalize(const CriterionScores& scores, double alpha) {
    const auto& order = scores.preference_order;
    std::vector<double> out(order.size(), 0.0);
    std::vector<bool> seen(order.size(), false);
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (order[r] >= order.size() || seen[order[r]]) throw std::invalid_argument("preference order is not a permutation");
        seen[order[r]] = true;
        out[order[r]] = -std::exp(-alpha * static_cast<double>(r + 1));
    }
    return out;
}

std::vector<double> gibbs_advice(std::span<const double> normalized, double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    if (normalized.empty()) return {};
    std::vector<double> e(normalized.size());
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = -beta * normalized[k];
    const double top = *std::max_element(e.begin(), e.end());
    double z = 0.0;
    for (double& v : e) z += (v = std::exp(v - top));
    for (double& v : e) v /= z;
    return e;
}

std::vector<double> advice_vector(const CriterionScores& scores, double alpha, double beta) {
    const std::size_t K = scores.preference_order.size();
    if (scores.uniform) return std::vector<double>(K, 1.0 / static_cast<double>(K));
    return gibbs_advice(rank_normalize(scores, alpha), beta);
}

}  // namespace deal
