#include "deal/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "deal/diagnostics.hpp"

namespace deal {

AdviceMatrix::AdviceMatrix(std::size_t experts, std::size_t arms, std::vector<double> entries)
    : experts_(experts), arms_(arms), entries_(std::move(entries)) {
    if (experts_ < 2) throw std::invalid_argument("advice matrix needs at least 2 experts");
    if (arms_ < 1) throw std::invalid_argument("advice matrix needs at least 1 arm");
    if (entries_.size() != experts_ * arms_) throw std::invalid_argument("advice matrix size mismatch");
    for (std::size_t n = 0; n < experts_; ++n) {
        double sum = 0.0;
        for (double v : row(n)) {
            if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("advice entry outside [0,1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            std::ostringstream os;
            os << "advice row " << n << " sums to " << sum;
            throw std::invalid_argument(os.str());
        }
    }
}

AdviceMatrix AdviceMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("advice matrix needs at least 2 experts");
    const std::size_t arms = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * arms);
    for (const auto& r : rows) {
        if (r.size() != arms) throw std::invalid_argument("ragged advice rows");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return AdviceMatrix(rows.size(), arms, std::move(flat));
}

BanditState BanditState::initial(std::size_t experts, double gamma, std::size_t delta_T) {
    if (experts < 1) throw std::invalid_argument("bandit needs at least one expert");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");
    if (delta_T < 1) throw std::invalid_argument("batch size must be >= 1");
    BanditState s;
    s.weights.assign(experts, 1.0);
    s.gamma = gamma;
    s.delta_T = delta_T;
    return s;
}

ArmDistribution::ArmDistribution(std::vector<double> probs, double gamma)
    : probs_(std::move(probs)), gamma_(gamma) {
    if (probs_.empty()) throw std::invalid_argument("empty arm distribution");
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("invalid arm probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("degenerate arm distribution");
}

ArmDistribution mix_probabilities(const BanditState& state, const AdviceMatrix& advice) {
    if (advice.experts() != state.experts())
        throw std::invalid_argument("advice expert count does not match bandit state");
    double total = 0.0;
    for (double w : state.weights) {
        if (!std::isfinite(w) || !(w > 0.0)) throw std::invalid_argument("bandit weight not finite and positive");
        total += w;
    }
    const std::size_t arms = advice.arms();
    const double floor = state.gamma / static_cast<double>(arms);
    std::vector<double> p(arms, 0.0);
    for (std::size_t n = 0; n < advice.experts(); ++n) {
        const double share = state.weights[n] / total;
        auto row = advice.row(n);
        for (std::size_t k = 0; k < arms; ++k) p[k] += share * row[k];
    }
    for (double& v : p) v = (1.0 - state.gamma) * v + floor;
    return ArmDistribution(std::move(p), state.gamma);
}

std::size_t sample_arm(const ArmDistribution& dist, Rng& rng) {
    const auto& p = dist.probs();
    const double u = uniform01(rng);
    double cum = 0.0;
    std::size_t last_positive = p.size();
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] > 0.0) last_positive = k;
        cum += p[k];
        if (u < cum && p[k] > 0.0) return k;
    }
    if (last_positive == p.size()) throw std::invalid_argument("degenerate arm distribution");
    return last_positive;  // u landed in the rounding slack above the final partial sum
}

EstimatedRewardVector estimate_rewards(double reward, std::size_t chosen, const ArmDistribution& dist) {
    if (chosen >= dist.arms()) throw std::out_of_range("chosen arm out of range");
    if (!(dist[chosen] > 0.0)) throw std::invalid_argument("chosen arm has zero probability");
    if (!(reward >= 0.0 && reward <= 1.0)) throw std::invalid_argument("reward outside [0,1]");
    EstimatedRewardVector est{std::vector<double>(dist.arms(), 0.0)};
    est.values[chosen] = reward / dist[chosen];
    return est;
}

std::vector<double> expert_payoff_estimates(const AdviceMatrix& advice, const EstimatedRewardVector& est) {
    if (est.values.size() != advice.arms()) throw std::invalid_argument("reward estimate length mismatch");
    std::vector<double> y(advice.experts(), 0.0);
    for (std::size_t n = 0; n < advice.experts(); ++n) {
        auto row = advice.row(n);
        double acc = 0.0;
        for (std::size_t k = 0; k < advice.arms(); ++k) acc += row[k] * est.values[k];
        y[n] = acc;
    }
    return y;
}

BanditState update_weights(BanditState state, std::span<const double> payoffs, std::size_t arms) {
    if (payoffs.size() != state.experts()) throw std::invalid_argument("payoff length mismatch");
    if (arms < 1) throw std::invalid_argument("arm count must be >= 1");
    const double rate = state.gamma / static_cast<double>(arms);
    // Work in the log domain so a single huge payoff cannot overflow before rescaling.
    std::vector<double> logw(state.experts());
    for (std::size_t n = 0; n < state.experts(); ++n) {
        if (!std::isfinite(payoffs[n])) throw std::invalid_argument("non-finite expert payoff");
        if (!(state.weights[n] > 0.0)) throw std::invalid_argument("bandit weight not positive");
        logw[n] = std::log(state.weights[n]) + rate * payoffs[n];
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    for (std::size_t n = 0; n < state.experts(); ++n) {
        // Floor keeps every weight strictly positive after extreme payoffs.
        state.weights[n] = std::max(std::exp(logw[n] - top), std::numeric_limits<double>::min());
    }
    return state;
}

BanditState advance_and_maybe_restart(BanditState state) {
    state.tau += 1;
    if (state.tau > state.delta_T) {
        state.tau = 1;
        state.epoch += 1;
        std::fill(state.weights.begin(), state.weights.end(), 1.0);
    }
    return state;
}

BanditState learn_from_reward(BanditState state, const AdviceMatrix& advice, const ArmDistribution& dist,
                              std::size_t chosen, double reward) {
    const auto est = estimate_rewards(reward, chosen, dist);
    const auto payoffs = expert_payoff_estimates(advice, est);
    state = update_weights(std::move(state), payoffs, advice.arms());
    return advance_and_maybe_restart(std::move(state));
}

std::size_t theoretical_batch_size(double horizon, double variation_budget, std::size_t experts, std::size_t arms) {
    if (!(horizon >= 1.0)) throw std::invalid_argument("horizon must be >= 1");
    if (experts < 2 || arms < 2) throw std::invalid_argument("batch size formula needs N >= 2 and K >= 2");
    if (!(variation_budget > 0.0)) throw std::invalid_argument("variation budget must be positive");
    const double a = static_cast<double>(std::min(experts, arms));
    if (variation_budget < 1.0 / a || variation_budget > horizon / a) {
        std::ostringstream os;
        os << "variation budget " << variation_budget << " outside [1/A, T/A] = [" << 1.0 / a << ", "
           << horizon / a << "]";
        warn(os.str());
    }
    const double raw = std::cbrt(a * std::log(static_cast<double>(experts))) *
                       std::pow(horizon / variation_budget, 2.0 / 3.0);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw)));
}

double theoretical_gamma(std::size_t delta_T, std::size_t experts, std::size_t arms) {
    if (delta_T < 1) throw std::invalid_argument("batch size must be >= 1");
    if (experts < 2) throw std::invalid_argument("gamma formula needs N >= 2");
    const double a = static_cast<double>(std::min(experts, std::max<std::size_t>(arms, 1)));
    const double g = std::sqrt(a * std::log(static_cast<double>(experts)) /
                               ((std::numbers::e - 1.0) * static_cast<double>(delta_T)));
    return std::min(1.0, g);
}

}  // namespace deal
