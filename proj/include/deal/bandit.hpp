#pragma once

// Exponential-weight bandit with expert advice (EXP4) and its restarting
// variant. State transitions are pure: every update returns a new state.

#include <cstddef>
#include <span>
#include <vector>

#include "deal/random.hpp"

namespace deal {

// N x K row-stochastic table: row n is expert n's distribution over arms.
class AdviceMatrix {
public:
    AdviceMatrix(std::size_t experts, std::size_t arms, std::vector<double> entries);
    static AdviceMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t experts() const { return experts_; }
    std::size_t arms() const { return arms_; }
    double operator()(std::size_t expert, std::size_t arm) const { return entries_[expert * arms_ + arm]; }
    std::span<const double> row(std::size_t expert) const {
        return {entries_.data() + expert * arms_, arms_};
    }

private:
    std::size_t experts_;
    std::size_t arms_;
    std::vector<double> entries_;
};

struct BanditState {
    std::vector<double> weights;
    std::size_t tau = 1;     // 1-based position inside the current batch
    std::size_t epoch = 1;   // batch index
    double gamma = 1.0;
    std::size_t delta_T = 1;

    static BanditState initial(std::size_t experts, double gamma, std::size_t delta_T);
    std::size_t experts() const { return weights.size(); }
};

class ArmDistribution {
public:
    ArmDistribution(std::vector<double> probs, double gamma);

    std::size_t arms() const { return probs_.size(); }
    double operator[](std::size_t k) const { return probs_[k]; }
    const std::vector<double>& probs() const { return probs_; }
    double gamma() const { return gamma_; }

private:
    std::vector<double> probs_;
    double gamma_;
};

struct EstimatedRewardVector {
    std::vector<double> values;
};

// p_k = (1 - gamma) * sum_n w_n xi^n_k / W + gamma / K
ArmDistribution mix_probabilities(const BanditState& state, const AdviceMatrix& advice);

// Inverse-CDF draw; consumes exactly one uniform from the stream.
std::size_t sample_arm(const ArmDistribution& dist, Rng& rng);

// Importance-weighted estimate: only the pulled arm is nonzero.
EstimatedRewardVector estimate_rewards(double reward, std::size_t chosen, const ArmDistribution& dist);

std::vector<double> expert_payoff_estimates(const AdviceMatrix& advice, const EstimatedRewardVector& est);

// w_n <- w_n exp(gamma * y_n / K), then rescaled so max(w) = 1.
BanditState update_weights(BanditState state, std::span<const double> payoffs, std::size_t arms);

// tau <- tau + 1; once tau exceeds delta_T the batch restarts with unit weights.
BanditState advance_and_maybe_restart(BanditState state);

// Batch size and exploration rate that minimise the dynamic-regret bound.
// A = min(N, K); natural logarithm throughout.
std::size_t theoretical_batch_size(double horizon, double variation_budget, std::size_t experts, std::size_t arms);
double theoretical_gamma(std::size_t delta_T, std::size_t experts, std::size_t arms);

// Reward estimation, payoff estimation, weight update and batch advance for
// the arm just pulled; shared by the synthetic simulator and the active learner.
BanditState learn_from_reward(BanditState state, const AdviceMatrix& advice, const ArmDistribution& dist,
                              std::size_t chosen, double reward);

}  // namespace deal
