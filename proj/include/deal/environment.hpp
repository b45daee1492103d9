#pragma once

// Synthetic expert-advice bandit environments with a computable variation
// budget, oracle returns, and regret of EXP4 / REXP4 runs against them.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deal/bandit.hpp"
#include "deal/matrix.hpp"

namespace deal {

enum class NoiseModel { none, bernoulli };

// Expected reward of every expert at every step: rows are steps, columns experts.
using ExpertRewardTable = Matrix;

class SyntheticEnvironment {
public:
    // arm_means is T x K; advice holds either one matrix (fixed archetypes)
    // or one per step.
    SyntheticEnvironment(Matrix arm_means, std::vector<AdviceMatrix> advice, NoiseModel noise);

    std::size_t horizon() const { return arm_means_.rows(); }
    std::size_t experts() const { return advice_.front().experts(); }
    std::size_t arms() const { return arm_means_.cols(); }
    NoiseModel noise() const { return noise_; }

    const AdviceMatrix& advice_at(std::size_t t) const { return advice_.size() == 1 ? advice_[0] : advice_[t]; }
    double arm_mean(std::size_t t, std::size_t k) const { return arm_means_(t, k); }
    const Matrix& arm_means() const { return arm_means_; }
    const ExpertRewardTable& expected_expert_rewards() const { return expert_rewards_; }

    // Reward of arm k at step t: the mean itself when noise-free, otherwise a
    // Bernoulli draw with that mean.
    double realize(std::size_t t, std::size_t k, Rng& rng) const;

private:
    Matrix arm_means_;
    std::vector<AdviceMatrix> advice_;
    NoiseModel noise_;
    ExpertRewardTable expert_rewards_;
};

// Each expert is a point mass on its own favoured arm. The favoured arm of
// one expert pays (1+gap)/2 while every other arm pays (1-gap)/2, and the
// identity of that best expert rotates every segment_length steps.
// Requires K >= N.
SyntheticEnvironment make_switching_env(std::size_t horizon, std::size_t experts, std::size_t arms,
                                        std::size_t segment_length, double gap, NoiseModel noise,
                                        std::uint64_t seed);

// Point-mass experts whose favoured-arm means follow phase-shifted triangle
// waves in [0.2, 0.8], all moving at total_drift/(T-1) per step; arms nobody
// favours pay 0.2. Requires K >= N.
SyntheticEnvironment make_drifting_env(std::size_t horizon, std::size_t experts, std::size_t arms,
                                       double total_drift, NoiseModel noise, std::uint64_t seed);

// sum_{t<T} max_n |y_t^n - y_{t+1}^n|
double variation(const ExpertRewardTable& y);
double variation(const SyntheticEnvironment& env);

// sum_t max_n y_t^n
double dynamic_oracle_return(const ExpertRewardTable& y);
double dynamic_oracle_return(const SyntheticEnvironment& env);

// max_n sum_t y_t^n
double static_oracle_return(const ExpertRewardTable& y);
double static_oracle_return(const SyntheticEnvironment& env);

// Steps stacked vertically; both tables must have the same expert count.
ExpertRewardTable concatenate(const ExpertRewardTable& first, const ExpertRewardTable& second);

struct PolicyConfig {
    std::string name;
    std::size_t delta_T = 1;
    std::optional<double> gamma;  // defaults to theoretical_gamma(delta_T, N, K)

    static PolicyConfig exp4(std::size_t horizon);
    static PolicyConfig rexp4(std::size_t delta_T);
    double resolved_gamma(std::size_t experts, std::size_t arms) const;
};

struct BanditStep {
    std::size_t chosen;
    double p_chosen;
    double realized_reward;
    double expected_reward;  // y_t^pi = sum_k p_k mu_k
    std::vector<double> expert_shares;  // w_n / W used to mix this step
    bool restarted;
};

struct RegretReport {
    double dynamic_regret = 0.0;
    double static_regret = 0.0;
    std::vector<double> per_step_trace;         // cumulative dynamic regret
    std::vector<double> per_step_static_trace;  // cumulative regret vs the hindsight-best expert
};

struct PolicyRun {
    std::vector<BanditStep> trace;
    RegretReport regret;
};

PolicyRun run_policy(const SyntheticEnvironment& env, const PolicyConfig& policy, std::uint64_t seed);

// Independent runs for each seed; parallel over seeds, results in seed order.
std::vector<PolicyRun> run_policy_seeds(const SyntheticEnvironment& env, const PolicyConfig& policy,
                                        const std::vector<std::uint64_t>& seeds);

namespace reference {
std::vector<PolicyRun> run_policy_seeds(const SyntheticEnvironment& env, const PolicyConfig& policy,
                                        const std::vector<std::uint64_t>& seeds);
}

}  // namespace deal
