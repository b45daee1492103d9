#include "deal/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <omp.h>

namespace deal {
namespace {

ExpertRewardTable compute_expert_rewards(const Matrix& means, const std::vector<AdviceMatrix>& advice) {
    const std::size_t steps = means.rows();
    const std::size_t experts = advice.front().experts();
    ExpertRewardTable y(steps, experts);
    for (std::size_t t = 0; t < steps; ++t) {
        const AdviceMatrix& xi = advice.size() == 1 ? advice[0] : advice[t];
        for (std::size_t n = 0; n < experts; ++n) y(t, n) = dot(xi.row(n), means.row(t));
    }
    return y;
}

AdviceMatrix point_mass_advice(const std::vector<std::size_t>& favoured, std::size_t arms) {
    std::vector<double> flat(favoured.size() * arms, 0.0);
    for (std::size_t n = 0; n < favoured.size(); ++n) flat[n * arms + favoured[n]] = 1.0;
    return AdviceMatrix(favoured.size(), arms, std::move(flat));
}

std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    shuffle(p, rng);
    return p;
}

void check_shape(std::size_t horizon, std::size_t experts, std::size_t arms) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (experts < 2) throw std::invalid_argument("environment needs at least 2 experts");
    if (arms < experts) throw std::invalid_argument("environment needs at least as many arms as experts");
}

// Triangle wave of period 1.2 in travel distance, range [0, 0.6].
double triangle(double distance) {
    const double m = std::fmod(distance, 1.2);
    return m <= 0.6 ? m : 1.2 - m;
}

}  // namespace

SyntheticEnvironment::SyntheticEnvironment(Matrix arm_means, std::vector<AdviceMatrix> advice, NoiseModel noise)
    : arm_means_(std::move(arm_means)), advice_(std::move(advice)), noise_(noise) {
    if (arm_means_.rows() < 1) throw std::invalid_argument("environment horizon must be >= 1");
    if (advice_.empty()) throw std::invalid_argument("environment needs advice");
    if (advice_.size() != 1 && advice_.size() != arm_means_.rows())
        throw std::invalid_argument("advice sequence length must be 1 or the horizon");
    for (const auto& a : advice_) {
        if (a.arms() != arm_means_.cols()) throw std::invalid_argument("advice arm count mismatch");
        if (a.experts() != advice_.front().experts()) throw std::invalid_argument("advice expert count changes");
    }
    for (double m : arm_means_.data())
        if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("arm mean outside [0,1]");
    expert_rewards_ = compute_expert_rewards(arm_means_, advice_);
}

double SyntheticEnvironment::realize(std::size_t t, std::size_t k, Rng& rng) const {
    const double mu = arm_means_(t, k);
    if (noise_ == NoiseModel::none) return mu;
    return uniform01(rng) < mu ? 1.0 : 0.0;
}

SyntheticEnvironment make_switching_env(std::size_t horizon, std::size_t experts, std::size_t arms,
                                        std::size_t segment_length, double gap, NoiseModel noise,
                                        std::uint64_t seed) {
    check_shape(horizon, experts, arms);
    if (segment_length < 1) throw std::invalid_argument("segment length must be >= 1");
    if (!(gap > 0.0 && gap <= 1.0)) throw std::invalid_argument("gap must lie in (0,1]");

    Rng rng = make_rng(seed, 0x5717c8);
    const auto arm_perm = permutation(arms, rng);
    const auto rotation = permutation(experts, rng);
    std::vector<std::size_t> favoured(arm_perm.begin(), arm_perm.begin() + static_cast<long>(experts));

    const double lo = (1.0 - gap) / 2.0;
    const double hi = (1.0 + gap) / 2.0;
    Matrix means(horizon, arms, lo);
    for (std::size_t t = 0; t < horizon; ++t) {
        const std::size_t best = rotation[(t / segment_length) % experts];
        means(t, favoured[best]) = hi;
    }
    return SyntheticEnvironment(std::move(means), {point_mass_advice(favoured, arms)}, noise);
}

SyntheticEnvironment make_drifting_env(std::size_t horizon, std::size_t experts, std::size_t arms,
                                       double total_drift, NoiseModel noise, std::uint64_t seed) {
    check_shape(horizon, experts, arms);
    if (!(total_drift >= 0.0)) throw std::invalid_argument("total drift must be >= 0");

    Rng rng = make_rng(seed, 0xd41f7);
    const auto arm_perm = permutation(arms, rng);
    std::vector<std::size_t> favoured(arm_perm.begin(), arm_perm.begin() + static_cast<long>(experts));

    const double speed = horizon > 1 ? total_drift / static_cast<double>(horizon - 1) : 0.0;
    Matrix means(horizon, arms, 0.2);
    for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t n = 0; n < experts; ++n) {
            const double phase = 1.2 * static_cast<double>(n) / static_cast<double>(experts);
            means(t, favoured[n]) = 0.2 + triangle(phase + speed * static_cast<double>(t));
        }
    }
    return SyntheticEnvironment(std::move(means), {point_mass_advice(favoured, arms)}, noise);
}

double variation(const ExpertRewardTable& y) {
    double total = 0.0;
    for (std::size_t t = 0; t + 1 < y.rows(); ++t) {
        double sup = 0.0;
        for (std::size_t n = 0; n < y.cols(); ++n) sup = std::max(sup, std::abs(y(t, n) - y(t + 1, n)));
        total += sup;
    }
    return total;
}

double variation(const SyntheticEnvironment& env) { return variation(env.expected_expert_rewards()); }

double dynamic_oracle_return(const ExpertRewardTable& y) {
    double total = 0.0;
    for (std::size_t t = 0; t < y.rows(); ++t) {
        auto row = y.row(t);
        total += *std::max_element(row.begin(), row.end());
    }
    return total;
}

double dynamic_oracle_return(const SyntheticEnvironment& env) {
    return dynamic_oracle_return(env.expected_expert_rewards());
}

double static_oracle_return(const ExpertRewardTable& y) {
    std::vector<double> sums(y.cols(), 0.0);
    for (std::size_t t = 0; t < y.rows(); ++t)
        for (std::size_t n = 0; n < y.cols(); ++n) sums[n] += y(t, n);
    return sums.empty() ? 0.0 : *std::max_element(sums.begin(), sums.end());
}

double static_oracle_return(const SyntheticEnvironment& env) {
    return static_oracle_return(env.expected_expert_rewards());
}

ExpertRewardTable concatenate(const ExpertRewardTable& first, const ExpertRewardTable& second) {
    if (first.cols() != second.cols()) throw std::invalid_argument("expert count mismatch");
    ExpertRewardTable out = first;
    for (std::size_t t = 0; t < second.rows(); ++t) out.append_row(second.row(t));
    return out;
}

PolicyConfig PolicyConfig::exp4(std::size_t horizon) { return {"exp4", std::max<std::size_t>(horizon, 1), {}}; }

PolicyConfig PolicyConfig::rexp4(std::size_t delta_T) { return {"rexp4", delta_T, {}}; }

double PolicyConfig::resolved_gamma(std::size_t experts, std::size_t arms) const {
    return gamma ? *gamma : theoretical_gamma(delta_T, experts, arms);
}

PolicyRun run_policy(const SyntheticEnvironment& env, const PolicyConfig& policy, std::uint64_t seed) {
    const std::size_t T = env.horizon();
    const std::size_t N = env.experts();
    const std::size_t K = env.arms();
    const auto& y = env.expected_expert_rewards();

    BanditState state = BanditState::initial(N, policy.resolved_gamma(N, K), policy.delta_T);
    Rng rng = make_rng(seed, 0xba4d17);

    PolicyRun run;
    run.trace.reserve(T);
    std::vector<double> policy_reward(T);
    for (std::size_t t = 0; t < T; ++t) {
        const AdviceMatrix& advice = env.advice_at(t);
        const ArmDistribution dist = mix_probabilities(state, advice);
        const std::size_t k = sample_arm(dist, rng);
        const double r = env.realize(t, k, rng);

        BanditStep step;
        step.chosen = k;
        step.p_chosen = dist[k];
        step.realized_reward = r;
        step.expected_reward = dot(dist.probs(), env.arm_means().row(t));
        const double total = std::accumulate(state.weights.begin(), state.weights.end(), 0.0);
        step.expert_shares.resize(N);
        for (std::size_t n = 0; n < N; ++n) step.expert_shares[n] = state.weights[n] / total;

        const std::size_t epoch_before = state.epoch;
        state = learn_from_reward(std::move(state), advice, dist, k, r);
        step.restarted = state.epoch != epoch_before;
        policy_reward[t] = step.expected_reward;
        run.trace.push_back(std::move(step));
    }

    // Comparator for the static trace: the expert that is best over the whole horizon.
    std::vector<double> sums(N, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t n = 0; n < N; ++n) sums[n] += y(t, n);
    const std::size_t best = static_cast<std::size_t>(std::max_element(sums.begin(), sums.end()) - sums.begin());

    auto& rep = run.regret;
    rep.per_step_trace.resize(T);
    rep.per_step_static_trace.resize(T);
    double dyn = 0.0, stat = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        auto row = y.row(t);
        dyn += *std::max_element(row.begin(), row.end()) - policy_reward[t];
        stat += y(t, best) - policy_reward[t];
        rep.per_step_trace[t] = dyn;
        rep.per_step_static_trace[t] = stat;
    }
    rep.dynamic_regret = dyn;
    rep.static_regret = stat;
    return run;
}

std::vector<PolicyRun> run_policy_seeds(const SyntheticEnvironment& env, const PolicyConfig& policy,
                                        const std::vector<std::uint64_t>& seeds) {
    std::vector<PolicyRun> runs(seeds.size());
    const long n = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) runs[static_cast<std::size_t>(i)] = run_policy(env, policy, seeds[static_cast<std::size_t>(i)]);
    return runs;
}

namespace reference {

std::vector<PolicyRun> run_policy_seeds(const SyntheticEnvironment& env, const PolicyConfig& policy,
                                        const std::vector<std::uint64_t>& seeds) {
    std::vector<PolicyRun> runs;
    runs.reserve(seeds.size());
    for (auto s : seeds) runs.push_back(run_policy(env, policy, s));
    return runs;
}

}  // namespace reference
}  // namespace deal
