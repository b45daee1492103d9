#include "deal/deal_loop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <omp.h>

#include "deal/diagnostics.hpp"

namespace deal {
namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<Criterion> resolve_criteria(std::vector<Criterion> criteria, std::size_t classes) {
    if (classes <= 2) return criteria;
    std::vector<Criterion> out;
    for (auto c : criteria) {
        if (c == Criterion::rs) {
            warn("representative sampling is binary-only; using furthest-first for this multiclass pool");
            c = Criterion::dff;
        }
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
}

std::size_t clip_budget(std::size_t budget, std::size_t available) {
    if (budget > available) {
        warn("budget " + std::to_string(budget) + " exceeds the unlabelled pool (" + std::to_string(available) +
             "); clipped");
        return available;
    }
    return budget;
}

PoolPartition move_to_labeled(PoolPartition part, std::size_t position) {
    const std::size_t instance = part.unlabeled[position];
    part.unlabeled.erase(part.unlabeled.begin() + static_cast<long>(position));
    part.labeled.push_back(instance);
    return part;
}

RunTrace start_trace(const Session& session, const PoolState& state, std::string method, std::uint64_t seed) {
    RunTrace trace;
    trace.method = std::move(method);
    trace.seed = seed;
    trace.reward = session.config().reward;
    for (auto c : session.config().criteria) trace.experts.emplace_back(to_string(c));
    trace.class_names = session.pool()->class_names;
    trace.pool_size = session.pool()->size();
    trace.initial_accuracy = test_accuracy(state.model, session.test());
    return trace;
}

RunTrace run_ensemble(const DatasetSplit& data, std::size_t budget, const DealConfig& config, std::uint64_t seed,
                      std::string method, bool restarts) {
    Session session(data.train, data.test, config, seed);
    if (session.config().criteria.size() < 2) throw std::invalid_argument("an ensemble needs at least 2 criteria");
    PoolState state = session.initial_state();
    budget = clip_budget(budget, state.partition.unlabeled.size());

    const std::size_t experts = session.config().criteria.size();
    const std::size_t arms0 = state.partition.unlabeled.size();
    const std::size_t delta_T = restarts ? config.delta_T : std::max<std::size_t>(budget, 1);
    const double gamma = config.gamma ? *config.gamma : theoretical_gamma(delta_T, experts, arms0);
    BanditState bandit = BanditState::initial(experts, gamma, delta_T);

    RunTrace trace = start_trace(session, state, std::move(method), seed);
    trace.gamma = gamma;
    Rng rng = make_rng(seed, 0xdea1);
    for (std::size_t t = 0; t < budget; ++t) {
        auto step = deal_step(session, std::move(state), std::move(bandit), rng);
        state = std::move(step.pool);
        bandit = std::move(step.bandit);
        trace.records.push_back(std::move(step.record));
    }
    trace.final_model = state.model;
    return trace;
}

}  // namespace

std::string_view to_string(RewardMode m) { return m == RewardMode::iwa ? "iwa" : "test_accuracy"; }

RewardMode parse_reward_mode(std::string_view name) {
    if (name == "iwa") return RewardMode::iwa;
    if (name == "test_accuracy" || name == "test-accuracy") return RewardMode::test_accuracy;
    throw std::invalid_argument("unknown reward mode '" + std::string(name) + "'");
}

std::vector<Criterion> default_criteria(std::size_t classes) {
    if (classes <= 2) return {Criterion::us, Criterion::rs, Criterion::de, Criterion::rand};
    return {Criterion::us, Criterion::dff, Criterion::de, Criterion::rand};
}

std::vector<double> RunTrace::accuracy_curve() const {
    std::vector<double> c;
    c.reserve(records.size());
    for (const auto& r : records) c.push_back(r.test_acc);
    return c;
}

Session::Session(Dataset train_pool, Dataset test, DealConfig config, std::uint64_t seed)
    : pool_(std::make_shared<const Dataset>(std::move(train_pool))),
      test_(std::move(test)),
      config_(std::move(config)),
      seed_(seed) {
    if (!(config_.alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (!(config_.beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    if (config_.delta_T < 1) throw std::invalid_argument("batch size must be >= 1");
    if (config_.criteria.empty()) throw std::invalid_argument("no criteria configured");
    if (pool_->size() == 0) throw std::invalid_argument("empty train pool");
    config_.criteria = resolve_criteria(config_.criteria, pool_->classes());
    if (std::find(config_.criteria.begin(), config_.criteria.end(), Criterion::de) != config_.criteria.end()) {
        std::vector<std::size_t> all(pool_->size());
        std::iota(all.begin(), all.end(), 0);
        GmmConfig g = config_.gmm;
        g.seed = mix_seed(seed_, g.seed ^ 0x6);
        gmm_ = fit_gmm(pool_->features, all, g);
    }
}

LinearModel Session::retrain(const PoolPartition& partition) const {
    TrainConfig cfg = config_.train;
    cfg.seed = mix_seed(seed_, cfg.seed);
    return train(subset(*pool_, partition.labeled), cfg);
}

PoolState Session::initial_state() const {
    PoolState s;
    s.pool = pool_;
    s.partition = seed_initial_labels(*pool_, seed_);
    if (s.partition.labeled.empty()) throw std::invalid_argument("no class could be seeded");
    s.model = retrain(s.partition);
    return s;
}

std::vector<CriterionScores> Session::score(const PoolState& state) const {
    const auto& x = pool_->features;
    const auto& unl = state.partition.unlabeled;
    std::vector<CriterionScores> out;
    out.reserve(config_.criteria.size());
    for (auto c : config_.criteria) {
        switch (c) {
            case Criterion::us: out.push_back(us_scores(state.model, x, unl)); break;
            case Criterion::rs: {
                RsConfig rs = config_.rs;
                rs.seed = mix_seed(mix_seed(seed_, rs.seed), state.iteration);
                out.push_back(rs_scores(state.model, x, unl, rs));
                break;
            }
            case Criterion::dff: out.push_back(dff_scores(x, state.partition.labeled, unl)); break;
            case Criterion::de: out.push_back(de_scores(*gmm_, x, unl)); break;
            case Criterion::rand: out.push_back(rand_scores(unl.size())); break;
        }
    }
    return out;
}

AdviceMatrix Session::advice(const std::vector<CriterionScores>& scores) const {
    const std::size_t K = scores.front().preference_order.size();
    std::vector<double> flat;
    flat.reserve(scores.size() * K);
    for (const auto& s : scores) {
        auto row = advice_vector(s, config_.alpha, config_.beta);
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return AdviceMatrix(scores.size(), K, std::move(flat));
}

StepResult deal_step(const Session& session, PoolState pool, BanditState bandit, Rng& rng) {
    const std::size_t K = pool.partition.unlabeled.size();
    if (K == 0) throw std::out_of_range("unlabelled set exhausted");

    const auto scores = session.score(pool);
    const AdviceMatrix advice = session.advice(scores);
    const ArmDistribution dist = mix_probabilities(bandit, advice);
    const std::size_t k = sample_arm(dist, rng);

    TraceRecord rec;
    rec.arms = K;
    rec.instance_id = pool.partition.unlabeled[k];
    rec.p_chosen = dist[k];
    rec.weights = bandit.weights;
    for (std::size_t n = 0; n < advice.experts(); ++n) {
        const std::size_t top = scores[n].preference_order.front();
        rec.advice_chosen.push_back(advice(n, k));
        rec.advice_top.push_back(advice(n, top));
        rec.top_instance.push_back(pool.partition.unlabeled[top]);
        rec.p_top.push_back(dist[top]);
    }

    pool.partition = move_to_labeled(std::move(pool.partition), k);
    pool.model = session.retrain(pool.partition);
    pool.queries.push_back({rec.instance_id, 1.0 / (static_cast<double>(K) * dist[k])});
    pool.iteration += 1;

    rec.t = pool.iteration;
    rec.iwa = iwa_reward(pool.queries, *pool.pool, pool.model);
    rec.test_acc = test_accuracy_reward(pool.model, session.test());
    rec.reward = session.config().reward == RewardMode::iwa ? rec.iwa : rec.test_acc;

    const std::size_t epoch = bandit.epoch;
    bandit = learn_from_reward(std::move(bandit), advice, dist, k, rec.reward);
    rec.restart = bandit.epoch != epoch;
    return {std::move(pool), std::move(bandit), std::move(rec)};
}

double iwa_reward(const std::vector<QueryRecord>& queries, const Dataset& pool, const LinearModel& model) {
    double num = 0.0, den = 0.0;
    for (const auto& q : queries) {
        const bool correct = predict(model, pool.features.row(q.instance)) == pool.labels[q.instance];
        num += correct ? q.importance : 0.0;
        den += q.importance;
    }
    if (den <= 0.0) return 0.0;
    return std::clamp(num / den, 0.0, 1.0);
}

double test_accuracy_reward(const LinearModel& model, const Dataset& test) { return test_accuracy(model, test); }

RunTrace run_deal(const DatasetSplit& data, std::size_t budget, const DealConfig& config, std::uint64_t seed) {
    return run_ensemble(data, budget, config, seed, "deal", true);
}

RunTrace run_static_ensemble(const DatasetSplit& data, std::size_t budget, const DealConfig& config,
                             std::uint64_t seed) {
    return run_ensemble(data, budget, config, seed, "exp4", false);
}

RunTrace run_single_criterion(const DatasetSplit& data, Criterion criterion, std::size_t budget,
                              const DealConfig& config, std::uint64_t seed) {
    DealConfig cfg = config;
    cfg.criteria = {criterion};
    Session session(data.train, data.test, cfg, seed);
    PoolState state = session.initial_state();
    budget = clip_budget(budget, state.partition.unlabeled.size());

    RunTrace trace = start_trace(session, state, std::string(to_string(session.config().criteria.front())), seed);
    Rng rng = make_rng(seed, 0x5119);
    for (std::size_t t = 0; t < budget; ++t) {
        const std::size_t K = state.partition.unlabeled.size();
        const auto scores = session.score(state);
        const bool uniform = scores.front().uniform;
        const std::size_t k = uniform ? uniform_index(rng, K) : scores.front().preference_order.front();
        const double p = uniform ? 1.0 / static_cast<double>(K) : 1.0;

        TraceRecord rec;
        rec.arms = K;
        rec.instance_id = state.partition.unlabeled[k];
        rec.p_chosen = p;
        state.partition = move_to_labeled(std::move(state.partition), k);
        state.model = session.retrain(state.partition);
        state.queries.push_back({rec.instance_id, 1.0 / (static_cast<double>(K) * p)});
        state.iteration += 1;
        rec.t = state.iteration;
        rec.iwa = iwa_reward(state.queries, *state.pool, state.model);
        rec.test_acc = test_accuracy(state.model, session.test());
        rec.reward = cfg.reward == RewardMode::iwa ? rec.iwa : rec.test_acc;
        trace.records.push_back(std::move(rec));
    }
    trace.final_model = state.model;
    return trace;
}

std::vector<double> split_wins(const std::vector<double>& y) {
    std::vector<double> wins(y.size(), 0.0);
    if (y.empty()) return wins;
    const double top = *std::max_element(y.begin(), y.end());
    std::size_t ties = 0;
    for (double v : y)
        if (top - v <= 1e-12) ++ties;
    for (std::size_t n = 0; n < y.size(); ++n)
        if (top - y[n] <= 1e-12) wins[n] = 1.0 / static_cast<double>(ties);
    return wins;
}

CharacterizationReport oracle_characterization(const DatasetSplit& data, const DealConfig& config,
                                               const CharacterizationConfig& ch, std::uint64_t seed) {
    if (data.train.size() > ch.cap)
        throw std::invalid_argument("pool of " + std::to_string(data.train.size()) +
                                    " instances exceeds the characterization cap of " + std::to_string(ch.cap));
    if (ch.bin < 1) throw std::invalid_argument("bin width must be >= 1");

    Session session(data.train, data.test, config, seed);
    if (session.config().criteria.size() < 2) throw std::invalid_argument("an ensemble needs at least 2 criteria");
    PoolState state = session.initial_state();
    const std::size_t budget = clip_budget(ch.budget, state.partition.unlabeled.size());
    const std::size_t experts = session.config().criteria.size();
    const double gamma = config.gamma ? *config.gamma
                                      : theoretical_gamma(config.delta_T, experts, state.partition.unlabeled.size());
    BanditState bandit = BanditState::initial(experts, gamma, config.delta_T);
    Rng rng = make_rng(seed, 0xdea1);

    CharacterizationReport rep;
    rep.theta = ch.theta;
    for (auto c : session.config().criteria) rep.experts.emplace_back(to_string(c));

    std::vector<std::vector<double>> wins, increments;
    for (std::size_t t = 0; t < budget; ++t) {
        const auto advice = session.advice(session.score(state));
        const std::size_t K = state.partition.unlabeled.size();
        const double acc_now = test_accuracy(state.model, session.test());

        std::vector<double> reward(K);
        const long kk = static_cast<long>(K);
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < kk; ++i) {
            const auto k = static_cast<std::size_t>(i);
            reward[k] = test_accuracy(session.retrain(move_to_labeled(state.partition, k)), session.test());
        }

        std::vector<double> y(experts), inc(experts);
        for (std::size_t n = 0; n < experts; ++n) {
            y[n] = dot(advice.row(n), reward);
            inc[n] = y[n] - acc_now;
        }
        wins.push_back(split_wins(y));
        increments.push_back(inc);
        rep.iteration_rewards.push_back(y);

        auto step = deal_step(session, std::move(state), std::move(bandit), rng);
        state = std::move(step.pool);
        bandit = std::move(step.bandit);
    }

    rep.overall_win_fraction.assign(experts, 0.0);
    for (std::size_t start = 0; start < wins.size(); start += ch.bin) {
        const std::size_t end = std::min(wins.size(), start + ch.bin);
        const double width = static_cast<double>(end - start);
        CharacterizationBin b;
        b.first_iteration = start + 1;
        b.last_iteration = end;
        b.win_fraction.assign(experts, 0.0);
        b.mean_increment.assign(experts, 0.0);
        for (std::size_t t = start; t < end; ++t)
            for (std::size_t n = 0; n < experts; ++n) {
                b.win_fraction[n] += wins[t][n] / width;
                b.mean_increment[n] += increments[t][n] / width;
            }
        const double lowest = *std::min_element(b.mean_increment.begin(), b.mean_increment.end());
        for (double v : b.mean_increment) b.relative_increment.push_back(v - lowest);
        rep.bins.push_back(std::move(b));
    }
    for (const auto& w : wins)
        for (std::size_t n = 0; n < experts; ++n)
            rep.overall_win_fraction[n] += w[n] / static_cast<double>(wins.size());
    const auto above = std::count_if(rep.overall_win_fraction.begin(), rep.overall_win_fraction.end(),
                                     [&](double f) { return f > ch.theta; });
    rep.stationary = above >= 2;
    return rep;
}

}  // namespace deal
