#pragma once

// Dynamic ensemble active learning: criteria advice feeds a restarting
// EXP4 learner that picks which pool instance to label next.

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deal/bandit.hpp"
#include "deal/criteria.hpp"
#include "deal/dataset.hpp"
#include "deal/learner.hpp"

namespace deal {

enum class RewardMode { iwa, test_accuracy };

std::string_view to_string(RewardMode m);
RewardMode parse_reward_mode(std::string_view name);

struct DealConfig {
    std::vector<Criterion> criteria{Criterion::us, Criterion::rs, Criterion::de, Criterion::rand};
    double alpha = 0.1;
    double beta = 100.0;
    std::size_t delta_T = 10;
    std::optional<double> gamma;  // theoretical_gamma(delta_T, N, K) when unset
    RewardMode reward = RewardMode::iwa;
    TrainConfig train;
    RsConfig rs;
    GmmConfig gmm;
};

// Default ensemble for a class count: US/RS/DE/RAND for binary problems,
// US/DFF/DE/RAND otherwise.
std::vector<Criterion> default_criteria(std::size_t classes);

struct QueryRecord {
    std::size_t instance;  // row id in the train pool
    double importance;     // 1 / (K p_chosen)
};

struct PoolState {
    std::shared_ptr<const Dataset> pool;
    PoolPartition partition;
    LinearModel model;
    std::vector<QueryRecord> queries;
    std::size_t iteration = 0;
};

struct TraceRecord {
    std::size_t t = 0;  // 1-based query index
    std::size_t instance_id = 0;
    std::size_t arms = 0;  // unlabelled count before the query
    double p_chosen = 0.0;
    double reward = 0.0;
    double iwa = 0.0;
    double test_acc = 0.0;
    std::vector<double> weights;          // w(t) used to mix this step
    std::vector<double> advice_chosen;    // xi^n at the queried instance
    std::vector<double> advice_top;       // xi^n at expert n's top-ranked instance
    std::vector<std::size_t> top_instance;  // expert n's top-ranked instance id
    std::vector<double> p_top;            // p at expert n's top-ranked instance
    bool restart = false;                 // weights reset after this step
};

struct RunTrace {
    std::string method;
    std::uint64_t seed = 0;
    RewardMode reward = RewardMode::iwa;
    std::vector<std::string> experts;
    std::vector<std::string> class_names;
    std::size_t pool_size = 0;
    double initial_accuracy = 0.0;
    double gamma = 0.0;
    std::vector<TraceRecord> records;
    LinearModel final_model;

    std::vector<double> accuracy_curve() const;  // test accuracy after each query
};

// Read-only context shared by every step of one session.
class Session {
public:
    Session(Dataset train_pool, Dataset test, DealConfig config, std::uint64_t seed);

    const std::shared_ptr<const Dataset>& pool() const { return pool_; }
    const Dataset& test() const { return test_; }
    const DealConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }

    PoolState initial_state() const;
    LinearModel retrain(const PoolPartition& partition) const;

    // Criterion scores over the current unlabelled set, in configured order.
    std::vector<CriterionScores> score(const PoolState& state) const;
    AdviceMatrix advice(const std::vector<CriterionScores>& scores) const;

private:
    std::shared_ptr<const Dataset> pool_;
    Dataset test_;
    DealConfig config_;
    std::uint64_t seed_;
    std::optional<DiagonalGmm> gmm_;
};

struct StepResult {
    PoolState pool;
    BanditState bandit;
    TraceRecord record;
};

// Score, normalise, mix, sample, label, retrain, reward, update, advance.
// Throws std::out_of_range when the unlabelled set is empty.
StepResult deal_step(const Session& session, PoolState pool, BanditState bandit, Rng& rng);

// Importance-weighted accuracy of `model` over the queried instances.
double iwa_reward(const std::vector<QueryRecord>& queries, const Dataset& pool, const LinearModel& model);

double test_accuracy_reward(const LinearModel& model, const Dataset& test);

struct DatasetSplit {
    Dataset train;
    Dataset test;
};

RunTrace run_deal(const DatasetSplit& data, std::size_t budget, const DealConfig& config, std::uint64_t seed);

// Stationary EXP4 ensemble: same as run_deal with no interior restart.
RunTrace run_static_ensemble(const DatasetSplit& data, std::size_t budget, const DealConfig& config,
                             std::uint64_t seed);

// Greedy: always query the criterion's rank-1 instance (RAND: uniform draw).
RunTrace run_single_criterion(const DatasetSplit& data, Criterion criterion, std::size_t budget,
                              const DealConfig& config, std::uint64_t seed);

struct CharacterizationBin {
    std::size_t first_iteration = 0;  // 1-based, inclusive
    std::size_t last_iteration = 0;
    std::vector<double> win_fraction;         // per expert, sums to 1
    std::vector<double> mean_increment;       // mean xi^n . (r - acc) per expert
    std::vector<double> relative_increment;   // mean_increment minus the bin minimum
};

struct CharacterizationReport {
    std::vector<std::string> experts;
    std::vector<CharacterizationBin> bins;
    std::vector<double> overall_win_fraction;
    std::vector<std::vector<double>> iteration_rewards;  // y^n per iteration
    double theta = 0.1;
    bool stationary = false;  // at least two experts win more than theta overall
};

struct CharacterizationConfig {
    std::size_t budget = 0;
    std::size_t bin = 10;
    double theta = 0.1;
    std::size_t cap = 400;
};

// Follows the DEAL trajectory and, at every iteration, labels each candidate
// hypothetically to obtain its true test-accuracy reward.
CharacterizationReport oracle_characterization(const DatasetSplit& data, const DealConfig& config,
                                               const CharacterizationConfig& characterization, std::uint64_t seed);

// Win shares for one iteration: each maximiser (within 1e-12) gets 1/ties.
std::vector<double> split_wins(const std::vector<double>& expert_rewards);

}  // namespace deal
