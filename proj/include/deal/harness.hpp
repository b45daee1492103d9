#pragma once

// Multi-seed experiment driver: configuration, sweeps, aggregation and the
// plot-ready CSV files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deal/deal_loop.hpp"
#include "deal/environment.hpp"
#include "deal/stats.hpp"

namespace deal {

struct ExperimentConfig {
    std::string mode = "al-sweep";  // bandit-sim | al-run | al-sweep | characterize
    std::string data;               // file path or synthetic:<name>[:count]
    std::string criteria;           // empty: default for the class count
    std::vector<std::string> methods{"deal", "exp4", "singles"};
    std::size_t delta_T = 10;
    double alpha = 0.1;
    double beta = 100.0;
    std::string gamma_mode = "theorem";  // theorem | explicit
    double gamma = 0.1;                  // used when gamma_mode = explicit
    double budget = 0.5;                 // < 1: fraction of the pool, otherwise a count
    std::size_t repeats = 50;
    std::uint64_t base_seed = 0;
    std::string reward = "iwa";
    double train_fraction = 0.6;
    bool scale = false;
    double significance = 0.05;
    double regularization = 1.0;
    std::size_t cap = 400;
    double theta = 0.1;
    // bandit-sim
    std::string env = "switching";
    std::size_t horizon = 5000;
    std::size_t experts = 4;
    std::size_t arms = 20;
    std::size_t segments = 10;
    double gap = 0.3;
    double drift = 2.0;
    std::string noise = "bernoulli";
    std::size_t seeds = 100;
    std::size_t bandit_delta_T = 0;  // 0: batch size from the theoretical formula
    // not part of the hash
    std::string out = ".";
    std::size_t workers = 0;  // 0: OpenMP default

    void set(const std::string& key, const std::string& value);
    std::string canonical() const;  // sorted key=value lines of semantic fields
    std::string hash() const;       // 16 hex digits
    void validate() const;

    DealConfig deal_config(std::size_t classes) const;
    std::size_t budget_for(std::size_t pool_size) const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

// Loads the dataset named by cfg.data.
Dataset load_dataset(const ExperimentConfig& cfg);

// Per-seed split (optionally min-max scaled on the train pool).
DatasetSplit make_split(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed);

inline const std::vector<double>& checkpoint_fractions() {
    static const std::vector<double> c{0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
    return c;
}

struct MethodSummary {
    std::string method;
    std::vector<double> mean_curve;  // index 0: initial accuracy, i: after query i
    std::vector<double> stderr_curve;
    std::vector<std::vector<double>> auc;  // [checkpoint][seed]
};

struct WtlEntry {
    double checkpoint = 0.0;
    std::string method_a;
    std::string method_b;
    Decision decision = Decision::tie;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double p_value = 1.0;
};

struct RegretSeries {
    std::string policy;
    std::uint64_t seed = 0;
    std::vector<double> dynamic_trace;
    std::vector<double> static_trace;
};

struct AggregateReport {
    std::string mode;
    std::size_t pool_size = 0;
    std::vector<double> checkpoints;
    std::vector<MethodSummary> methods;
    std::vector<WtlEntry> wtl;
    std::optional<CharacterizationReport> characterization;
    std::vector<RegretSeries> regret;
};

// Builds the report from traces grouped by method (each sorted by seed).
AggregateReport aggregate(const std::map<std::string, std::vector<RunTrace>>& traces, std::size_t pool_size,
                          const std::string& reference_method, double significance);

struct SweepResult {
    AggregateReport report;
    std::map<std::string, std::vector<RunTrace>> traces;
};

// Runs every configured method for seeds base_seed .. base_seed + repeats - 1.
SweepResult run_sweep(const ExperimentConfig& cfg, const Dataset& data);

// Method expansion: "singles" becomes one entry per configured criterion.
std::vector<std::string> expand_methods(const ExperimentConfig& cfg, std::size_t classes);

RunTrace run_method(const std::string& method, const DatasetSplit& split, std::size_t budget,
                    const DealConfig& config, std::uint64_t seed);

// Bandit simulation: EXP4 and REXP4 on the configured synthetic environment.
AggregateReport run_bandit_sim(const ExperimentConfig& cfg);

// Writes learning_curves.csv, auc_table.csv, wtl_table.csv, win_proportions.csv
// and, in bandit-sim mode, regret.csv. Existing files are overwritten.
void emit_outputs(const AggregateReport& report, const std::filesystem::path& out_dir, const std::string& config_hash);

void write_trace_csv(std::ostream& out, const RunTrace& trace, const std::string& config_hash);

// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace deal
