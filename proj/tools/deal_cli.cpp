// deal: command-line front end for bandit simulations and active-learning runs.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "deal/dataset.hpp"
#include "deal/harness.hpp"
#include "deal/stats.hpp"

namespace {

// Error line format: "error: kind=<kind> message=<text>" on stderr.
int fail(const std::string& kind, const std::string& message) {
    std::string flat = message;
    for (auto& c : flat)
        if (c == '\n') c = ' ';
    std::cerr << "error: kind=" << kind << " message=" << flat << '\n';
    return kind == "usage" ? 2 : 1;
}

void print_summary(const deal::AggregateReport& rep) {
    for (const auto& m : rep.methods) {
        if (rep.checkpoints.empty() || m.auc.empty()) continue;
        std::cout << m.method << " auc@" << deal::format_number(rep.checkpoints.back()) << "="
                  << deal::format_number(deal::mean(m.auc.back())) << '\n';
    }
    for (const auto& e : rep.wtl)
        if (e.checkpoint == rep.checkpoints.back())
            std::cout << e.method_a << " vs " << e.method_b << ": " << deal::to_string(e.decision)
                      << " p=" << deal::format_number(e.p_value) << '\n';
}

void print_regret(const deal::AggregateReport& rep) {
    std::map<std::string, std::vector<double>> finals;
    for (const auto& s : rep.regret)
        if (!s.dynamic_trace.empty()) finals[s.policy].push_back(s.dynamic_trace.back());
    for (const auto& [policy, v] : finals)
        std::cout << policy << " mean_dynamic_regret=" << deal::format_number(deal::mean(v))
                  << " stderr=" << deal::format_number(deal::standard_error(v)) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Restarting expert-advice bandits and dynamic ensemble active learning"};
    app.require_subcommand(1);

    deal::ExperimentConfig cfg;
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    std::string gamma_opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.out, "Output directory");
        sub->add_option("--workers", cfg.workers, "Parallel sessions (0: OpenMP default)");
        sub->add_option("--gamma", gamma_opt, "Exploration rate; 'theorem' or a value in (0,1]");
        sub->add_option("--set", overrides, "Extra key=value config overrides");
    };
    auto add_al = [&](CLI::App* sub) {
        sub->add_option("--data", cfg.data, "LibSVM file or synthetic:<separable|overlapping|moons>[:count]");
        sub->add_option("--criteria", cfg.criteria, "Comma-separated criteria (us,rs,dff,de,rand)");
        sub->add_option("--budget", cfg.budget, "Queries (>= 1) or fraction of the pool (< 1)");
        sub->add_option("--delta-T", cfg.delta_T, "Restart batch size");
        sub->add_option("--alpha", cfg.alpha, "Rank normalization rate");
        sub->add_option("--beta", cfg.beta, "Gibbs inverse temperature");
        sub->add_option("--reward", cfg.reward, "iwa or test_accuracy");
        sub->add_flag("--scale", cfg.scale, "Min-max scale features on the train pool");
    };

    auto* bandit = app.add_subcommand("bandit-sim", "EXP4 vs REXP4 on a synthetic environment");
    bandit->add_option("--env", cfg.env, "switching or drifting");
    bandit->add_option("--T", cfg.horizon, "Horizon");
    bandit->add_option("--segments", cfg.segments, "Switching segments");
    bandit->add_option("--seeds", cfg.seeds, "Number of seeds");
    bandit->add_option("--N", cfg.experts, "Experts");
    bandit->add_option("--K", cfg.arms, "Arms");
    bandit->add_option("--gap", cfg.gap, "Reward gap of the best arm");
    bandit->add_option("--drift", cfg.drift, "Total drift of the drifting environment");
    bandit->add_option("--noise", cfg.noise, "none or bernoulli");
    bandit->add_option("--delta-T", cfg.bandit_delta_T, "REXP4 batch size (0: theoretical)");
    bandit->add_option("--seed", cfg.base_seed, "Base seed");
    add_common(bandit);

    auto* run = app.add_subcommand("al-run", "One DEAL session with a per-step trace");
    add_al(run);
    run->add_option("--seed", seed, "Seed");
    add_common(run);

    auto* sweep = app.add_subcommand("al-sweep", "Multi-seed comparison of DEAL and baselines");
    sweep->add_option("--config", config_path, "key=value configuration file");
    add_al(sweep);
    sweep->add_option("--repeats", cfg.repeats, "Seeds per method");
    sweep->add_option("--seed", cfg.base_seed, "Base seed");
    add_common(sweep);

    auto* chz = app.add_subcommand("characterize", "Oracle win proportions of each criterion per batch");
    add_al(chz);
    chz->add_option("--cap", cfg.cap, "Largest train pool the oracle will evaluate exhaustively");
    chz->add_option("--theta", cfg.theta, "Stationarity threshold");
    chz->add_option("--seed", seed, "Seed");
    add_common(chz);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    try {
        if (sweep->parsed() && !config_path.empty()) {
            // Command-line values that differ from the defaults override the file.
            auto file_cfg = deal::parse_config_file(config_path);
            deal::ExperimentConfig defaults;
            auto take = [](auto& dst, const auto& cli, const auto& def) {
                if (!(cli == def)) dst = cli;
            };
            take(file_cfg.data, cfg.data, defaults.data);
            take(file_cfg.criteria, cfg.criteria, defaults.criteria);
            take(file_cfg.budget, cfg.budget, defaults.budget);
            take(file_cfg.delta_T, cfg.delta_T, defaults.delta_T);
            take(file_cfg.alpha, cfg.alpha, defaults.alpha);
            take(file_cfg.beta, cfg.beta, defaults.beta);
            take(file_cfg.reward, cfg.reward, defaults.reward);
            take(file_cfg.scale, cfg.scale, defaults.scale);
            take(file_cfg.repeats, cfg.repeats, defaults.repeats);
            take(file_cfg.base_seed, cfg.base_seed, defaults.base_seed);
            take(file_cfg.out, cfg.out, defaults.out);
            take(file_cfg.workers, cfg.workers, defaults.workers);
            cfg = file_cfg;
        }
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) return fail("usage", "--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!gamma_opt.empty()) {
            if (gamma_opt == "theorem") {
                cfg.gamma_mode = "theorem";
            } else {
                cfg.gamma_mode = "explicit";
                cfg.set("gamma", gamma_opt);
            }
        }

        const std::filesystem::path out_dir = cfg.out;
        if (bandit->parsed()) {
            cfg.mode = "bandit-sim";
            const auto rep = deal::run_bandit_sim(cfg);
            deal::emit_outputs(rep, out_dir, cfg.hash());
            print_regret(rep);
        } else if (run->parsed()) {
            cfg.mode = "al-run";
            cfg.repeats = 1;
            cfg.base_seed = seed;
            cfg.methods = {"deal"};
            cfg.validate();
            const auto data = deal::load_dataset(cfg);
            const auto split = deal::make_split(data, cfg, seed);
            const auto dc = cfg.deal_config(data.classes());
            const auto trace = deal::run_deal(split, cfg.budget_for(split.train.size()), dc, seed);
            std::filesystem::create_directories(out_dir);
            std::ofstream f(out_dir / "trace.csv", std::ios::trunc);
            if (!f) throw std::runtime_error("cannot write '" + (out_dir / "trace.csv").string() + "'");
            deal::write_trace_csv(f, trace, cfg.hash());
            auto rep = deal::aggregate({{"deal", {trace}}}, trace.pool_size, "deal", cfg.significance);
            rep.mode = cfg.mode;
            deal::emit_outputs(rep, out_dir, cfg.hash());
            std::cout << "queries=" << trace.records.size() << " initial_accuracy="
                      << deal::format_number(trace.initial_accuracy) << " final_accuracy="
                      << deal::format_number(trace.records.empty() ? trace.initial_accuracy
                                                                   : trace.records.back().test_acc)
                      << '\n';
        } else if (sweep->parsed()) {
            cfg.mode = "al-sweep";
            cfg.validate();
            const auto data = deal::load_dataset(cfg);
            const auto result = deal::run_sweep(cfg, data);
            deal::emit_outputs(result.report, out_dir, cfg.hash());
            print_summary(result.report);
        } else if (chz->parsed()) {
            cfg.mode = "characterize";
            cfg.base_seed = seed;
            cfg.validate();
            const auto data = deal::load_dataset(cfg);
            const auto split = deal::make_split(data, cfg, seed);
            const auto dc = cfg.deal_config(data.classes());
            deal::CharacterizationConfig cc;
            cc.budget = cfg.budget_for(split.train.size());
            cc.bin = cfg.delta_T;
            cc.theta = cfg.theta;
            cc.cap = cfg.cap;
            deal::AggregateReport rep;
            rep.mode = cfg.mode;
            rep.characterization = deal::oracle_characterization(split, dc, cc, seed);
            deal::emit_outputs(rep, out_dir, cfg.hash());
            const auto& ch = *rep.characterization;
            for (std::size_t n = 0; n < ch.experts.size(); ++n)
                std::cout << ch.experts[n] << " win_fraction=" << deal::format_number(ch.overall_win_fraction[n])
                          << '\n';
            std::cout << "stationary=" << (ch.stationary ? "true" : "false") << '\n';
        }
    } catch (const deal::ParseError& e) {
        return fail("parse", e.what());
    } catch (const std::invalid_argument& e) {
        return fail("config", e.what());
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
    return 0;
}
