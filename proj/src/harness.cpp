#include "deal/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "deal/diagnostics.hpp"
#include "deal/synthetic_data.hpp"

namespace deal {
namespace {

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw std::invalid_argument("config key '" + key + "' expects a number, got '" + v + "'");
    return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw std::invalid_argument("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config key '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
}

NoiseModel parse_noise(const std::string& v) {
    if (v == "none") return NoiseModel::none;
    if (v == "bernoulli") return NoiseModel::bernoulli;
    throw std::invalid_argument("unknown noise model '" + v + "'");
}

void write_header(std::ostream& out, const std::string& hash, const std::string& columns) {
    out << "# config_hash=" << hash << '\n' << columns << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    return f;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void ExperimentConfig::set(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = normalize_key(trim(raw_key));
    const std::string v = trim(raw_value);
    if (key == "mode") mode = v;
    else if (key == "data") data = v;
    else if (key == "criteria") criteria = v;
    else if (key == "methods") methods = split_list(v);
    else if (key == "delta_T" || key == "delta_t") delta_T = to_size(key, v);
    else if (key == "alpha") alpha = to_double(key, v);
    else if (key == "beta") beta = to_double(key, v);
    else if (key == "gamma_mode") gamma_mode = v;
    else if (key == "gamma") gamma = to_double(key, v);
    else if (key == "budget") budget = to_double(key, v);
    else if (key == "repeats") repeats = to_size(key, v);
    else if (key == "base_seed" || key == "seed") base_seed = to_size(key, v);
    else if (key == "reward") reward = v;
    else if (key == "train_fraction") train_fraction = to_double(key, v);
    else if (key == "scale") scale = to_bool(key, v);
    else if (key == "significance") significance = to_double(key, v);
    else if (key == "regularization") regularization = to_double(key, v);
    else if (key == "cap") cap = to_size(key, v);
    else if (key == "theta") theta = to_double(key, v);
    else if (key == "env") env = v;
    else if (key == "T" || key == "horizon") horizon = to_size(key, v);
    else if (key == "N" || key == "experts") experts = to_size(key, v);
    else if (key == "K" || key == "arms") arms = to_size(key, v);
    else if (key == "segments") segments = to_size(key, v);
    else if (key == "gap") gap = to_double(key, v);
    else if (key == "drift") drift = to_double(key, v);
    else if (key == "noise") noise = v;
    else if (key == "seeds") seeds = to_size(key, v);
    else if (key == "bandit_delta_T" || key == "bandit_delta_t") bandit_delta_T = to_size(key, v);
    else if (key == "out") out = v;
    else if (key == "workers") workers = to_size(key, v);
    else throw std::invalid_argument("unknown config key '" + raw_key + "'");
}

std::string ExperimentConfig::canonical() const {
    std::map<std::string, std::string> kv{
        {"mode", mode},
        {"data", data},
        {"criteria", criteria},
        {"methods", join(methods)},
        {"delta_T", std::to_string(delta_T)},
        {"alpha", format_number(alpha)},
        {"beta", format_number(beta)},
        {"gamma_mode", gamma_mode},
        {"gamma", gamma_mode == "explicit" ? format_number(gamma) : "-"},
        {"budget", format_number(budget)},
        {"repeats", std::to_string(repeats)},
        {"base_seed", std::to_string(base_seed)},
        {"reward", reward},
        {"train_fraction", format_number(train_fraction)},
        {"scale", scale ? "1" : "0"},
        {"significance", format_number(significance)},
        {"regularization", format_number(regularization)},
        {"cap", std::to_string(cap)},
        {"theta", format_number(theta)},
        {"env", env},
        {"horizon", std::to_string(horizon)},
        {"experts", std::to_string(experts)},
        {"arms", std::to_string(arms)},
        {"segments", std::to_string(segments)},
        {"gap", format_number(gap)},
        {"drift", format_number(drift)},
        {"noise", noise},
        {"seeds", std::to_string(seeds)},
        {"bandit_delta_T", std::to_string(bandit_delta_T)},
    };
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

void ExperimentConfig::validate() const {
    static const std::vector<std::string> modes{"bandit-sim", "al-run", "al-sweep", "characterize"};
    if (std::find(modes.begin(), modes.end(), mode) == modes.end())
        throw std::invalid_argument("unknown mode '" + mode + "'");
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (!(budget > 0.0)) throw std::invalid_argument("budget must be > 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    if (gamma_mode != "theorem" && gamma_mode != "explicit")
        throw std::invalid_argument("gamma_mode must be 'theorem' or 'explicit'");
    if (gamma_mode == "explicit" && !(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");
    if (delta_T < 1) throw std::invalid_argument("delta_T must be >= 1");
    parse_reward_mode(reward);
    if (!criteria.empty()) parse_criteria_list(criteria);
    if (mode == "bandit-sim") {
        if (env != "switching" && env != "drifting") throw std::invalid_argument("env must be 'switching' or 'drifting'");
        parse_noise(noise);
        if (seeds < 1) throw std::invalid_argument("seeds must be >= 1");
        if (segments < 1) throw std::invalid_argument("segments must be >= 1");
    } else if (data.empty()) {
        throw std::invalid_argument("no dataset given");
    }
}

DealConfig ExperimentConfig::deal_config(std::size_t classes) const {
    DealConfig c;
    c.criteria = criteria.empty() ? default_criteria(classes) : parse_criteria_list(criteria);
    c.alpha = alpha;
    c.beta = beta;
    c.delta_T = delta_T;
    if (gamma_mode == "explicit") c.gamma = gamma;
    c.reward = parse_reward_mode(reward);
    c.train.regularization = regularization;
    return c;
}

std::size_t ExperimentConfig::budget_for(std::size_t pool_size) const {
    if (budget < 1.0) return static_cast<std::size_t>(std::ceil(budget * static_cast<double>(pool_size) - 1e-9));
    return static_cast<std::size_t>(budget);
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(n, "expected key=value");
        try {
            cfg.set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw ParseError(n, e.what());
        }
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    return parse_config(in);
}

Dataset load_dataset(const ExperimentConfig& cfg) {
    const std::string prefix = "synthetic:";
    if (cfg.data.rfind(prefix, 0) == 0) return make_named_dataset(cfg.data.substr(prefix.size()), cfg.base_seed);
    return parse_sparse_file(cfg.data);
}

DatasetSplit make_split(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
    auto s = split(data, cfg.train_fraction, seed);
    if (cfg.scale) {
        const auto scaler = MinMaxScaler::fit(s.train.features);
        s.train.features = scaler.apply(s.train.features);
        s.test.features = scaler.apply(s.test.features);
    }
    return {std::move(s.train), std::move(s.test)};
}

std::vector<std::string> expand_methods(const ExperimentConfig& cfg, std::size_t classes) {
    std::vector<std::string> out;
    const auto crit = cfg.deal_config(classes).criteria;
    for (const auto& m : cfg.methods) {
        if (m == "singles") {
            for (auto c : crit) {
                // RS is replaced by DFF on multiclass pools.
                Criterion r = (classes > 2 && c == Criterion::rs) ? Criterion::dff : c;
                std::string name(to_string(r));
                if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
            }
        } else if (std::find(out.begin(), out.end(), m) == out.end()) {
            if (m != "deal" && m != "exp4") parse_criterion(m);
            out.push_back(m);
        }
    }
    return out;
}

RunTrace run_method(const std::string& method, const DatasetSplit& split, std::size_t budget,
                    const DealConfig& config, std::uint64_t seed) {
    if (method == "deal") return run_deal(split, budget, config, seed);
    if (method == "exp4") return run_static_ensemble(split, budget, config, seed);
    return run_single_criterion(split, parse_criterion(method), budget, config, seed);
}

AggregateReport aggregate(const std::map<std::string, std::vector<RunTrace>>& traces, std::size_t pool_size,
                          const std::string& reference_method, double significance) {
    AggregateReport rep;
    rep.pool_size = pool_size;
    rep.checkpoints = checkpoint_fractions();

    std::size_t curve_len = 0;
    for (const auto& [m, runs] : traces)
        for (const auto& r : runs) curve_len = std::max(curve_len, r.records.size());
    for (double f : rep.checkpoints) {
        const auto last = static_cast<std::size_t>(std::ceil(f * static_cast<double>(pool_size) - 1e-9));
        if (curve_len > 0 && last > curve_len)
            warn("checkpoint " + format_number(f) + " needs " + std::to_string(last) + " queries but runs stop at " +
                 std::to_string(curve_len) + "; clipped");
    }

    for (const auto& [method, runs] : traces) {
        MethodSummary s;
        s.method = method;
        std::size_t len = 0;
        for (const auto& r : runs) len = std::max(len, r.records.size() + 1);
        std::vector<double> column;
        for (std::size_t i = 0; i < len; ++i) {
            column.clear();
            for (const auto& r : runs) {
                if (i == 0) column.push_back(r.initial_accuracy);
                else if (i <= r.records.size()) column.push_back(r.records[i - 1].test_acc);
            }
            s.mean_curve.push_back(mean(column));
            s.stderr_curve.push_back(standard_error(column));
        }
        s.auc.assign(rep.checkpoints.size(), {});
        for (std::size_t c = 0; c < rep.checkpoints.size(); ++c) {
            const auto last =
                static_cast<std::size_t>(std::ceil(rep.checkpoints[c] * static_cast<double>(pool_size) - 1e-9));
            for (const auto& r : runs) {
                if (r.records.empty()) continue;
                const auto curve = r.accuracy_curve();
                s.auc[c].push_back(auc_until(curve, std::min(last, curve.size())));
            }
        }
        rep.methods.push_back(std::move(s));
    }

    const auto ref = std::find_if(rep.methods.begin(), rep.methods.end(),
                                  [&](const MethodSummary& m) { return m.method == reference_method; });
    if (ref != rep.methods.end()) {
        for (std::size_t c = 0; c < rep.checkpoints.size(); ++c) {
            for (const auto& other : rep.methods) {
                if (other.method == reference_method) continue;
                WtlEntry e;
                e.checkpoint = rep.checkpoints[c];
                e.method_a = reference_method;
                e.method_b = other.method;
                const auto& a = ref->auc[c];
                const auto& b = other.auc[c];
                e.mean_a = mean(a);
                e.mean_b = mean(b);
                if (a.size() >= 2 && b.size() >= 2) e.p_value = welch_t_test(a, b).p_value;
                e.decision = win_tie_loss(a, b, significance);
                rep.wtl.push_back(e);
            }
        }
    }
    return rep;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const Dataset& data) {
    cfg.validate();
    const auto methods = expand_methods(cfg, data.classes());
    const DealConfig dc = cfg.deal_config(data.classes());

    struct Job {
        std::size_t method;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::size_t m = 0; m < methods.size(); ++m)
        for (std::size_t r = 0; r < cfg.repeats; ++r) jobs.push_back({m, cfg.base_seed + r});

    std::vector<RunTrace> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::size_t pool_size = 0;
    const long n = static_cast<long>(jobs.size());
    const int threads = cfg.workers > 0 ? static_cast<int>(cfg.workers) : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long i = 0; i < n; ++i) {
        const auto& job = jobs[static_cast<std::size_t>(i)];
        try {
            const auto split = make_split(data, cfg, job.seed);
            const std::size_t budget = cfg.budget_for(split.train.size());
            results[static_cast<std::size_t>(i)] = run_method(methods[job.method], split, budget, dc, job.seed);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!errors[i].empty())
            throw std::runtime_error("session " + methods[jobs[i].method] + " seed " + std::to_string(jobs[i].seed) +
                                     " failed: " + errors[i]);
        pool_size = std::max(pool_size, results[i].pool_size);
    }

    SweepResult out;
    for (std::size_t i = 0; i < jobs.size(); ++i) out.traces[methods[jobs[i].method]].push_back(std::move(results[i]));
    out.report = aggregate(out.traces, pool_size, "deal", cfg.significance);
    out.report.mode = cfg.mode;
    return out;
}

AggregateReport run_bandit_sim(const ExperimentConfig& cfg) {
    cfg.validate();
    const NoiseModel noise = parse_noise(cfg.noise);
    const auto env = cfg.env == "switching"
                         ? make_switching_env(cfg.horizon, cfg.experts, cfg.arms,
                                              (cfg.horizon + cfg.segments - 1) / cfg.segments, cfg.gap, noise,
                                              cfg.base_seed)
                         : make_drifting_env(cfg.horizon, cfg.experts, cfg.arms, cfg.drift, noise, cfg.base_seed);
    std::size_t delta = cfg.bandit_delta_T;
    if (delta == 0) {
        const double v = std::max(variation(env), 1.0 / static_cast<double>(std::min(cfg.experts, cfg.arms)));
        delta = theoretical_batch_size(static_cast<double>(cfg.horizon), v, cfg.experts, cfg.arms);
    }
    std::vector<std::uint64_t> seeds(cfg.seeds);
    for (std::size_t i = 0; i < cfg.seeds; ++i) seeds[i] = cfg.base_seed + i;

    AggregateReport rep;
    rep.mode = "bandit-sim";
    for (const auto& policy : {PolicyConfig::exp4(cfg.horizon), PolicyConfig::rexp4(delta)}) {
        PolicyConfig p = policy;
        if (cfg.gamma_mode == "explicit") p.gamma = cfg.gamma;
        auto runs = run_policy_seeds(env, p, seeds);
        for (std::size_t i = 0; i < runs.size(); ++i)
            rep.regret.push_back({p.name, seeds[i], std::move(runs[i].regret.per_step_trace),
                                  std::move(runs[i].regret.per_step_static_trace)});
    }
    return rep;
}

void emit_outputs(const AggregateReport& report, const std::filesystem::path& out_dir, const std::string& hash) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    {
        auto f = open_output(out_dir / "learning_curves.csv");
        write_header(f, hash, "method,iteration,mean_accuracy,stderr");
        for (const auto& m : report.methods)
            for (std::size_t i = 0; i < m.mean_curve.size(); ++i)
                f << m.method << ',' << i << ',' << format_number(m.mean_curve[i]) << ','
                  << format_number(m.stderr_curve[i]) << '\n';
    }
    {
        auto f = open_output(out_dir / "auc_table.csv");
        write_header(f, hash, "method,checkpoint,mean_auc,stderr,n");
        for (const auto& m : report.methods)
            for (std::size_t c = 0; c < report.checkpoints.size(); ++c)
                f << m.method << ',' << format_number(report.checkpoints[c]) << ',' << format_number(mean(m.auc[c]))
                  << ',' << format_number(standard_error(m.auc[c])) << ',' << m.auc[c].size() << '\n';
    }
    {
        auto f = open_output(out_dir / "wtl_table.csv");
        write_header(f, hash, "checkpoint,method_a,method_b,decision,mean_a,mean_b,p_value");
        for (const auto& e : report.wtl)
            f << format_number(e.checkpoint) << ',' << e.method_a << ',' << e.method_b << ',' << to_string(e.decision)
              << ',' << format_number(e.mean_a) << ',' << format_number(e.mean_b) << ','
              << format_number(e.p_value) << '\n';
    }
    {
        auto f = open_output(out_dir / "win_proportions.csv");
        write_header(f, hash, "bin_start,bin_end,expert,win_fraction,relative_increment");
        if (report.characterization) {
            const auto& ch = *report.characterization;
            for (const auto& b : ch.bins)
                for (std::size_t n = 0; n < ch.experts.size(); ++n)
                    f << b.first_iteration << ',' << b.last_iteration << ',' << ch.experts[n] << ','
                      << format_number(b.win_fraction[n]) << ',' << format_number(b.relative_increment[n]) << '\n';
            for (std::size_t n = 0; n < ch.experts.size(); ++n)
                f << "all,all," << ch.experts[n] << ',' << format_number(ch.overall_win_fraction[n]) << ",\n";
            f << "# stationary=" << (ch.stationary ? "true" : "false") << " theta=" << format_number(ch.theta) << '\n';
        }
    }
    if (report.mode == "bandit-sim") {
        auto f = open_output(out_dir / "regret.csv");
        write_header(f, hash, "t,cum_regret_dynamic,cum_regret_static,policy,seed");
        for (const auto& s : report.regret)
            for (std::size_t t = 0; t < s.dynamic_trace.size(); ++t)
                f << (t + 1) << ',' << format_number(s.dynamic_trace[t]) << ',' << format_number(s.static_trace[t])
                  << ',' << s.policy << ',' << s.seed << '\n';
    }
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, const std::string& hash) {
    out << "# config_hash=" << hash << '\n';
    out << "# method=" << trace.method << " seed=" << trace.seed << " reward=" << to_string(trace.reward)
        << " gamma=" << format_number(trace.gamma) << " initial_accuracy=" << format_number(trace.initial_accuracy)
        << '\n';
    out << "# classes=";
    for (std::size_t c = 0; c < trace.class_names.size(); ++c)
        out << (c ? "," : "") << trace.class_names[c] << ':' << c;
    out << '\n';
    // Single-criterion runs carry no bandit weights.
    const std::size_t N = trace.records.empty() ? 0 : trace.records.front().weights.size();
    out << "t,instance_id,p_chosen,reward,iwa,test_acc";
    for (std::size_t n = 0; n < N; ++n) out << ",w_" << (n + 1);
    out << ",restart_flag\n";
    for (const auto& r : trace.records) {
        out << r.t << ',' << r.instance_id << ',' << format_number(r.p_chosen) << ',' << format_number(r.reward) << ','
            << format_number(r.iwa) << ',' << format_number(r.test_acc);
        for (std::size_t n = 0; n < N; ++n) out << ',' << format_number(r.weights[n]);
        out << ',' << (r.restart ? 1 : 0) << '\n';
    }
}

}  // namespace deal
