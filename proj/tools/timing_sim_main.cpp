#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "timing/config.hpp"
#include "timing/oracle.hpp"
#include "timing/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitTolerance = 2;
constexpr int kExitIo = 3;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<long long> rounds;
    std::optional<std::string> out;
    std::optional<int> normalize_weights;
};

void add_common(CLI::App* sub, Options& opt) {
    sub->add_option("--config", opt.config_path, "experiment config file")->required();
    sub->add_option("--seed", opt.seed, "override the config's RNG seed");
    sub->add_option("--rounds", opt.rounds, "override the per-replication round count");
    sub->add_option("--out", opt.out, "output base path (writes <out>.csv and <out>.summary.txt)");
    sub->add_option("--normalize-weights", opt.normalize_weights,
                    "rescale world-model city weights to this many nodes");
}

timing::ExperimentConfig load(const Options& opt) {
    timing::ConfigOverrides ov;
    ov.seed = opt.seed;
    ov.rounds = opt.rounds;
    ov.normalize_weights = opt.normalize_weights;
    ov.output = opt.out;
    auto cfg = timing::load_config(opt.config_path, ov);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    return cfg;
}

void emit(const timing::ExperimentConfig& cfg, const std::string& csv, const std::string& summary) {
    if (cfg.output.empty()) {
        std::cout << csv;
        if (!summary.empty()) std::cout << "\n" << summary;
        return;
    }
    timing::write_file_atomic(cfg.output + ".csv", csv);
    if (!summary.empty()) timing::write_file_atomic(cfg.output + ".summary.txt", summary);
    std::cout << "wrote " << cfg.output << ".csv\n";
}

int run_simulate(const Options& opt) {
    const auto cfg = load(opt);
    if (!cfg.sim) throw timing::ConfigError("config: simulate mode needs protocol/rewards/latency/sim");
    const auto report = timing::run_experiment(*cfg.sim);
    emit(cfg, timing::report_to_csv(report), timing::report_summary_text(report));
    return kExitOk;
}

int run_oracle(const Options& opt) {
    namespace orc = timing::oracle;
    const auto cfg = load(opt);
    if (!cfg.oracle) throw timing::ConfigError("config: oracle mode needs an 'oracle' block");
    const auto& o = *cfg.oracle;

    std::string csv;
    if (o.family == timing::OracleSpec::Family::FairnessLine) {
        csv = "n,advantage_early,advantage_late\n";
        for (double n : o.grid) {
            const double early = orc::advantage_line_early(n, o.kappa, o.d, o.mu, o.mu0);
            const double late = orc::advantage_line_late(n, o.b0_static, o.mu0, o.d, o.mu);
            csv += timing::format_double(n) + "," + timing::format_double(early) + "," +
                   timing::format_double(late) + "\n";
        }
        const double early_limit = orc::advantage_line_early_limit(o.kappa, o.d);
        const double late_limit = (o.d - 1.0 / 36) / (o.d - 7.0 / 18) - 1.0;
        csv += "limit," + timing::format_double(early_limit) + "," + timing::format_double(late_limit) +
               "\n";
    } else {
        csv = "l,advantage_early,advantage_late\n";
        for (double l : o.grid) {
            const double early =
                orc::advantage_cluster_early(o.x_frac, o.eps, l, o.kappa, o.d, o.mu, o.mu0);
            const double late =
                orc::advantage_cluster_late(o.x_frac, o.eps, l, o.b0_static, o.mu0, o.d, o.mu);
            csv += timing::format_double(l) + "," + timing::format_double(early) + "," +
                   timing::format_double(late) + "\n";
        }
    }
    emit(cfg, csv, "");
    return kExitOk;
}

int run_compare(const Options& opt) {
    namespace orc = timing::oracle;
    const auto cfg = load(opt);
    if (!cfg.sim) throw timing::ConfigError("config: compare mode needs a full simulation config");
    const auto& sim = *cfg.sim;
    if (!sim.model.deterministic())
        throw timing::ConfigError("config: compare mode needs a deterministic latency model");

    orc::UtilityVector expected;
    switch (cfg.compare.baseline) {
    case timing::CompareSpec::Baseline::Honest:
        expected = orc::honest_utility_closed_form(sim.protocol, sim.rewards, sim.model);
        break;
    case timing::CompareSpec::Baseline::Late:
        expected = orc::late_utility_closed_form(sim.protocol, sim.rewards, sim.model,
                                                 sim.reward_mode == timing::RewardMode::Static);
        break;
    case timing::CompareSpec::Baseline::Coalition:
        if (!sim.profile.coalition)
            throw timing::ConfigError("config: coalition baseline needs a coalition");
        expected = orc::coalition_utility_closed_form(sim.protocol, sim.rewards, sim.model,
                                                      sim.profile.coalition->members);
        break;
    }
    if (expected.degenerate_zero_time)
        throw timing::ConfigError("config: oracle utilities are degenerate (zero chain time)");

    const auto report = timing::run_experiment(sim);

    std::string csv = "validator,tag,utility_sim,utility_oracle,rel_error\n";
    double max_rel = 0.0;
    for (int i = 0; i < sim.protocol.n; ++i) {
        const double got = report.validators[i].utility;
        const double want = expected.utility[i];
        const double rel = want != 0.0 ? std::abs(got - want) / std::abs(want)
                                       : std::abs(got - want);
        max_rel = std::max(max_rel, rel);
        csv += std::to_string(i) + "," + report.validators[i].tag + "," + timing::format_double(got) +
               "," + timing::format_double(want) + "," + timing::format_double(rel) + "\n";
    }

    const bool ok = max_rel <= cfg.compare.tolerance;
    std::string summary = timing::report_summary_text(report);
    summary += "max_rel_error=" + timing::format_double(max_rel) + "\n";
    summary += "tolerance=" + timing::format_double(cfg.compare.tolerance) + "\n";
    summary += std::string("comparison=") + (ok ? "pass" : "fail") + "\n";
    emit(cfg, csv, summary);
    if (!ok) {
        std::cerr << "tolerance breach: max relative error " << max_rel << " > "
                  << cfg.compare.tolerance << "\n";
        return kExitTolerance;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"timing-sim: simulator and closed-form calculator for timing games in "
                 "responsive BFT consensus with time-decreasing block rewards"};
    app.require_subcommand(1);

    Options opt;
    auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment");
    auto* oracle = app.add_subcommand("oracle", "emit closed-form advantage tables");
    auto* compare = app.add_subcommand("compare", "run the simulator against the closed forms");
    add_common(simulate, opt);
    add_common(oracle, opt);
    add_common(compare, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return run_simulate(opt);
        if (oracle->parsed()) return run_oracle(opt);
        return run_compare(opt);
    } catch (const timing::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
