#include "timing/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace timing {

using json = nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw ConfigError("config: " + msg); }

const json& need(const json& obj, const std::string& ctx, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) bad(ctx + ": missing key '" + key + "'");
    return *it;
}

double need_num(const json& obj, const std::string& ctx, const char* key) {
    const json& v = need(obj, ctx, key);
    if (!v.is_number()) bad(ctx + "." + key + ": expected a number");
    return v.get<double>();
}

double num_or(const json& obj, const char* key, double fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return it->get<double>();
}

long long int_or(const json& obj, const char* key, long long fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return it->get<long long>();
}

std::string str_or(const json& obj, const char* key, const std::string& fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return it->get<std::string>();
}

MatrixEntry parse_entry(const json& e, const std::string& ctx) {
    MatrixEntry out;
    const std::string kind = need(e, ctx, "kind").get<std::string>();
    if (kind == "constant") {
        out.kind = MatrixEntry::Kind::Constant;
        out.a = need_num(e, ctx, "value");
    } else if (kind == "lognormal") {
        out.kind = MatrixEntry::Kind::Lognormal;
        out.a = need_num(e, ctx, "mean_log");
        out.b = need_num(e, ctx, "sigma");
    } else if (kind == "twopoint" || kind == "shared_twopoint") {
        out.kind = kind == "twopoint" ? MatrixEntry::Kind::TwoPoint : MatrixEntry::Kind::SharedTwoPoint;
        out.a = need_num(e, ctx, "low");
        out.b = need_num(e, ctx, "high");
        out.p = need_num(e, ctx, "p_high");
        out.group = static_cast<int>(int_or(e, "group", 0));
    } else {
        bad(ctx + ": unknown entry kind '" + kind + "'");
    }
    return out;
}

LatencyModel parse_latency(const json& lat, int protocol_n, const std::string& base_dir) {
    const std::string kind = need(lat, "latency", "kind").get<std::string>();
    if (kind == "line") {
        const int n = static_cast<int>(int_or(lat, "n", protocol_n));
        if (n <= 0) bad("latency.line: need 'n' here or in the protocol block");
        return LatencyModel::line(n);
    }
    if (kind == "cluster") {
        return LatencyModel::cluster(static_cast<int>(need_num(lat, "latency.cluster", "size_x")),
                                     static_cast<int>(need_num(lat, "latency.cluster", "size_y")),
                                     need_num(lat, "latency.cluster", "eps"),
                                     need_num(lat, "latency.cluster", "inter"));
    }
    if (kind == "world") {
        PingTable table;
        if (auto it = lat.find("pings"); it != lat.end()) {
            std::string path = it->get<std::string>();
            if (!path.empty() && path.front() != '/' && !base_dir.empty()) path = base_dir + "/" + path;
            try {
                table = PingTable::load_file(path);
            } catch (const std::exception& e) {
                bad(std::string("latency.world: ") + e.what());
            }
        } else {
            table = bundled_world_table();
        }
        WorldOptions opt;
        opt.intra_mean_log = num_or(lat, "intra_mean_log", 1.0);
        opt.intra_sigma = num_or(lat, "intra_sigma", 0.5);
        opt.inter_sigma = num_or(lat, "inter_sigma", 0.8);
        if (auto it = lat.find("normalize_weights"); it != lat.end())
            opt.normalize_to = it->get<int>();
        return LatencyModel::world(table, opt);
    }
    if (kind == "matrix") {
        const int n = static_cast<int>(need_num(lat, "latency.matrix", "n"));
        MatrixEntry fill; // zero-latency default
        if (auto it = lat.find("fill"); it != lat.end()) fill = parse_entry(*it, "latency.matrix.fill");
        std::vector<MatrixEntry> entries(static_cast<std::size_t>(n) * n, fill);
        if (auto it = lat.find("entries"); it != lat.end()) {
            for (const auto& e : *it) {
                const int from = static_cast<int>(need_num(e, "latency.matrix.entries", "from"));
                const int to = static_cast<int>(need_num(e, "latency.matrix.entries", "to"));
                if (from < 0 || to < 0 || from >= n || to >= n)
                    bad("latency.matrix.entries: index out of range");
                entries[static_cast<std::size_t>(from) * n + to] =
                    parse_entry(e, "latency.matrix.entries");
            }
        }
        return LatencyModel::explicit_matrix(n, std::move(entries));
    }
    bad("latency: unknown kind '" + kind + "'");
}

ProposalRule parse_proposal(const json& v, const std::string& ctx) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "early") return ProposalRule::early();
        if (s == "late") return ProposalRule::late();
        bad(ctx + ": unknown proposal rule '" + s + "'");
    }
    if (v.is_object() && v.contains("fixed_delay"))
        return ProposalRule::fixed(need_num(v, ctx, "fixed_delay"));
    bad(ctx + ": expected 'early', 'late', or {\"fixed_delay\": ms}");
}

VoteRule parse_vote_rule(const std::string& s, const std::string& ctx) {
    if (s == "honest") return VoteRule::Honest;
    if (s == "always_timeout") return VoteRule::AlwaysTimeout;
    if (s == "zero_for_coalition") return VoteRule::ZeroForCoalition;
    bad(ctx + ": unknown vote rule '" + s + "'");
}

StrategyProfile parse_strategy(const json& root, int n) {
    StrategyProfile profile = StrategyProfile::honest(n);
    auto it = root.find("strategy");
    if (it == root.end()) return profile;
    const json& s = *it;

    if (auto p = s.find("proposal"); p != s.end())
        profile.proposal.assign(n, parse_proposal(*p, "strategy.proposal"));
    if (auto v = s.find("votes"); v != s.end())
        profile.vote.assign(n, parse_vote_rule(v->get<std::string>(), "strategy.votes"));

    if (auto c = s.find("coalition"); c != s.end()) {
        Coalition coalition;
        for (const auto& m : need(*c, "strategy.coalition", "members"))
            coalition.members.push_back(m.get<int>());
        const std::string type = str_or(*c, "type", "rational");
        if (type == "whale") coalition.type = CoalitionType::Whale;
        else if (type == "rational") coalition.type = CoalitionType::Rational;
        else if (type == "zero_voting_large") coalition.type = CoalitionType::ZeroVotingLarge;
        else bad("strategy.coalition.type: unknown type '" + type + "'");
        if (coalition.type != CoalitionType::Whale) {
            for (int v : coalition.members) {
                if (v < 0 || v >= n) bad("strategy.coalition: member out of range");
                profile.vote[v] = VoteRule::ZeroForCoalition;
            }
        }
        if (coalition.type == CoalitionType::ZeroVotingLarge)
            for (int v : coalition.members) profile.proposal[v] = ProposalRule::late();
        profile.coalition = std::move(coalition);
    }

    if (auto o = s.find("proposal_overrides"); o != s.end()) {
        for (auto it2 = o->begin(); it2 != o->end(); ++it2) {
            const int v = std::stoi(it2.key());
            if (v < 0 || v >= n) bad("strategy.proposal_overrides: validator out of range");
            profile.proposal[v] = parse_proposal(it2.value(), "strategy.proposal_overrides");
        }
    }
    return profile;
}

OracleSpec parse_oracle(const json& o) {
    OracleSpec spec;
    const std::string family = need(o, "oracle", "family").get<std::string>();
    if (family == "fairness_line") spec.family = OracleSpec::Family::FairnessLine;
    else if (family == "fairness_cluster") spec.family = OracleSpec::Family::FairnessCluster;
    else bad("oracle.family: unknown family '" + family + "'");
    spec.kappa = num_or(o, "kappa", spec.kappa);
    spec.d = num_or(o, "d", spec.d);
    spec.mu = num_or(o, "mu", spec.mu);
    spec.mu0 = num_or(o, "mu0", spec.mu0);
    spec.b0_static = num_or(o, "b0_static", spec.b0_static);
    spec.eps = num_or(o, "eps", spec.eps);
    spec.x_frac = num_or(o, "x_frac", spec.x_frac);
    if (auto g = o.find("grid"); g != o.end())
        for (const auto& v : *g) spec.grid.push_back(v.get<double>());
    if (spec.grid.empty()) bad("oracle.grid: need at least one grid point");
    if (!(spec.kappa > 1.0))
        bad("oracle.kappa: dynamic-reward advantage needs kappa > 1 (time-decreasing)");
    return spec;
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir,
                              const ConfigOverrides& overrides) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < json_text.size(); ++i) {
            if (json_text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        bad("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
            e.what());
    }
    if (!root.is_object()) bad("top level must be an object");

    // Fold command-line overrides into the document so the canonical form
    // reflects what actually ran.
    if (overrides.seed) root["sim"]["seed"] = *overrides.seed;
    if (overrides.rounds) root["sim"]["rounds"] = *overrides.rounds;
    if (overrides.output) root["output"] = *overrides.output;
    if (overrides.normalize_weights) {
        if (!root.contains("latency") || root["latency"].value("kind", "") != "world")
            bad("--normalize-weights only applies to world latency models");
        root["latency"]["normalize_weights"] = *overrides.normalize_weights;
    }

    ExperimentConfig cfg;
    cfg.canonical_text = root.dump(2) + "\n";
    cfg.schema_version = static_cast<int>(int_or(root, "schema_version", 1));
    if (cfg.schema_version != 1) bad("unsupported schema_version " + std::to_string(cfg.schema_version));
    cfg.name = str_or(root, "name", "experiment");
    cfg.mode = str_or(root, "mode", "simulate");
    if (cfg.mode != "simulate" && cfg.mode != "oracle" && cfg.mode != "compare")
        bad("mode must be simulate, oracle, or compare");
    cfg.output = str_or(root, "output", "");

    if (auto o = root.find("oracle"); o != root.end()) cfg.oracle = parse_oracle(*o);

    if (auto c = root.find("compare"); c != root.end()) {
        cfg.compare.tolerance = num_or(*c, "tolerance", cfg.compare.tolerance);
        const std::string baseline = str_or(*c, "baseline", "honest");
        if (baseline == "honest") cfg.compare.baseline = CompareSpec::Baseline::Honest;
        else if (baseline == "late") cfg.compare.baseline = CompareSpec::Baseline::Late;
        else if (baseline == "coalition") cfg.compare.baseline = CompareSpec::Baseline::Coalition;
        else bad("compare.baseline: unknown baseline '" + baseline + "'");
        if (!(cfg.compare.tolerance > 0.0)) bad("compare.tolerance: must be positive");
    }

    const bool needs_sim = cfg.mode != "oracle";
    auto proto_it = root.find("protocol");
    if (proto_it == root.end()) {
        if (needs_sim) bad("missing 'protocol' block");
        return cfg;
    }
    const json& proto = *proto_it;

    // The latency model may define n (cluster sizes, matrix n, world weights);
    // the protocol block may rely on it.
    const int declared_n = static_cast<int>(int_or(proto, "n", 0));
    LatencyModel model = parse_latency(need(root, "config", "latency"), declared_n, base_dir);
    const int n = declared_n > 0 ? declared_n : model.n();
    if (model.n() != n)
        bad("protocol.n=" + std::to_string(n) + " does not match the latency model's " +
            std::to_string(model.n()) + " nodes");

    const int c = static_cast<int>(int_or(proto, "c", 2 * n / 3 + 1));
    const int m = static_cast<int>(int_or(proto, "m", 2 * (n - c)));
    const double tau = need_num(proto, "protocol", "tau");
    ProtocolParams protocol;
    try {
        protocol = ProtocolParams(n, c, m, tau);
    } catch (const std::exception& e) {
        bad(std::string("protocol: ") + e.what());
    }

    const json& rew = need(root, "config", "rewards");
    const double mu = need_num(rew, "rewards", "mu");
    const double mu0 = num_or(rew, "mu0", 0.0);
    RewardParams rewards;
    try {
        if (rew.contains("kappa")) rewards = RewardParams::from_ratio(mu, mu0, need_num(rew, "rewards", "kappa"), tau);
        else if (rew.contains("b")) rewards = RewardParams::from_slopes(mu, mu0, need_num(rew, "rewards", "b"), tau);
        else if (rew.contains("b0")) rewards = RewardParams::from_intercept(mu, mu0, need_num(rew, "rewards", "b0"), tau);
        else bad("rewards: need one of kappa, b, or b0");
        if (rew.contains("target")) rewards.target_duration = need_num(rew, "rewards", "target");
        rewards.d = num_or(rew, "d", 0.0);
        rewards.validate(protocol);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        bad(std::string("rewards: ") + e.what());
    }

    SimConfig sim;
    sim.model = std::move(model);
    sim.protocol = protocol;
    sim.rewards = rewards;
    const std::string reward_mode = str_or(rew, "mode", "dynamic");
    if (reward_mode == "dynamic") sim.reward_mode = RewardMode::Dynamic;
    else if (reward_mode == "static") sim.reward_mode = RewardMode::Static;
    else bad("rewards.mode: expected 'dynamic' or 'static'");

    sim.profile = parse_strategy(root, n);

    if (auto e = root.find("election"); e != root.end()) {
        const std::string mode = str_or(*e, "mode", "uniform");
        if (mode == "uniform") {
            sim.election.mode = ElectionMode::Uniform;
        } else if (mode == "binary_decay") {
            sim.election.mode = ElectionMode::BinaryDecay;
            sim.election.rho = need_num(*e, "election", "rho");
            sim.election.threshold = need_num(*e, "election", "threshold");
        } else {
            bad("election.mode: expected 'uniform' or 'binary_decay'");
        }
    }

    if (auto s = root.find("sim"); s != root.end()) {
        sim.rounds = int_or(*s, "rounds", sim.rounds);
        sim.replications = static_cast<int>(int_or(*s, "replications", sim.replications));
        sim.seed = static_cast<std::uint64_t>(int_or(*s, "seed", 0));
        sim.burn_in_fraction = num_or(*s, "burn_in", sim.burn_in_fraction);
        sim.threads = static_cast<int>(int_or(*s, "threads", sim.threads));
    } else if (needs_sim) {
        bad("missing 'sim' block");
    }
    try {
        sim.validate();
    } catch (const std::exception& e) {
        bad(e.what());
    }

    if (!is_time_decreasing(sim.rewards))
        cfg.warnings.push_back("rewards are not time-decreasing (b0 > mu*tau fails); "
                               "early proposing is not incentivized");
    if (sim.reward_mode == RewardMode::Static && sim.rewards.b0 == 0.0)
        cfg.warnings.push_back("static reward mode with b0 = 0 pays no block reward");

    cfg.sim = std::move(sim);
    return cfg;
}

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string base_dir;
    if (auto slash = path.find_last_of('/'); slash != std::string::npos) base_dir = path.substr(0, slash);
    return parse_config(buf.str(), base_dir, overrides);
}

std::string ExperimentConfig::canonical() const { return canonical_text; }

} // namespace timing
