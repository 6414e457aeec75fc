#include "timing/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>

namespace timing {

void SimConfig::validate() const {
    if (rounds < 1) throw std::invalid_argument("sim: rounds must be at least 1");
    if (replications < 1) throw std::invalid_argument("sim: replications must be at least 1");
    if (model.n() != protocol.n)
        throw std::invalid_argument("sim: latency model has " + std::to_string(model.n()) +
                                    " nodes but protocol expects " + std::to_string(protocol.n));
    rewards.validate(protocol);
    profile.validate(protocol.n);
    if (burn_in_fraction < 0.0 || burn_in_fraction >= 1.0)
        throw std::invalid_argument("sim: burn-in fraction must lie in [0,1)");
    if (election.mode == ElectionMode::BinaryDecay) {
        if (!(election.rho > 0.0 && election.rho < 1.0))
            throw std::invalid_argument("sim: binary-decay rho must lie in (0,1)");
        if (!(election.threshold > 0.0 && election.threshold < protocol.tau))
            throw std::invalid_argument("sim: binary-decay threshold must lie in (0, tau)");
    }
}

long long SimConfig::burn_in_rounds() const {
    return static_cast<long long>(burn_in_fraction * static_cast<double>(rounds));
}

SimState make_state(const SimConfig& config, std::uint64_t replication) {
    const int n = config.protocol.n;
    SimState s;
    s.latency_stream = derive_stream(config.seed, replication, StreamTag::Latency);
    s.election_rng = SplitMix(derive_stream(config.seed, replication, StreamTag::Election));
    s.prev_block.assign(n, 0.0);
    s.weight_low.assign(n, 0);
    s.reward.assign(n, 0.0);
    s.led_time.assign(n, 0.0);
    s.leaderships.assign(n, 0);
    s.elections.assign(n, 0);
    s.elections_low.assign(n, 0);
    s.penalized.assign(n, 0);
    s.cur_block.resize(n);
    s.vote_col.resize(n);
    s.diffs.resize(n);
    s.scratch.resize(n);
    s.votes.resize(n);
    s.weights_scratch.resize(n);
    return s;
}

int elect_leader(std::span<const double> weights, ElectionMode mode, SplitMix& rng) {
    const int n = static_cast<int>(weights.size());
    const double u = rng.next_u01();
    if (mode == ElectionMode::Uniform)
        return std::min(n - 1, static_cast<int>(u * n));
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("elect_leader: weights must be positive");
        total += w;
    }
    double target = u * total;
    for (int i = 0; i < n; ++i) {
        target -= weights[i];
        if (target < 0.0) return i;
    }
    return n - 1;
}

double update_weight(double w, Time aggregated_vote, double rho, Time threshold) {
    if (aggregated_vote <= threshold) return std::min(1.0, w + rho);
    return std::max(1.0 - rho, w - rho);
}

namespace {

struct RunFlags {
    bool all_late = false;
    bool decay = false;
    bool whale = false;
    bool is_static = false;
};

RunFlags flags_for(const SimConfig& config) {
    RunFlags f;
    f.all_late = std::all_of(config.profile.proposal.begin(), config.profile.proposal.end(),
                             [](const ProposalRule& r) { return r.kind == ProposalRule::Kind::Late; });
    f.decay = config.election.mode == ElectionMode::BinaryDecay;
    f.whale = config.profile.coalition && config.profile.coalition->type == CoalitionType::Whale;
    f.is_static = config.reward_mode == RewardMode::Static;
    return f;
}

// One round of the game. `count` gates the utility accumulators (burn-in);
// `out` is filled only when a caller wants the full outcome.
void step(SimState& s, const SimConfig& config, const RunFlags& f, bool count, RoundOutcome* out) {
    const ProtocolParams& p = config.protocol;
    const int n = p.n;

    int leader;
    if (f.decay) {
        for (int k = 0; k < n; ++k)
            s.weights_scratch[k] = s.weight_low[k] ? 1.0 - config.election.rho : 1.0;
        leader = elect_leader(s.weights_scratch, ElectionMode::BinaryDecay, s.election_rng);
    } else {
        leader = elect_leader(s.weights_scratch, ElectionMode::Uniform, s.election_rng);
    }
    s.leaderships[leader] += 1;

    for (int k = 0; k < n; ++k) {
        s.cur_block[k] = config.model.entry(s.latency_stream, s.round, leader, k);
        s.vote_col[k] = config.model.entry(s.latency_stream, s.round, k, leader);
    }
    if (f.whale) {
        for (int k = 0; k < n; ++k)
            if (config.profile.whale_colocated(leader, k)) {
                s.cur_block[k] = 0.0;
                s.vote_col[k] = 0.0;
            }
    }

    Time start = 0.0;
    if (s.round > 0) {
        const Time q = quorum_time_kernel(s.prev_block, s.vote_col, p.c, s.scratch);
        start = std::max(q, s.prev_block[leader]);
    }

    for (int k = 0; k < n; ++k) s.diffs[k] = s.cur_block[k] - s.prev_block[k];
    std::copy(s.diffs.begin(), s.diffs.end(), s.scratch.begin());
    const Time e_c = order_statistic_inplace(std::span(s.scratch).first(n), p.c);
    const Time raw_max = p.tau - start - e_c;
    const Time max_delay = compute_max_delay(start, e_c, p.tau, &s.violations);
    const Time delay = decide_delay(config.profile.proposal[leader], max_delay);

    for (int k = 0; k < n; ++k) {
        const Time observed = delay + start + s.diffs[k];
        s.votes[k] = decide_vote(config.profile, k, leader, observed);
    }
    for (int k = 0; k < n; ++k)
        s.scratch[k] = s.votes[k].absent ? kInfiniteVote : s.votes[k].value;
    const Time v_star = order_statistic_inplace(std::span(s.scratch).first(n), p.m);

    Time block = 0.0;
    if (f.is_static) {
        block = config.rewards.b0;
    } else {
        block = block_reward(config.rewards, v_star, &s.violations);
    }
    const Time duration = delay + start;
    const Time reward = mev(config.rewards, duration) + block;

    if (f.all_late && raw_max >= 0.0) {
        // With maximal delay the c-th slowest perceived duration is the timeout.
        for (int k = 0; k < n; ++k) s.scratch[k] = delay + start + s.diffs[k];
        const Time cth = order_statistic_inplace(std::span(s.scratch).first(n), p.c);
        s.late_identity_max_err = std::max(s.late_identity_max_err, std::abs(cth - p.tau));
    }

    if (count) {
        s.total_time += duration;
        s.reward[leader] += reward;
        s.led_time[leader] += duration;
    }

    if (f.decay) {
        s.elections[leader] += 1;
        if (s.weight_low[leader]) s.elections_low[leader] += 1;
        const bool penalty = v_star > config.election.threshold;
        if (penalty) s.penalized[leader] += 1;
        s.weight_low[leader] = penalty ? 1 : 0;
    }

    if (out) {
        out->round = s.round;
        out->leader = leader;
        out->prev_leader = s.prev_leader;
        out->start_time = start;
        out->max_delay = max_delay;
        out->delay = delay;
        out->votes.assign(s.votes.begin(), s.votes.end());
        out->aggregated_vote = v_star;
        out->duration = duration;
        out->reward = reward;
    }

    s.prev_leader = leader;
    std::swap(s.prev_block, s.cur_block);
    s.round += 1;
}

SimState run_replication(const SimConfig& config, std::uint64_t replication, long long rounds) {
    SimState s = make_state(config, replication);
    const RunFlags f = flags_for(config);
    const long long burn = config.burn_in_rounds();
    for (long long r = 0; r < rounds; ++r) step(s, config, f, r >= burn, nullptr);
    return s;
}

} // namespace

RoundOutcome run_round(SimState& state, const SimConfig& config) {
    const RunFlags f = flags_for(config);
    RoundOutcome out;
    step(state, config, f, true, &out);
    return out;
}

UtilityReport run_experiment(const SimConfig& config) {
    config.validate();
    const int n = config.protocol.n;
    const int reps = config.replications;

    std::vector<SimState> results(reps, make_state(config, 0));
    int threads = config.threads;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, reps));

    if (threads == 1) {
        for (int r = 0; r < reps; ++r) results[r] = run_replication(config, r, config.rounds);
    } else {
        std::vector<std::future<SimState>> futures;
        futures.reserve(reps);
        for (int r = 0; r < reps; ++r)
            futures.push_back(std::async(std::launch::async | std::launch::deferred,
                                         [&config, r] { return run_replication(config, r, config.rounds); }));
        for (int r = 0; r < reps; ++r) results[r] = futures[r].get();
    }

    UtilityReport report;
    report.rounds = config.rounds;
    report.replications = reps;
    report.burn_in_rounds = config.burn_in_rounds();
    report.validators.resize(n);
    const RunFlags f = flags_for(config);
    report.late_identity_tracked = f.all_late;

    // Per-replication utility is reward over total chain time (ratio of sums,
    // matching the renewal-reward estimator); replications are then averaged.
    std::vector<std::vector<double>> utilities(reps, std::vector<double>(n, 0.0));
    for (int r = 0; r < reps; ++r) {
        const SimState& s = results[r];
        if (s.total_time == 0.0) report.degenerate_zero_time = true;
        for (int i = 0; i < n; ++i)
            utilities[r][i] = s.total_time == 0.0 ? std::numeric_limits<double>::infinity()
                                                  : s.reward[i] / s.total_time;
        report.total_time += s.total_time;
        report.violations += s.violations;
        report.late_identity_max_err = std::max(report.late_identity_max_err, s.late_identity_max_err);
    }

    for (int i = 0; i < n; ++i) {
        ValidatorResult& v = report.validators[i];
        v.id = i;
        v.tag = config.model.node_tag(i);
        double mean = 0.0;
        for (int r = 0; r < reps; ++r) {
            v.leaderships += results[r].leaderships[i];
            v.reward += results[r].reward[i];
            v.led_time += results[r].led_time[i];
            mean += utilities[r][i];
        }
        mean /= reps;
        v.utility = mean;
        if (reps > 1 && std::isfinite(mean)) {
            double ss = 0.0;
            for (int r = 0; r < reps; ++r) {
                const double dlt = utilities[r][i] - mean;
                ss += dlt * dlt;
            }
            v.utility_stderr = std::sqrt(ss / (reps - 1) / reps);
        }
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& v : report.validators) {
        lo = std::min(lo, v.utility);
        hi = std::max(hi, v.utility);
    }
    if (lo == hi) {
        report.advantage = 0.0; // includes the degenerate all-infinite case
    } else if (lo > 0.0 && std::isfinite(hi)) {
        report.advantage = hi / lo - 1.0;
    } else {
        report.advantage = std::numeric_limits<double>::quiet_NaN();
        report.degenerate_zero_time = true;
    }
    return report;
}

WeightDistribution empirical_weight_distribution(const SimConfig& config, long long horizon_rounds) {
    SimConfig cfg = config;
    cfg.rounds = horizon_rounds;
    cfg.validate();
    if (cfg.election.mode != ElectionMode::BinaryDecay)
        throw std::invalid_argument("empirical_weight_distribution: needs binary-decay election");
    for (int i = 0; i < cfg.protocol.n; ++i) {
        if (cfg.profile.proposal[i].kind != ProposalRule::Kind::EarlyHonest ||
            cfg.profile.vote[i] != VoteRule::Honest)
            throw std::invalid_argument(
                "empirical_weight_distribution: defined for the early-honest profile");
    }

    const int n = cfg.protocol.n;
    const double rho = cfg.election.rho;
    WeightDistribution dist;
    dist.validators.resize(n);

    std::vector<long long> elections(n, 0), low(n, 0), penalized(n, 0);
    bool any_low = false;
    for (int r = 0; r < cfg.replications; ++r) {
        SimState s = make_state(cfg, r);
        const RunFlags f = flags_for(cfg);
        for (long long round = 0; round < cfg.rounds; ++round) {
            step(s, cfg, f, false, nullptr);
            if (!any_low)
                any_low = std::any_of(s.weight_low.begin(), s.weight_low.end(),
                                      [](std::uint8_t b) { return b != 0; });
        }
        for (int i = 0; i < n; ++i) {
            elections[i] += s.elections[i];
            low[i] += s.elections_low[i];
            penalized[i] += s.penalized[i];
        }
    }
    dist.all_weights_stayed_high = !any_low;

    for (int i = 0; i < n; ++i) {
        WeightValidatorStats& v = dist.validators[i];
        v.id = i;
        v.elections = elections[i];
        v.elections_low_weight = low[i];
        if (elections[i] < 1000) dist.horizon_warning = true;
        if (elections[i] == 0) continue;
        const double e = static_cast<double>(elections[i]);
        v.p_hat = static_cast<double>(penalized[i]) / e;
        // Sojourns at weight w last 1/w chain steps on average, so election
        // counts are reweighted by 1/w to estimate the chain occupancy.
        const double frac_low = static_cast<double>(low[i]) / e;
        const double denom = 1.0 - rho * (1.0 - frac_low);
        v.nu_low_hat = frac_low / denom;
        v.nu_high_hat = 1.0 - v.nu_low_hat;
        const double se_frac = std::sqrt(frac_low * (1.0 - frac_low) / e);
        const double gprime = (1.0 - rho) / (denom * denom);
        v.nu_low_stderr = gprime * se_frac;
    }
    return dist;
}

} // namespace timing
