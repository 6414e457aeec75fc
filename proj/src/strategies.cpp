#include "timing/strategies.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace timing {

bool Coalition::contains(int v) const {
    return std::find(members.begin(), members.end(), v) != members.end();
}

StrategyProfile StrategyProfile::uniform(int n, ProposalRule p, VoteRule v) {
    StrategyProfile profile;
    profile.proposal.assign(n, p);
    profile.vote.assign(n, v);
    return profile;
}

StrategyProfile StrategyProfile::with_coalition(int n, Coalition coalition) {
    StrategyProfile profile = honest(n);
    if (coalition.type != CoalitionType::Whale) {
        for (int v : coalition.members) profile.vote[v] = VoteRule::ZeroForCoalition;
    }
    if (coalition.type == CoalitionType::ZeroVotingLarge) {
        for (int v : coalition.members) profile.proposal[v] = ProposalRule::late();
    }
    profile.coalition = std::move(coalition);
    return profile;
}

void StrategyProfile::validate(int n) const {
    if (static_cast<int>(proposal.size()) != n || static_cast<int>(vote.size()) != n)
        throw std::invalid_argument("strategy: need one proposal and one vote rule per validator");
    for (const auto& rule : proposal)
        if (rule.kind == ProposalRule::Kind::FixedDelay && rule.fixed_delay < 0.0)
            throw std::invalid_argument("strategy: fixed delay must be nonnegative");
    if (coalition) {
        if (coalition->members.empty()) throw std::invalid_argument("strategy: empty coalition");
        for (int v : coalition->members)
            if (v < 0 || v >= n)
                throw std::invalid_argument("strategy: coalition member " + std::to_string(v) +
                                            " out of range");
        auto sorted = coalition->members;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("strategy: duplicate coalition member");
    }
}

bool StrategyProfile::whale_colocated(int i, int j) const {
    return coalition && coalition->type == CoalitionType::Whale && coalition->contains(i) &&
           coalition->contains(j);
}

Time decide_delay(const ProposalRule& rule, Time max_delay) {
    if (max_delay < 0.0) throw std::invalid_argument("decide_delay: negative maximum delay");
    switch (rule.kind) {
    case ProposalRule::Kind::EarlyHonest: return 0.0;
    case ProposalRule::Kind::Late: return max_delay;
    case ProposalRule::Kind::FixedDelay: return std::min(rule.fixed_delay, max_delay);
    }
    return 0.0;
}

Vote decide_vote(const StrategyProfile& profile, int voter, int leader, Time observed) {
    switch (profile.vote[voter]) {
    case VoteRule::Honest: return Vote::present(observed);
    case VoteRule::ZeroForCoalition:
        if (profile.coalition && profile.coalition->contains(voter) && profile.coalition->contains(leader))
            return Vote::present(0.0);
        return Vote::present(observed);
    case VoteRule::AlwaysTimeout: return Vote::missing();
    }
    return Vote::present(observed);
}

CoalitionSize classify_coalition(int coalition_size, const ProtocolParams& params) {
    if (coalition_size <= 0) throw std::invalid_argument("classify_coalition: empty coalition");
    if (coalition_size < params.k_small()) return CoalitionSize::Small;
    if (coalition_size < params.m) return CoalitionSize::Medium;
    return CoalitionSize::Large;
}

int coalition_latency_penalty_rank(int coalition_size, const ProtocolParams& params) {
    if (coalition_size < 0 || coalition_size > params.k_small())
        throw std::invalid_argument(
            "coalition_latency_penalty_rank: established only for coalitions of size at most k = " +
            std::to_string(params.k_small()));
    return params.m - coalition_size;
}

} // namespace timing
