#pragma once

#include <optional>
#include <vector>

#include "timing/protocol.hpp"

namespace timing {

/// When to propose: immediately, as late as the timeout allows, or after a
/// fixed extra delay (truncated to the round's maximum).
struct ProposalRule {
    enum class Kind { EarlyHonest, Late, FixedDelay };
    Kind kind = Kind::EarlyHonest;
    Time fixed_delay = 0.0;

    static ProposalRule early() { return {Kind::EarlyHonest, 0.0}; }
    static ProposalRule late() { return {Kind::Late, 0.0}; }
    static ProposalRule fixed(Time delay) { return {Kind::FixedDelay, delay}; }
};

/// How to vote on a leader's round duration.
enum class VoteRule {
    Honest,           // report the observed duration
    ZeroForCoalition, // report 0 when the leader shares the voter's coalition
    AlwaysTimeout,    // never report (aggregates as +inf)
};

enum class CoalitionType {
    Whale,          // one entity, stake co-located: intra-coalition latency 0
    Rational,       // separate agents voting 0 for each other, proposing early
    ZeroVotingLarge // 0-voting coalition whose leaders delay maximally
};

enum class CoalitionSize { Small, Medium, Large };

struct Coalition {
    std::vector<int> members;
    CoalitionType type = CoalitionType::Rational;

    bool contains(int v) const;
};

/// Per-validator proposal and vote rules plus at most one coalition.
struct StrategyProfile {
    std::vector<ProposalRule> proposal; // size n
    std::vector<VoteRule> vote;         // size n
    std::optional<Coalition> coalition;

    static StrategyProfile uniform(int n, ProposalRule p, VoteRule v);

    /// All-early, all-honest profile.
    static StrategyProfile honest(int n) { return uniform(n, ProposalRule::early(), VoteRule::Honest); }

    /// All-late, honest-voting profile.
    static StrategyProfile late(int n) { return uniform(n, ProposalRule::late(), VoteRule::Honest); }

    /// Honest base profile with a coalition overlay. Rational and whale
    /// coalitions keep early proposals; a 0-voting large coalition makes its
    /// members propose late. Coalition members vote 0 for coalition leaders
    /// (rational/large) and honestly for everyone else.
    static StrategyProfile with_coalition(int n, Coalition coalition);

    void validate(int n) const;
    bool whale_colocated(int i, int j) const;
};

/// Chosen delay for the round: Early -> 0, Late -> Delta*, Fixed -> min(delta, Delta*).
Time decide_delay(const ProposalRule& rule, Time max_delay);

/// Vote of validator k on leader i's round given the observed duration.
Vote decide_vote(const StrategyProfile& profile, int voter, int leader, Time observed);

/// Size class from the coalition table: < k small, [k, m) medium, >= m large.
CoalitionSize classify_coalition(int coalition_size, const ProtocolParams& params);

/// Effective aggregation rank over non-coalition validators when a coalition
/// of size |C| <= k votes 0 for its own leaders: m - |C|.
int coalition_latency_penalty_rank(int coalition_size, const ProtocolParams& params);

} // namespace timing
