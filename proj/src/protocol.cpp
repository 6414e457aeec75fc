#include "timing/protocol.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace timing {

ProtocolParams::ProtocolParams(int n_, int c_, int m_, Time tau_) : n(n_), c(c_), m(m_), tau(tau_) {
    if (n < 3) throw std::invalid_argument("protocol: n must be at least 3");
    if (!(2 * c > n && c <= n))
        throw std::invalid_argument("protocol: quorum threshold c must satisfy n/2 < c <= n");
    if (m <= n - c)
        throw std::invalid_argument("protocol: m must satisfy m > n-c (got m=" + std::to_string(m) +
                                    ", n-c=" + std::to_string(n - c) + ")");
    if (m > n) throw std::invalid_argument("protocol: m cannot exceed n");
    if (!(tau > 0)) throw std::invalid_argument("protocol: timeout tau must be positive");
}

Time quorum_time_kernel(std::span<const Time> prev_block, std::span<const Time> vote_col, int c,
                        std::span<Time> scratch) {
    const std::size_t n = prev_block.size();
    for (std::size_t k = 0; k < n; ++k) scratch[k] = prev_block[k] + vote_col[k];
    return order_statistic_inplace(scratch.first(n), c);
}

Time latency_error_kernel(std::span<const Time> cur_block, std::span<const Time> prev_block, int r,
                          std::span<Time> scratch) {
    const std::size_t n = cur_block.size();
    for (std::size_t k = 0; k < n; ++k) scratch[k] = cur_block[k] - prev_block[k];
    return order_statistic_inplace(scratch.first(n), r);
}

namespace {

std::vector<Time> row_of(const LatencyDraw& d, int from) {
    std::vector<Time> row(d.n);
    for (int k = 0; k < d.n; ++k) row[k] = d(from, k);
    return row;
}

std::vector<Time> col_of(const LatencyDraw& d, int to) {
    std::vector<Time> col(d.n);
    for (int k = 0; k < d.n; ++k) col[k] = d(k, to);
    return col;
}

} // namespace

Time quorum_time(const LatencyDraw& draw_prev, const LatencyDraw& draw_votes, int j, int i, int c) {
    if (i == j) throw std::invalid_argument("quorum_time: leader must differ from previous leader");
    auto prev = row_of(draw_prev, j);
    auto votes = col_of(draw_votes, i);
    std::vector<Time> scratch(prev.size());
    return quorum_time_kernel(prev, votes, c, scratch);
}

Time start_time(const LatencyDraw& draw_prev, const LatencyDraw& draw_votes, int j, int i, int c) {
    return std::max(quorum_time(draw_prev, draw_votes, j, i, c), draw_prev(j, i));
}

Time latency_error(const LatencyDraw& draw_i, const LatencyDraw& draw_j, int i, int j, int r) {
    auto cur = row_of(draw_i, i);
    auto prev = row_of(draw_j, j);
    std::vector<Time> scratch(cur.size());
    return latency_error_kernel(cur, prev, r, scratch);
}

Time compute_max_delay(Time s, Time e_c, Time tau, ViolationCounters* violations) {
    const Time raw = tau - s - e_c;
    if (raw < 0) {
        if (violations) violations->max_delay_clamped += 1;
        return 0.0;
    }
    return raw;
}

Time aggregate_votes(std::span<const Vote> votes, int m, int n) {
    if (static_cast<int>(votes.size()) != n)
        throw std::invalid_argument("aggregate_votes: expected one vote slot per validator");
    if (m < 1 || m > n) throw std::invalid_argument("aggregate_votes: rank out of range");

    // Absent votes are +inf, so the m-th smallest is finite iff at least m
    // votes are present.
    std::vector<Time> vals(votes.size());
    for (std::size_t k = 0; k < votes.size(); ++k)
        vals[k] = votes[k].absent ? kInfiniteVote : votes[k].value;
    return order_statistic_inplace(vals, m);
}

} // namespace timing
