#pragma once

// Brute-force reference implementations used as independent oracles. These
// deliberately avoid the library's kernels: plain full sorts over explicitly
// materialized matrices.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "timing/latency.hpp"

namespace testsupport {

using Matrix = std::vector<std::vector<double>>;

inline Matrix line_matrix(int n) {
    Matrix m(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[i][j] = std::abs(i - j);
    return m;
}

inline Matrix cluster_matrix(int size_x, int size_y, double eps, double l) {
    const int n = size_x + size_y;
    Matrix m(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) m[i][j] = ((i < size_x) == (j < size_x)) ? eps : l;
    return m;
}

inline Matrix materialize(const timing::LatencyDraw& d) {
    Matrix m(d.n, std::vector<double>(d.n));
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j) m[i][j] = d(i, j);
    return m;
}

inline double nth_smallest(std::vector<double> values, int rank) {
    std::sort(values.begin(), values.end());
    return values[static_cast<std::size_t>(rank - 1)];
}

inline double quorum(const Matrix& m, int j, int i, int c) {
    std::vector<double> sums;
    for (std::size_t k = 0; k < m.size(); ++k) sums.push_back(m[j][k] + m[k][i]);
    return nth_smallest(std::move(sums), c);
}

inline double start(const Matrix& m, int j, int i, int c) {
    return std::max(quorum(m, j, i, c), m[j][i]);
}

inline double error(const Matrix& m, int i, int j, int r) {
    std::vector<double> diffs;
    for (std::size_t k = 0; k < m.size(); ++k) diffs.push_back(m[i][k] - m[j][k]);
    return nth_smallest(std::move(diffs), r);
}

inline double mean_start(const Matrix& m, int i, int c) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) sum += start(m, static_cast<int>(j), i, c);
    return sum / static_cast<double>(m.size());
}

inline double mean_error(const Matrix& m, int i, int r) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) sum += error(m, i, static_cast<int>(j), r);
    return sum / static_cast<double>(m.size());
}

// Largest intentional delay keeping c validators under the timeout, computed
// from per-validator timeout margins instead of the e_c shortcut.
inline double max_delay_by_margins(const Matrix& cur, const Matrix& prev, int i, int j, double s,
                                   double tau, int c) {
    std::vector<double> margins;
    for (std::size_t k = 0; k < cur.size(); ++k)
        margins.push_back(tau - s - (cur[i][k] - prev[j][k]));
    std::sort(margins.begin(), margins.end(), std::greater<>());
    return margins[static_cast<std::size_t>(c - 1)];
}

} // namespace testsupport
