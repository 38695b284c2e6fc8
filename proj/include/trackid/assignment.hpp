#pragma once

// One-to-one assignment over a rectangular score matrix.
//
// The objective is lexicographic: first the number of matched pairs with a
// positive score, then the total matched score. Among optimal matchings the
// result is the one whose per-row column vector (row 0 first, an unmatched
// row counting as a column past the last) is lexicographically smallest.
// Totals within kScoreTieTolerance (relative) of the optimum count as ties.

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace trackid {

inline constexpr double kScoreTieTolerance = 1e-10;

struct Match {
  std::size_t row = 0;
  std::size_t col = 0;
  double score = 0.0;
  friend bool operator==(const Match&, const Match&) = default;
};

struct Matching {
  std::vector<Match> pairs;  // ascending row
  double total = 0.0;        // summed in row order

  std::size_t count() const { return pairs.size(); }
};

namespace detail {

inline double tie_threshold(double best) { return best - kScoreTieTolerance * std::max(1.0, std::abs(best)); }

// Max-weight perfect assignment on a square matrix of non-negative weights
// (shortest augmenting path with potentials). Returns the column per row.
inline std::vector<int> hungarian_square(const std::vector<double>& w, int n) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -w[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j]) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

struct SubSolution {
  std::size_t count = 0;
  double score = 0.0;
  std::vector<int> col_of_row;  // -1 = unmatched
};

// Optimal (count, score) over the given rows and columns of `s`.
inline SubSolution best_sub_assignment(const Eigen::MatrixXd& s, const std::vector<int>& rows,
                                       const std::vector<int>& cols) {
  SubSolution out;
  out.col_of_row.assign(rows.size(), -1);
  if (rows.empty() || cols.empty()) return out;
  const int n = static_cast<int>(std::max(rows.size(), cols.size()));
  double big = 1.0;
  for (int r : rows) {
    double m = 0;
    for (int c : cols) m = std::max(m, s(r, c));
    big += m;
  }
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double v = s(rows[i], cols[j]);
      if (v > 0) w[i * n + j] = big + v;
    }
  const std::vector<int> assign = hungarian_square(w, n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int j = assign[i];
    if (j >= 0 && j < static_cast<int>(cols.size()) && s(rows[i], cols[j]) > 0) {
      out.col_of_row[i] = cols[j];
      ++out.count;
      out.score += s(rows[i], cols[j]);
    }
  }
  return out;
}

// Lexicographically smallest optimal matching of one connected component.
inline std::vector<int> solve_component(const Eigen::MatrixXd& s, const std::vector<int>& rows,
                                        const std::vector<int>& cols) {
  const SubSolution best = best_sub_assignment(s, rows, cols);
  const double threshold = tie_threshold(best.score);
  std::vector<int> chosen(rows.size(), -1);
  std::vector<int> free_cols = cols;
  std::size_t prefix_count = 0;
  double prefix_score = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::vector<int> rest_rows(rows.begin() + i + 1, rows.end());
    std::vector<int> candidates;
    for (int c : free_cols)
      if (s(rows[i], c) > 0) candidates.push_back(c);
    candidates.push_back(-1);
    bool accepted = false;
    for (int c : candidates) {
      std::vector<int> rest_cols;
      for (int fc : free_cols)
        if (fc != c) rest_cols.push_back(fc);
      const SubSolution rest = best_sub_assignment(s, rest_rows, rest_cols);
      const std::size_t cnt = prefix_count + (c >= 0 ? 1 : 0) + rest.count;
      const double sc = prefix_score + (c >= 0 ? s(rows[i], c) : 0.0) + rest.score;
      if (cnt == best.count && sc >= threshold) {
        chosen[i] = c;
        accepted = true;
        break;
      }
    }
    if (!accepted) chosen[i] = best.col_of_row[i];  // numerical fallback
    if (chosen[i] >= 0) {
      ++prefix_count;
      prefix_score += s(rows[i], chosen[i]);
      free_cols.erase(std::find(free_cols.begin(), free_cols.end(), chosen[i]));
    }
  }
  return chosen;
}

}  // namespace detail

/// Scores must be non-negative; entries <= 0 are never matched.
inline Matching solve_assignment(const Eigen::MatrixXd& scores) {
  const int nr = static_cast<int>(scores.rows());
  const int nc = static_cast<int>(scores.cols());
  // Connected components of the positive-score bipartite graph.
  std::vector<int> parent(nr + nc);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int r = 0; r < nr; ++r)
    for (int c = 0; c < nc; ++c)
      if (scores(r, c) > 0) parent[find(r)] = find(nr + c);

  std::vector<int> col_of_row(nr, -1);
  std::vector<char> done(nr + nc, 0);
  for (int r = 0; r < nr; ++r) {
    const int root = find(r);
    if (done[root]) continue;
    done[root] = 1;
    std::vector<int> rows, cols;
    for (int rr = r; rr < nr; ++rr)
      if (find(rr) == root) rows.push_back(rr);
    for (int c = 0; c < nc; ++c)
      if (find(nr + c) == root) cols.push_back(c);
    if (cols.empty()) continue;
    if (rows.size() == 1 || cols.size() == 1) {
      // Star component: a single best edge, lowest index on ties.
      int br = -1, bc = -1;
      double bs = 0;
      for (int rr : rows)
        for (int c : cols)
          if (scores(rr, c) > bs) {
            bs = scores(rr, c);
            br = rr;
            bc = c;
          }
      const double threshold = detail::tie_threshold(bs);
      bool found = false;
      for (int rr : rows) {
        for (int c : cols)
          if (scores(rr, c) > 0 && scores(rr, c) >= threshold) {
            br = rr;
            bc = c;
            found = true;
            break;
          }
        if (found) break;
      }
      col_of_row[br] = bc;
      continue;
    }
    const std::vector<int> chosen = detail::solve_component(scores, rows, cols);
    for (std::size_t i = 0; i < rows.size(); ++i) col_of_row[rows[i]] = chosen[i];
  }

  Matching m;
  for (int r = 0; r < nr; ++r) {
    if (col_of_row[r] < 0) continue;
    const double v = scores(r, col_of_row[r]);
    m.pairs.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(col_of_row[r]), v});
    m.total += v;
  }
  return m;
}

}  // namespace trackid
