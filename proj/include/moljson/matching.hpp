#pragma once

#include <queue>
#include <vector>

namespace moljson::detail {

/// Maximum cardinality matching on a general graph (Edmonds' blossom
/// algorithm). Vertices are visited in index order, so results are
/// deterministic for a given adjacency.
class BlossomMatcher {
 public:
  explicit BlossomMatcher(std::vector<std::vector<int>> adjacency)
      : adj_(std::move(adjacency)),
        n_(static_cast<int>(adj_.size())),
        match_(static_cast<std::size_t>(n_), -1),
        parent_(static_cast<std::size_t>(n_)),
        base_(static_cast<std::size_t>(n_)),
        used_(static_cast<std::size_t>(n_)),
        blossom_(static_cast<std::size_t>(n_)) {}

  /// Returns mate per vertex (-1 if unmatched).
  const std::vector<int> &solve() {
    // Greedy seed keeps the augmenting phase short.
    for (int v = 0; v < n_; ++v) {
      if (match_[idx(v)] != -1) continue;
      for (int u : adj_[idx(v)]) {
        if (match_[idx(u)] == -1) {
          match_[idx(u)] = v;
          match_[idx(v)] = u;
          break;
        }
      }
    }
    for (int v = 0; v < n_; ++v) {
      if (match_[idx(v)] != -1) continue;
      int end = find_path(v);
      while (end != -1) {
        int pv = parent_[idx(end)];
        int ppv = match_[idx(pv)];
        match_[idx(end)] = pv;
        match_[idx(pv)] = end;
        end = ppv;
      }
    }
    return match_;
  }

 private:
  static std::size_t idx(int v) { return static_cast<std::size_t>(v); }

  int lca(int a, int b) {
    std::vector<bool> seen(idx(n_), false);
    for (;;) {
      a = base_[idx(a)];
      seen[idx(a)] = true;
      if (match_[idx(a)] == -1) break;
      a = parent_[idx(match_[idx(a)])];
    }
    for (;;) {
      b = base_[idx(b)];
      if (seen[idx(b)]) return b;
      b = parent_[idx(match_[idx(b)])];
    }
  }

  void mark_path(int v, int b, int child) {
    while (base_[idx(v)] != b) {
      blossom_[idx(base_[idx(v)])] = true;
      blossom_[idx(base_[idx(match_[idx(v)])])] = true;
      parent_[idx(v)] = child;
      child = match_[idx(v)];
      v = parent_[idx(match_[idx(v)])];
    }
  }

  int find_path(int root) {
    std::fill(used_.begin(), used_.end(), false);
    std::fill(parent_.begin(), parent_.end(), -1);
    for (int i = 0; i < n_; ++i) base_[idx(i)] = i;
    used_[idx(root)] = true;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int to : adj_[idx(v)]) {
        if (base_[idx(v)] == base_[idx(to)] || match_[idx(v)] == to) continue;
        if (to == root || (match_[idx(to)] != -1 && parent_[idx(match_[idx(to)])] != -1)) {
          int cur = lca(v, to);
          std::fill(blossom_.begin(), blossom_.end(), false);
          mark_path(v, cur, to);
          mark_path(to, cur, v);
          for (int i = 0; i < n_; ++i) {
            if (blossom_[idx(base_[idx(i)])]) {
              base_[idx(i)] = cur;
              if (!used_[idx(i)]) {
                used_[idx(i)] = true;
                q.push(i);
              }
            }
          }
        } else if (parent_[idx(to)] == -1) {
          parent_[idx(to)] = v;
          if (match_[idx(to)] == -1) return to;
          used_[idx(match_[idx(to)])] = true;
          q.push(match_[idx(to)]);
        }
      }
    }
    return -1;
  }

  std::vector<std::vector<int>> adj_;
  int n_;
  std::vector<int> match_, parent_, base_;
  std::vector<bool> used_, blossom_;
};

}  // namespace moljson::detail
