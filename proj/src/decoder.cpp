#include "graphtag/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graphtag {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Nodes on the first cycle met when scanning tokens in order, or empty.
std::vector<int> find_cycle(std::span<const int> heads) {
  const std::size_t n = heads.size() - 1;
  std::vector<int> state(n + 1, 0);  // 0 unseen, 1 on current path, 2 done
  for (std::size_t start = 1; start <= n; ++start) {
    if (state[start] != 0) continue;
    std::vector<int> path;
    int v = static_cast<int>(start);
    while (v > 0 && state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      v = heads[v];
    }
    if (v > 0 && state[v] == 1) {
      auto it = std::find(path.begin(), path.end(), v);
      std::vector<int> cycle(it, path.end());
      std::sort(cycle.begin(), cycle.end());
      return cycle;
    }
    for (int p : path) state[p] = 2;
  }
  return {};
}

// Tokens whose head chain runs into `cycle` (cycle nodes included).
std::vector<bool> component_of(std::span<const int> heads, const std::vector<int>& cycle) {
  const std::size_t n = heads.size() - 1;
  std::vector<int> mark(n + 1, 0);  // 0 unknown, 1 in, 2 out
  for (int c : cycle) mark[c] = 1;
  for (std::size_t v = 1; v <= n; ++v) {
    std::vector<int> path;
    int u = static_cast<int>(v);
    std::vector<bool> seen(n + 1, false);
    while (u > 0 && mark[u] == 0 && !seen[u]) {
      seen[u] = true;
      path.push_back(u);
      u = heads[u];
    }
    const int verdict = (u > 0 && mark[u] == 1) ? 1 : 2;
    for (int p : path) mark[p] = verdict;
  }
  std::vector<bool> in(n + 1, false);
  for (std::size_t v = 1; v <= n; ++v) in[v] = mark[v] == 1;
  return in;
}

int best_head(const ScoreMatrix& s, std::size_t i, bool allow_root) {
  int best = -1;
  double score = kNegInf;
  for (std::size_t j = allow_root ? 0 : 1; j <= s.n(); ++j) {
    if (j == i) continue;
    if (best < 0 || s.at(i, j) > score) {
      best = static_cast<int>(j);
      score = s.at(i, j);
    }
  }
  return best;
}

}  // namespace

ScoreMatrix::ScoreMatrix(std::size_t n) : n_(n), s_((n + 1) * (n + 1), kNegInf) {}

ScoreMatrix ScoreMatrix::from_scores(const Tensor& scores) {
  return from_log_probs(log_softmax_rows(scores));
}

ScoreMatrix ScoreMatrix::from_log_probs(const Tensor& log_probs) {
  if (log_probs.rank() != 2 || log_probs.shape()[0] != log_probs.shape()[1] ||
      log_probs.shape()[0] < 2) {
    throw ShapeError("score matrix must be (n+1) x (n+1) with n >= 1, got " +
                     shape_string(log_probs.shape()));
  }
  ScoreMatrix s(log_probs.rows() - 1);
  for (std::size_t i = 1; i <= s.n(); ++i) {
    for (std::size_t j = 0; j <= s.n(); ++j) s.at(i, j) = i == j ? kNegInf : log_probs.at(i, j);
  }
  return s;
}

Heads greedy_heads(const ScoreMatrix& s) {
  Heads heads(s.n() + 1, -1);
  for (std::size_t i = 1; i <= s.n(); ++i) heads[i] = best_head(s, i, true);
  return heads;
}

bool is_arborescence(std::span<const int> heads) {
  if (heads.size() < 2) return false;
  const std::size_t n = heads.size() - 1;
  std::size_t roots = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (heads[i] < 0 || static_cast<std::size_t>(heads[i]) > n || heads[i] == static_cast<int>(i)) {
      return false;
    }
    roots += heads[i] == 0;
  }
  if (roots != 1) return false;
  for (std::size_t i = 1; i <= n; ++i) {
    int v = static_cast<int>(i);
    std::size_t steps = 0;
    while (v != 0) {
      v = heads[v];
      if (++steps > n) return false;
    }
  }
  return true;
}

double tree_score(const ScoreMatrix& s, std::span<const int> heads) {
  double total = 0.0;
  for (std::size_t i = 1; i <= s.n(); ++i) total += s.at(i, heads[i]);
  return total;
}

TreeResult enforce_tree(const ScoreMatrix& s, Heads heads) {
  const std::size_t n = s.n();
  if (n == 0) throw Error("enforce_tree: empty sentence");
  if (heads.size() != n + 1) throw Error("enforce_tree: head array does not match scores");
  TreeResult result;

  std::vector<int> roots;
  for (std::size_t i = 1; i <= n; ++i) {
    if (heads[i] == 0) roots.push_back(static_cast<int>(i));
  }
  if (roots.size() > 1) {
    int keep = roots[0];
    for (int r : roots) {
      if (s.at(r, 0) > s.at(keep, 0)) keep = r;
    }
    for (int r : roots) {
      if (r == keep) continue;
      const int h = best_head(s, r, false);
      result.repairs.push_back({Repair::Kind::extra_root, r, 0, h, s.at(r, 0) - s.at(r, h),
                                s.at(r, 0) - s.at(r, h)});
      heads[r] = h;
    }
  }

  for (std::vector<int> cycle = find_cycle(heads); !cycle.empty(); cycle = find_cycle(heads)) {
    const std::vector<bool> inside = component_of(heads, cycle);
    const bool root_free = std::none_of(heads.begin() + 1, heads.end(), [](int h) { return h == 0; });
    int best_c = -1, best_j = -1;
    double best_loss = 0.0;
    for (int c : cycle) {
      for (std::size_t j = 0; j <= n; ++j) {
        if (j == 0 ? !root_free : inside[j]) continue;
        const double loss = s.at(c, heads[c]) - s.at(c, j);
        if (best_c < 0 || loss < best_loss) {
          best_c = c;
          best_j = static_cast<int>(j);
          best_loss = loss;
        }
      }
    }
    result.repairs.push_back(
        {Repair::Kind::cycle, best_c, heads[best_c], best_j, best_loss, best_loss});
    heads[best_c] = best_j;
  }
  result.heads = std::move(heads);
  return result;
}

namespace {

// Maximum spanning arborescence rooted at node 0 over w[dep][head]; -inf
// marks a missing edge. Returns heads (heads[0] = -1).
std::vector<int> chu_liu_edmonds(const std::vector<std::vector<double>>& w) {
  const std::size_t m = w.size();
  std::vector<int> heads(m, -1);
  for (std::size_t d = 1; d < m; ++d) {
    double best = kNegInf;
    for (std::size_t h = 0; h < m; ++h) {
      if (h != d && (heads[d] < 0 || w[d][h] > best)) {
        best = w[d][h];
        heads[d] = static_cast<int>(h);
      }
    }
  }
  const std::vector<int> cycle = find_cycle(heads);
  if (cycle.empty()) return heads;

  std::vector<bool> in_cycle(m, false);
  for (int c : cycle) in_cycle[c] = true;
  // Contracted graph: node 0 stays 0, outside nodes keep their order, the
  // cycle becomes the last node.
  std::vector<int> to_new(m, -1), to_old;
  for (std::size_t v = 0; v < m; ++v) {
    if (!in_cycle[v]) {
      to_new[v] = static_cast<int>(to_old.size());
      to_old.push_back(static_cast<int>(v));
    }
  }
  const int cnode = static_cast<int>(to_old.size());
  const std::size_t mc = to_old.size() + 1;
  std::vector<std::vector<double>> wc(mc, std::vector<double>(mc, kNegInf));
  std::vector<int> enter_at(mc, -1);                 // cycle node entered from outside head
  std::vector<int> leave_from(mc, -1);               // cycle node used as head of outside dep
  for (std::size_t a = 1; a < mc - 1; ++a) {
    const int d = to_old[a];
    for (std::size_t b = 0; b < mc - 1; ++b) {
      if (a != b) wc[a][b] = w[d][to_old[b]];
    }
    for (int c : cycle) {
      if (leave_from[a] < 0 || w[d][c] > wc[a][cnode]) {
        wc[a][cnode] = w[d][c];
        leave_from[a] = c;
      }
    }
  }
  for (std::size_t b = 0; b < mc - 1; ++b) {
    const int h = to_old[b];
    for (int c : cycle) {
      const double gain = w[c][h] - w[c][heads[c]];
      if (enter_at[b] < 0 || gain > wc[cnode][b]) {
        wc[cnode][b] = gain;
        enter_at[b] = c;
      }
    }
  }
  const std::vector<int> sub = chu_liu_edmonds(wc);
  std::vector<int> out = heads;
  for (std::size_t a = 1; a < mc - 1; ++a) {
    const int d = to_old[a];
    out[d] = sub[a] == cnode ? leave_from[a] : to_old[sub[a]];
  }
  const int entry_head = sub[cnode];
  out[enter_at[entry_head]] = to_old[entry_head];
  return out;
}

}  // namespace

Heads max_spanning_tree(const ScoreMatrix& s) {
  const std::size_t n = s.n();
  if (n == 0) throw Error("max_spanning_tree: empty sentence");
  Heads best;
  double best_score = kNegInf;
  for (std::size_t r = 1; r <= n; ++r) {
    if (!std::isfinite(s.at(r, 0))) continue;
    std::vector<std::vector<double>> w(n + 1, std::vector<double>(n + 1, kNegInf));
    for (std::size_t d = 1; d <= n; ++d) {
      for (std::size_t h = 0; h <= n; ++h) {
        if (h == d || (h == 0 && d != r)) continue;
        w[d][h] = s.at(d, h);
      }
    }
    Heads heads = chu_liu_edmonds(w);
    const double score = tree_score(s, heads);
    if (best.empty() || score > best_score) {
      best = std::move(heads);
      best_score = score;
    }
  }
  if (best.empty()) throw Error("max_spanning_tree: no token may attach to ROOT");
  return best;
}

std::vector<int> assign_labels(const Tensor& label_dist) {
  if (label_dist.rank() != 2) throw ShapeError("assign_labels expects an n x r matrix");
  std::vector<int> labels(label_dist.rows() + 1, -1);
  const std::size_t r = label_dist.cols();
  for (std::size_t i = 0; i < label_dist.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < r; ++k) {
      if (label_dist.at(i, k) > label_dist.at(i, best)) best = k;
    }
    labels[i + 1] = static_cast<int>(best);
  }
  return labels;
}

}  // namespace graphtag
