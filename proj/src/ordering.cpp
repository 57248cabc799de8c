#include "sparsebench/ordering.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace sparsebench {

namespace {

void require_square(const CsrMatrix& a, const char* what) {
  if (!a.square())
    throw DimensionError(std::string(what) + " needs a square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

struct LevelInfo {
  index_t eccentricity = 0;
  index_t last_level_begin = 0;  // offset into `order` of the deepest level
};

// BFS from root. Fills `order` with the visit sequence and `level` with
// distances; `level` must be all -1 on entry.
LevelInfo bfs_levels(const AdjacencyView& g, index_t root, std::vector<index_t>& level,
                     std::vector<index_t>& order) {
  order.clear();
  order.push_back(root);
  level[root] = 0;
  LevelInfo info;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const index_t u = order[head];
    if (level[u] > info.eccentricity) {
      info.eccentricity = level[u];
      info.last_level_begin = static_cast<index_t>(head);
    }
    for (index_t w : g.neighbors(u))
      if (level[w] < 0) {
        level[w] = level[u] + 1;
        order.push_back(w);
      }
  }
  return info;
}

void reset_levels(std::vector<index_t>& level, const std::vector<index_t>& order) {
  for (index_t v : order) level[v] = -1;
}

index_t min_degree_vertex(const AdjacencyView& g, std::span<const index_t> candidates) {
  index_t best = candidates.front();
  for (index_t v : candidates)
    if (g.degree(v) < g.degree(best) || (g.degree(v) == g.degree(best) && v < best)) best = v;
  return best;
}

// George-Liu: repeat BFS from a min-degree vertex of the deepest level while
// the eccentricity keeps growing.
index_t pseudo_peripheral(const AdjacencyView& g, index_t start, std::vector<index_t>& level,
                          std::vector<index_t>& order) {
  index_t root = start;
  LevelInfo info = bfs_levels(g, root, level, order);
  for (;;) {
    std::span<const index_t> deepest(order.data() + info.last_level_begin,
                                     order.size() - static_cast<std::size_t>(info.last_level_begin));
    const index_t candidate = min_degree_vertex(g, deepest);
    reset_levels(level, order);
    LevelInfo next = bfs_levels(g, candidate, level, order);
    if (next.eccentricity <= info.eccentricity) {
      reset_levels(level, order);
      return root;
    }
    root = candidate;
    info = next;
  }
}

}  // namespace

AdjacencyView::AdjacencyView(const CsrMatrix& a) {
  require_square(a, "AdjacencyView");
  const index_t n = a.rows();
  std::vector<index_t> deg(static_cast<std::size_t>(n), 0);
  for (index_t i = 0; i < n; ++i)
    for (index_t j : a.row_cids(i))
      if (i != j) {
        ++deg[i];
        ++deg[j];
      }
  ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (index_t i = 0; i < n; ++i) ptr_[i + 1] = ptr_[i] + deg[i];
  adj_.resize(static_cast<std::size_t>(ptr_[n]));
  std::vector<index_t> fill(ptr_.begin(), ptr_.end() - 1);
  for (index_t i = 0; i < n; ++i)
    for (index_t j : a.row_cids(i))
      if (i != j) {
        adj_[fill[i]++] = j;
        adj_[fill[j]++] = i;
      }
  // Sort and deduplicate (entries present in both triangles appear twice).
  index_t out = 0;
  index_t begin = 0;
  for (index_t v = 0; v < n; ++v) {
    const index_t end = ptr_[v + 1];
    std::sort(adj_.begin() + begin, adj_.begin() + end);
    const index_t start = out;
    for (index_t p = begin; p < end; ++p)
      if (out == start || adj_[out - 1] != adj_[p]) adj_[out++] = adj_[p];
    begin = end;
    ptr_[v + 1] = out;
  }
  adj_.resize(static_cast<std::size_t>(out));
}

index_t matrix_bandwidth(const CsrMatrix& a) {
  require_square(a, "matrix_bandwidth");
  index_t bw = 0;
  for (index_t i = 0; i < a.rows(); ++i)
    for (index_t j : a.row_cids(i)) bw = std::max(bw, static_cast<index_t>(std::abs(i - j)));
  return bw;
}

Permutation rcm_order(const CsrMatrix& a) {
  require_square(a, "rcm_order");
  const AdjacencyView g(a);
  const index_t n = g.size();

  std::vector<index_t> level(static_cast<std::size_t>(n), -1);
  std::vector<index_t> scratch;
  std::vector<char> placed(static_cast<std::size_t>(n), 0);
  std::vector<index_t> cm;  // Cuthill-McKee sequence of old indices
  cm.reserve(static_cast<std::size_t>(n));
  std::vector<index_t> fresh;

  for (index_t seed = 0; seed < n; ++seed) {
    if (placed[seed] || g.degree(seed) == 0) continue;
    // Collect the component to pick a min-degree starting point.
    bfs_levels(g, seed, level, scratch);
    const index_t start = min_degree_vertex(g, scratch);
    reset_levels(level, scratch);
    const index_t root = pseudo_peripheral(g, start, level, scratch);

    const std::size_t head0 = cm.size();
    cm.push_back(root);
    placed[root] = 1;
    for (std::size_t head = head0; head < cm.size(); ++head) {
      fresh.clear();
      for (index_t w : g.neighbors(cm[head]))
        if (!placed[w]) {
          placed[w] = 1;
          fresh.push_back(w);
        }
      std::sort(fresh.begin(), fresh.end(), [&](index_t x, index_t y) {
        return g.degree(x) != g.degree(y) ? g.degree(x) < g.degree(y) : x < y;
      });
      cm.insert(cm.end(), fresh.begin(), fresh.end());
    }
  }

  std::vector<index_t> perm(static_cast<std::size_t>(n));
  const auto connected = static_cast<index_t>(cm.size());
  for (index_t k = 0; k < connected; ++k) perm[cm[k]] = connected - 1 - k;
  index_t next = connected;
  for (index_t v = 0; v < n; ++v)
    if (g.degree(v) == 0) perm[v] = next++;
  return Permutation(std::move(perm));
}

}  // namespace sparsebench
