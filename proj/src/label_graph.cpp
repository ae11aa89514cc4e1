#include "xmcaug/label_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "xmcaug/errors.hpp"

namespace xmcaug::graph {

namespace {

void require_frequency(const CooccurrenceGraph& g, LabelIndex l) {
  if (g.frequency(l) == 0)
    fail("ZeroFrequencyLabel",
         "label " + std::to_string(l) + " has no training occurrences");
}

}  // namespace

CooccurrenceGraph CooccurrenceGraph::build(const SparseLabelMatrix& y) {
  if (!y.is_hard())
    fail("SoftWeightsPresent",
         "co-occurrence requires a hard ground-truth matrix");

  CooccurrenceGraph g;
  g.freq_.assign(y.n_labels, 0);
  g.adj_.assign(y.n_labels, {});

  std::unordered_map<std::uint64_t, std::uint64_t> pair_counts;
  for (const auto& row : y.rows) {
    for (std::size_t a = 0; a < row.size(); ++a) {
      ++g.freq_[row[a].first];
      for (std::size_t b = a + 1; b < row.size(); ++b) {
        std::uint64_t key =
            (static_cast<std::uint64_t>(row[a].first) << 32) | row[b].first;
        ++pair_counts[key];
      }
    }
  }

  for (const auto& [key, c] : pair_counts) {
    auto i = static_cast<LabelIndex>(key >> 32);
    auto j = static_cast<LabelIndex>(key & 0xFFFFFFFFu);
    g.adj_[i].emplace_back(j, c);
    g.adj_[j].emplace_back(i, c);
  }
  for (auto& nbrs : g.adj_) std::sort(nbrs.begin(), nbrs.end());
  return g;
}

std::uint64_t CooccurrenceGraph::count(LabelIndex i, LabelIndex j) const {
  if (i == j) return freq_[i];
  const auto& nbrs = adj_[i];
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), j,
                             [](const Neighbor& n, LabelIndex l) {
                               return n.first < l;
                             });
  return (it != nbrs.end() && it->first == j) ? it->second : 0;
}

double CooccurrenceGraph::conditional(LabelIndex i, LabelIndex j) const {
  require_frequency(*this, j);
  if (i == j) return 1.0;
  return static_cast<double>(count(i, j)) / static_cast<double>(freq_[j]);
}

double CooccurrenceGraph::symmetrized_similarity(LabelIndex i,
                                                 LabelIndex j) const {
  require_frequency(*this, i);
  require_frequency(*this, j);
  if (i == j) return 1.0;
  double c = static_cast<double>(count(i, j));
  return 0.5 * (c / static_cast<double>(freq_[j]) +
                c / static_cast<double>(freq_[i]));
}

std::vector<std::pair<LabelIndex, double>> CooccurrenceGraph::top_neighbors(
    LabelIndex j, std::size_t k) const {
  require_frequency(*this, j);
  std::vector<std::pair<LabelIndex, double>> out;
  out.reserve(adj_[j].size() + 1);
  out.emplace_back(j, 1.0);
  for (const auto& [i, c] : adj_[j])
    out.emplace_back(i, static_cast<double>(c) / static_cast<double>(freq_[j]));
  // Self entry stays first: it ranks at conditional 1 with the lowest
  // possible tie-break by construction of the sort below.
  std::stable_sort(out.begin() + 1, out.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  if (out.size() > k) out.resize(k);
  return out;
}

std::size_t CooccurrenceGraph::nnz_offdiag() const {
  std::size_t total = 0;
  for (const auto& nbrs : adj_) total += nbrs.size();
  return total;
}

void CooccurrenceGraph::dump(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoError", "cannot open " + path.string() + " for writing");
  for (LabelIndex i = 0; i < n_labels(); ++i) {
    if (freq_[i] > 0) out << i << ' ' << i << ' ' << freq_[i] << '\n';
    for (const auto& [j, c] : adj_[i])
      if (j > i) out << i << ' ' << j << ' ' << c << '\n';
  }
}

WalkGraph WalkGraph::build(const CooccurrenceGraph& g,
                           const WalkParams& params) {
  if (!(params.restart_prob > 0.0 && params.restart_prob <= 1.0))
    fail("InvalidWalkParams", "restart_prob must be in (0, 1]");
  if (params.walk_length < 1) fail("InvalidWalkParams", "walk_length >= 1");
  if (params.top_k_per_node < 1) fail("InvalidWalkParams", "top_k >= 1");

  const std::size_t L = g.n_labels();
  WalkGraph w;
  w.params_ = params;
  w.rows_.assign(L, {});

  // Row-normalized off-diagonal transition probabilities.
  std::vector<double> out_degree(L, 0.0);
  for (LabelIndex i = 0; i < L; ++i)
    for (const auto& [j, c] : g.neighbors(i))
      out_degree[i] += static_cast<double>(c);

  const double alpha = params.restart_prob;
  std::vector<double> v(L, 0.0), next(L, 0.0);
  std::vector<LabelIndex> active, next_active;
  std::vector<bool> in_next(L, false);

  for (LabelIndex src = 0; src < L; ++src) {
    if (g.frequency(src) == 0) continue;

    active.clear();
    v[src] = 1.0;
    active.push_back(src);

    for (std::uint32_t step = 0; step < params.walk_length; ++step) {
      next_active.clear();
      for (LabelIndex i : active) {
        if (out_degree[i] <= 0.0) continue;
        double mass = (1.0 - alpha) * v[i] / out_degree[i];
        if (mass == 0.0) continue;
        for (const auto& [j, c] : g.neighbors(i)) {
          if (!in_next[j]) {
            in_next[j] = true;
            next_active.push_back(j);
          }
          next[j] += mass * static_cast<double>(c);
        }
      }
      if (!in_next[src]) {
        in_next[src] = true;
        next_active.push_back(src);
      }
      next[src] += alpha;
      for (LabelIndex i : active) v[i] = 0.0;
      std::swap(v, next);
      std::swap(active, next_active);
      for (LabelIndex i : active) in_next[i] = false;
    }

    auto& row = w.rows_[src];
    for (LabelIndex i : active)
      if (v[i] > 0.0) row.emplace_back(i, v[i]);
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (row.size() > params.top_k_per_node) row.resize(params.top_k_per_node);
    double max_score = row.empty() ? 1.0 : row.front().second;
    for (auto& [i, s] : row) s /= max_score;
    std::sort(row.begin(), row.end());

    for (LabelIndex i : active) v[i] = 0.0;
  }
  return w;
}

}  // namespace xmcaug::graph
