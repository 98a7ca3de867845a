#include "safewatch/community.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "safewatch/error.hpp"
#include "safewatch/features.hpp"
#include "safewatch/rng.hpp"

namespace safewatch {

namespace {

// Undirected weighted graph for one Louvain level. Each undirected edge
// appears in both endpoint lists; `loop[i]` holds the weight of edges folded
// into node i (counted once), contributing 2*loop[i] to its degree.
struct LevelGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;
  std::vector<double> loop;
  double total_weight = 0.0;  // m

  std::size_t size() const { return adj.size(); }

  double degree(std::size_t i) const {
    double k = 2.0 * loop[i];
    for (const auto& [_, w] : adj[i]) k += w;
    return k;
  }
};

LevelGraph from_labeled(const LabeledGraph& g) {
  LevelGraph lg;
  const std::size_t n = g.node_count();
  std::vector<std::map<std::size_t, double>> acc(n);
  for (const auto& e : g.edges()) {
    acc[e.src][e.dst] += 1.0;
    acc[e.dst][e.src] += 1.0;
  }
  lg.adj.resize(n);
  lg.loop.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) lg.adj[i].assign(acc[i].begin(), acc[i].end());
  lg.total_weight = static_cast<double>(g.edge_count());
  return lg;
}

double level_modularity(const LevelGraph& lg, const std::vector<std::size_t>& comm) {
  if (lg.total_weight == 0.0) return 0.0;
  const double m = lg.total_weight;
  std::vector<double> in(lg.size(), 0.0);
  std::vector<double> tot(lg.size(), 0.0);
  for (std::size_t i = 0; i < lg.size(); ++i) {
    tot[comm[i]] += lg.degree(i);
    in[comm[i]] += lg.loop[i];
    for (const auto& [j, w] : lg.adj[i]) {
      if (comm[j] == comm[i] && i < j) in[comm[i]] += w;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < lg.size(); ++c) q += in[c] / m - (tot[c] / (2.0 * m)) * (tot[c] / (2.0 * m));
  return q;
}

// Local moving phase. Returns true if any node changed community.
bool move_nodes(const LevelGraph& lg, std::vector<std::size_t>& comm, Rng& rng, double tolerance) {
  const std::size_t n = lg.size();
  const double m = lg.total_weight;
  std::vector<double> k(n);
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = lg.degree(i);
    tot[comm[i]] += k[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<double> link(n, -1.0);
  std::vector<std::size_t> touched;
  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::size_t i : order) {
      const std::size_t own = comm[i];
      touched.clear();
      link[own] = 0.0;
      touched.push_back(own);
      for (const auto& [j, w] : lg.adj[i]) {
        const std::size_t c = comm[j];
        if (link[c] < 0.0) {
          link[c] = 0.0;
          touched.push_back(c);
        }
        link[c] += w;
      }
      tot[own] -= k[i];
      // Gain of inserting i into c, in modularity units.
      auto gain = [&](std::size_t c) { return (link[c] - tot[c] * k[i] / (2.0 * m)) / m; };
      const double own_gain = gain(own);
      double best_gain = own_gain;
      for (auto c : touched) best_gain = std::max(best_gain, gain(c));
      std::size_t target = own;
      if (best_gain > own_gain + tolerance) {
        target = SIZE_MAX;
        for (auto c : touched) {
          const double gc = gain(c);
          if (c != own && gc > own_gain + tolerance && gc >= best_gain - tolerance) target = std::min(target, c);
        }
      }
      tot[target] += k[i];
      if (target != own) {
        comm[i] = target;
        moved = true;
        any_move = true;
      }
      for (auto c : touched) link[c] = -1.0;
    }
  }
  return any_move;
}

// Kernighan-Lin style pass on a fixed graph: repeatedly applies the best
// single-node move among nodes not yet moved (a move may lower Q, including
// a move into an empty community), then keeps the best prefix of the
// sequence. Escapes local optima where the better partition is several moves
// away. Returns true if Q improved by more than `tolerance`.
bool kl_pass(const LevelGraph& lg, std::vector<std::size_t>& comm, std::size_t depth, double tolerance) {
  const std::size_t n = lg.size();
  const double m = lg.total_weight;
  std::vector<double> k(n);
  std::vector<double> tot(n, 0.0);
  std::vector<std::size_t> size(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = lg.degree(i);
    tot[comm[i]] += k[i];
    ++size[comm[i]];
  }
  std::vector<bool> moved(n, false);
  std::vector<std::pair<std::size_t, std::size_t>> log;  // (node, previous community)
  std::vector<double> link(n, -1.0);
  std::vector<std::size_t> touched;
  double delta_sum = 0.0;
  double best_sum = 0.0;
  std::size_t best_len = 0;

  for (std::size_t step = 0; step < std::min(depth, n); ++step) {
    std::size_t empty = SIZE_MAX;
    for (std::size_t c = 0; c < n && empty == SIZE_MAX; ++c) {
      if (size[c] == 0) empty = c;
    }
    bool found = false;
    double best = 0.0;
    std::size_t best_node = 0;
    std::size_t best_comm = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (moved[i]) continue;
      const std::size_t own = comm[i];
      touched.clear();
      link[own] = 0.0;
      touched.push_back(own);
      for (const auto& [j, w] : lg.adj[i]) {
        const std::size_t c = comm[j];
        if (link[c] < 0.0) {
          link[c] = 0.0;
          touched.push_back(c);
        }
        link[c] += w;
      }
      const double stay = link[own] - (tot[own] - k[i]) * k[i] / (2.0 * m);
      auto consider = [&](std::size_t c, double gain) {
        const double d = (gain - stay) / m;
        if (!found || d > best + 1e-15 || (d >= best - 1e-15 && (i < best_node || (i == best_node && c < best_comm)))) {
          found = true;
          best = d;
          best_node = i;
          best_comm = c;
        }
      };
      std::sort(touched.begin(), touched.end());
      for (auto c : touched) {
        if (c != own) consider(c, link[c] - tot[c] * k[i] / (2.0 * m));
      }
      if (size[own] > 1 && empty != SIZE_MAX) consider(empty, 0.0);
      for (auto c : touched) link[c] = -1.0;
    }
    if (!found) break;
    const std::size_t from = comm[best_node];
    tot[from] -= k[best_node];
    --size[from];
    tot[best_comm] += k[best_node];
    ++size[best_comm];
    comm[best_node] = best_comm;
    moved[best_node] = true;
    log.emplace_back(best_node, from);
    delta_sum += best;
    if (delta_sum > best_sum + tolerance) {
      best_sum = delta_sum;
      best_len = log.size();
    }
  }
  for (std::size_t t = log.size(); t > best_len; --t) comm[log[t - 1].first] = log[t - 1].second;
  return best_len > 0;
}

LevelGraph aggregate(const LevelGraph& lg, const std::vector<std::size_t>& comm, std::size_t n_comm) {
  LevelGraph out;
  out.adj.resize(n_comm);
  out.loop.assign(n_comm, 0.0);
  out.total_weight = lg.total_weight;
  std::vector<std::map<std::size_t, double>> acc(n_comm);
  for (std::size_t i = 0; i < lg.size(); ++i) {
    out.loop[comm[i]] += lg.loop[i];
    for (const auto& [j, w] : lg.adj[i]) {
      if (comm[i] == comm[j]) {
        if (i < j) out.loop[comm[i]] += w;
      } else {
        acc[comm[i]][comm[j]] += w;
      }
    }
  }
  for (std::size_t c = 0; c < n_comm; ++c) out.adj[c].assign(acc[c].begin(), acc[c].end());
  return out;
}

}  // namespace

double modularity(const LabeledGraph& g, std::span<const std::size_t> assignment) {
  if (assignment.size() != g.node_count()) {
    throw Error(ErrorKind::Coverage, "community",
                "assignment covers " + std::to_string(assignment.size()) + " of " +
                    std::to_string(g.node_count()) + " nodes");
  }
  if (g.edge_count() == 0) return 0.0;
  const double m = static_cast<double>(g.edge_count());
  std::unordered_map<std::size_t, double> intra;
  std::unordered_map<std::size_t, double> degree;
  for (const auto& e : g.edges()) {
    const auto cs = assignment[e.src];
    const auto cd = assignment[e.dst];
    if (cs == cd) intra[cs] += 1.0;
    degree[cs] += 1.0;
    degree[cd] += 1.0;
  }
  std::vector<std::size_t> ids;
  ids.reserve(degree.size());
  for (const auto& [c, _] : degree) ids.push_back(c);
  std::sort(ids.begin(), ids.end());
  double q = 0.0;
  for (auto c : ids) {
    const double e_c = intra.count(c) ? intra[c] : 0.0;
    const double d_c = degree[c] / (2.0 * m);
    q += e_c / m - d_c * d_c;
  }
  return q;
}

std::vector<std::size_t> normalize_assignment(std::span<const std::size_t> labels) {
  std::unordered_map<std::size_t, std::size_t> remap;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, _] = remap.emplace(labels[i], remap.size());
    out[i] = it->second;
  }
  return out;
}

Partition louvain(const LabeledGraph& g, std::uint64_t seed, const LouvainOptions& options) {
  if (g.node_count() == 0) throw Error(ErrorKind::Parameter, "community", "louvain needs a nonempty graph");
  Partition p;
  p.assignment.resize(g.node_count());
  std::iota(p.assignment.begin(), p.assignment.end(), std::size_t{0});

  const LevelGraph base = from_labeled(g);
  if (base.total_weight > 0.0) {
    Rng rng(seed);
    double last_q = level_modularity(base, p.assignment);
    auto record = [&](double q) {
      if (q < last_q - 1e-12) {
        throw Error(ErrorKind::Internal, "community",
                    "modularity decreased across a Louvain level (" + format_double(last_q) + " -> " +
                        format_double(q) + ")");
      }
      p.level_modularity.push_back(q);
      last_q = q;
    };
    auto count = [](const std::vector<std::size_t>& c) {
      return c.empty() ? std::size_t{0} : *std::max_element(c.begin(), c.end()) + 1;
    };

    std::size_t levels = 0;
    while (levels < options.max_levels) {
      // Coarse phase: move and aggregate, starting from the current partition.
      LevelGraph lg = aggregate(base, p.assignment, count(p.assignment));
      for (; levels < options.max_levels; ++levels) {
        std::vector<std::size_t> comm(lg.size());
        std::iota(comm.begin(), comm.end(), std::size_t{0});
        if (!move_nodes(lg, comm, rng, options.tolerance)) break;
        comm = normalize_assignment(comm);
        record(level_modularity(lg, comm));
        for (auto& a : p.assignment) a = comm[a];
        lg = aggregate(lg, comm, count(comm));
      }
      // Refinement on the original graph: single-node moves, then a bounded
      // Kernighan-Lin pass. Aggregated levels cannot split a community.
      std::vector<std::size_t> comm = p.assignment;
      if (!move_nodes(base, comm, rng, options.tolerance) &&
          !(options.kl_depth > 0 && kl_pass(base, comm, options.kl_depth, options.tolerance)))
        break;
      p.assignment = normalize_assignment(comm);
      record(level_modularity(base, p.assignment));
      ++levels;
    }
  }
  p.assignment = normalize_assignment(p.assignment);
  p.communities = p.assignment.empty() ? 0 : *std::max_element(p.assignment.begin(), p.assignment.end()) + 1;
  p.modularity = modularity(g, p.assignment);
  return p;
}

std::vector<CommunityCensus> community_composition(const LabeledGraph& g, const Partition& p) {
  if (p.assignment.size() != g.node_count())
    throw Error(ErrorKind::Coverage, "community", "partition does not cover the graph");
  std::size_t n_comm = 0;
  for (auto c : p.assignment) n_comm = std::max(n_comm, c + 1);
  std::vector<CommunityCensus> census(n_comm);
  for (std::size_t c = 0; c < n_comm; ++c) census[c].id = c;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    auto& c = census[p.assignment[i]];
    ++c.size;
    (g.nodes()[i].safety == Safety::Unsafe ? c.n_unsafe : c.n_safe)++;
  }
  return census;
}

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::Parameter, "community", "labelings differ in length");
  const auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> ra;
  std::map<std::size_t, double> rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [_, n] : joint) index += choose2(n);
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (const auto& [_, n] : ra) sum_a += choose2(n);
  for (const auto& [_, n] : rb) sum_b += choose2(n);
  const double total = choose2(static_cast<double>(a.size()));
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return index == max_index ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

void write_partition(std::ostream& out, const LabeledGraph& g, const Partition& p) {
  out << "# modularity=" << format_double(p.modularity) << " communities=" << p.communities << '\n';
  out << "node_id\tcommunity_id\n";
  for (std::size_t i = 0; i < g.node_count(); ++i) out << g.nodes()[i].id << '\t' << p.assignment[i] << '\n';
}

void write_composition(std::ostream& out, std::span<const CommunityCensus> census) {
  out << "community_id\tn_safe\tn_unsafe\tsize\tmixed\n";
  for (const auto& c : census) {
    out << c.id << '\t' << c.n_safe << '\t' << c.n_unsafe << '\t' << c.size << '\t' << (c.mixed() ? "yes" : "no")
        << '\n';
  }
}

}  // namespace safewatch
