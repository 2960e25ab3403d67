#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "polarlens/error.hpp"
#include "polarlens/io.hpp"
#include "polarlens/record.hpp"

namespace polarlens::graph {

enum class GraphMode { retweet, reply };

// Directed simple graph over user ids: multiplicity collapsed into edge
// weights, self-loops excluded, sorted containers give deterministic
// iteration.
struct DirectedGraph {
  std::set<std::string> nodes;
  std::map<std::pair<std::string, std::string>, uint64_t> edges;  // weight

  void add_node(const std::string& u) { nodes.insert(u); }

  void add_edge(const std::string& src, const std::string& dst) {
    if (src == dst) return;
    nodes.insert(src);
    nodes.insert(dst);
    ++edges[{src, dst}];
  }

  // Distinct-neighbor adjacency on the collapsed undirected view.
  std::map<std::string, std::set<std::string>> undirected_adjacency() const {
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& n : nodes) adj[n];
    for (const auto& [e, w] : edges) {
      adj[e.first].insert(e.second);
      adj[e.second].insert(e.first);
    }
    return adj;
  }
};

// Fills target_author_id for comments whose parent message is in-corpus.
// Parent pointers are fullnames (t1_/t3_) matching our reddit message_ids.
inline void resolve_comment_targets(std::vector<InteractionRecord>& records) {
  std::unordered_map<std::string, const std::string*> author_of;
  author_of.reserve(records.size() * 2);
  for (const auto& r : records) {
    if (r.platform == Platform::reddit) author_of[r.message_id] = &r.author_id;
  }
  for (auto& r : records) {
    if (r.kind == Kind::comment && !r.target_author_id && r.parent_ref) {
      auto it = author_of.find(*r.parent_ref);
      if (it != author_of.end()) r.target_author_id = *it->second;
    }
  }
}

// mode=retweet: author->target over kind=retweet records.
// mode=reply:   author->target over kind in {reply, comment} records.
// Records of the qualifying kind with an absent target contribute their
// author as an isolated node.
inline DirectedGraph build_interaction_graph(
    const std::vector<InteractionRecord>& records, GraphMode mode) {
  DirectedGraph g;
  for (const auto& r : records) {
    bool qualifies = (mode == GraphMode::retweet)
                         ? r.kind == Kind::retweet
                         : (r.kind == Kind::reply || r.kind == Kind::comment);
    if (!qualifies) continue;
    if (r.target_author_id) {
      g.add_edge(r.author_id, *r.target_author_id);
    } else {
      g.add_node(r.author_id);
    }
  }
  return g;
}

// Maximal induced subgraph where every node keeps degree >= k on the
// collapsed undirected view; iterative pruning to fixpoint.
inline std::set<std::string> k_core(const DirectedGraph& g, int k) {
  if (k < 1) throw ContractError("k_core: k must be >= 1");
  auto adj = g.undirected_adjacency();
  std::vector<std::string> queue;
  std::set<std::string> removed;
  for (const auto& [n, nb] : adj) {
    if (static_cast<int>(nb.size()) < k) queue.push_back(n);
  }
  while (!queue.empty()) {
    std::string n = std::move(queue.back());
    queue.pop_back();
    if (removed.count(n)) continue;
    removed.insert(n);
    for (const auto& m : adj[n]) {
      auto& nb = adj[m];
      nb.erase(n);
      if (!removed.count(m) && static_cast<int>(nb.size()) < k)
        queue.push_back(m);
    }
    adj[n].clear();
  }
  std::set<std::string> core;
  for (const auto& n : g.nodes) {
    if (!removed.count(n)) core.insert(n);
  }
  return core;
}

// Set difference per the published definition of the 1-degree class.
inline std::set<std::string> one_degree_users(
    const std::set<std::string>& all_users,
    const std::set<std::string>& core_users) {
  for (const auto& u : core_users) {
    if (!all_users.count(u))
      throw ContractError("one_degree_users: core user '" + u +
                          "' not in population");
  }
  std::set<std::string> out;
  std::set_difference(all_users.begin(), all_users.end(), core_users.begin(),
                      core_users.end(), std::inserter(out, out.begin()));
  return out;
}

// Seeded label propagation on the undirected view: synchronous rounds, seeds
// immutable, ties toward the label with more seed mass then lexicographic.
// Nodes never reached stay unknown.
inline std::map<std::string, Affiliation> cluster_partition(
    const DirectedGraph& core_graph,
    const std::map<std::string, Affiliation>& seeds) {
  if (seeds.empty()) throw ConfigError("cluster_partition: empty seed list");

  auto adj = core_graph.undirected_adjacency();
  std::map<std::string, Affiliation> label;
  std::map<Affiliation, int> seed_mass;
  for (const auto& n : core_graph.nodes) label[n] = Affiliation::unknown;
  for (const auto& [u, a] : seeds) {
    if (a == Affiliation::unknown) continue;
    if (label.count(u)) {
      label[u] = a;
      ++seed_mass[a];
    }
  }

  auto better = [&](Affiliation a, Affiliation b) {
    // true if a beats b for tie-breaking
    int ma = seed_mass.count(a) ? seed_mass.at(a) : 0;
    int mb = seed_mass.count(b) ? seed_mass.at(b) : 0;
    if (ma != mb) return ma > mb;
    return std::string(to_string(a)) < to_string(b);
  };

  const int kMaxRounds = 100;
  for (int round = 0; round < kMaxRounds; ++round) {
    std::map<std::string, Affiliation> next = label;
    bool changed = false;
    for (const auto& [n, nb] : adj) {
      if (seeds.count(n) && seeds.at(n) != Affiliation::unknown) continue;
      int votes_r = 0, votes_d = 0;
      for (const auto& m : nb) {
        Affiliation lm = label.at(m);
        if (lm == Affiliation::republican) ++votes_r;
        if (lm == Affiliation::democratic) ++votes_d;
      }
      Affiliation pick = label.at(n);
      if (votes_r > votes_d) {
        pick = Affiliation::republican;
      } else if (votes_d > votes_r) {
        pick = Affiliation::democratic;
      } else if (votes_r > 0) {  // tie with support on both sides
        pick = better(Affiliation::republican, Affiliation::democratic)
                   ? Affiliation::republican
                   : Affiliation::democratic;
      }
      if (pick != label.at(n)) changed = true;
      next[n] = pick;
    }
    label = std::move(next);
    if (!changed) break;
  }
  return label;
}

struct KappaResult {
  double kappa = 0.0;
  std::string band;       // slight/fair/moderate/substantial/near-perfect
  bool degenerate = false;  // expected agreement is 1 with imperfect observed
  double observed_agreement = 0.0;
};

inline std::string kappa_band(double k) {
  if (k < 0.0) return "poor";
  if (k < 0.2) return "slight";
  if (k < 0.4) return "fair";
  if (k < 0.6) return "moderate";
  if (k < 0.8) return "substantial";
  return "near-perfect";
}

// Cohen's kappa between two coders' label lists.
inline KappaResult verify_sample(const std::vector<std::string>& labels_a,
                                 const std::vector<std::string>& labels_b) {
  if (labels_a.empty() || labels_a.size() != labels_b.size())
    throw ContractError("verify_sample: lists must be equal-length, non-empty");
  const double n = static_cast<double>(labels_a.size());
  std::map<std::string, double> pa, pb;
  double agree = 0.0;
  for (size_t i = 0; i < labels_a.size(); ++i) {
    pa[labels_a[i]] += 1.0;
    pb[labels_b[i]] += 1.0;
    if (labels_a[i] == labels_b[i]) agree += 1.0;
  }
  double po = agree / n;
  double pe = 0.0;
  for (const auto& [lab, ca] : pa) {
    auto it = pb.find(lab);
    if (it != pb.end()) pe += (ca / n) * (it->second / n);
  }
  KappaResult res;
  res.observed_agreement = po;
  if (po == 1.0) {
    res.kappa = 1.0;  // perfect agreement, kappa defined as 1 even if pe=1
  } else if (pe == 1.0) {
    res.degenerate = true;
    res.kappa = 0.0;
    res.band = "degenerate";
    return res;
  } else {
    res.kappa = (po - pe) / (1.0 - pe);
  }
  res.band = kappa_band(res.kappa);
  return res;
}

struct ClassAssignment {
  std::string user_id;
  DegreeClass degree_class;
  Affiliation affiliation;
};

// Every user in the population gets exactly one degree class; affiliation
// comes from the partition map where known.
inline std::vector<ClassAssignment> assign_classes(
    const std::set<std::string>& all_users,
    const std::set<std::string>& core_users,
    const std::map<std::string, Affiliation>& affiliations) {
  std::vector<ClassAssignment> out;
  out.reserve(all_users.size());
  for (const auto& u : all_users) {
    ClassAssignment a;
    a.user_id = u;
    a.degree_class =
        core_users.count(u) ? DegreeClass::two_core : DegreeClass::one_degree;
    auto it = affiliations.find(u);
    a.affiliation = it == affiliations.end() ? Affiliation::unknown : it->second;
    out.push_back(std::move(a));
  }
  return out;
}

// --- CSV interfaces ---

inline std::string edges_to_csv(const DirectedGraph& g) {
  std::string out = "source,target,weight\n";
  for (const auto& [e, w] : g.edges) {
    out += io::csv_row({e.first, e.second, std::to_string(w)}) + "\n";
  }
  return out;
}

inline DirectedGraph edges_from_csv(const std::vector<std::string>& lines) {
  DirectedGraph g;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i == 0 && lines[i].rfind("source,", 0) == 0) continue;
    if (lines[i].empty()) continue;
    auto f = io::csv_split(lines[i]);
    if (f.size() < 2) throw IoError("bad edge row: " + lines[i]);
    uint64_t w = f.size() > 2 ? std::stoull(f[2]) : 1;
    if (f[0] == f[1]) continue;
    g.nodes.insert(f[0]);
    g.nodes.insert(f[1]);
    g.edges[{f[0], f[1]}] += w;
  }
  return g;
}

inline std::map<std::string, Affiliation> seeds_from_csv(
    const std::vector<std::string>& lines) {
  std::map<std::string, Affiliation> seeds;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i == 0 && lines[i].rfind("user_id,", 0) == 0) continue;
    if (lines[i].empty()) continue;
    auto f = io::csv_split(lines[i]);
    if (f.size() < 2) throw IoError("bad seed row: " + lines[i]);
    seeds[f[0]] = affiliation_from_string(f[1]);
  }
  return seeds;
}

inline std::string classes_to_csv(const std::vector<ClassAssignment>& rows) {
  std::string out = "user_id,degree_class,affiliation\n";
  for (const auto& r : rows) {
    out += io::csv_row({r.user_id, to_string(r.degree_class),
                        to_string(r.affiliation)}) +
           "\n";
  }
  return out;
}

}  // namespace polarlens::graph
