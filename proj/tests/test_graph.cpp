#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "polarlens/graph.hpp"

using namespace polarlens;
using graph::DirectedGraph;
using graph::GraphMode;

namespace {

InteractionRecord make_edge_record(const std::string& from,
                                   const std::string& to, Kind kind,
                                   const std::string& id) {
  InteractionRecord r;
  r.message_id = id;
  r.author_id = from;
  r.kind = kind;
  r.created_at = 100;
  r.text = "fake news";
  if (!to.empty()) r.target_author_id = to;
  return r;
}

// Naive repeated deletion: remove any node with undirected degree < k until
// nothing changes.
std::set<std::string> k_core_oracle(const DirectedGraph& g, int k) {
  auto adj = g.undirected_adjacency();
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = adj.begin(); it != adj.end();) {
      if (static_cast<int>(it->second.size()) < k) {
        for (const auto& m : it->second) adj[m].erase(it->first);
        it = adj.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  std::set<std::string> out;
  for (const auto& [n, _] : adj) out.insert(n);
  return out;
}

DirectedGraph random_graph(std::mt19937_64& rng, int n, double p) {
  DirectedGraph g;
  for (int i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && u(rng) < p)
        g.add_edge("n" + std::to_string(i), "n" + std::to_string(j));
    }
  }
  return g;
}

}  // namespace

TEST_CASE("repeated retweets collapse to one edge", "[graph]") {
  std::vector<InteractionRecord> recs = {
      make_edge_record("u1", "u2", Kind::retweet, "1"),
      make_edge_record("u1", "u2", Kind::retweet, "2"),
  };
  auto g = graph::build_interaction_graph(recs, GraphMode::retweet);
  CHECK(g.nodes == std::set<std::string>{"u1", "u2"});
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges.begin()->first == std::make_pair(std::string("u1"),
                                                 std::string("u2")));
  CHECK(g.edges.begin()->second == 2);
}

TEST_CASE("reply chain produces one edge per hop", "[graph]") {
  std::vector<InteractionRecord> recs = {
      make_edge_record("u1", "u2", Kind::reply, "1"),
      make_edge_record("u2", "u3", Kind::reply, "2"),
  };
  auto g = graph::build_interaction_graph(recs, GraphMode::reply);
  CHECK(g.nodes.size() == 3);
  CHECK(g.edges.size() == 2);
  CHECK(g.edges.count({"u1", "u2"}) == 1);
  CHECK(g.edges.count({"u2", "u3"}) == 1);
}

TEST_CASE("absent target leaves an isolated author node", "[graph]") {
  std::vector<InteractionRecord> recs = {
      make_edge_record("u1", "", Kind::comment, "1"),
  };
  auto g = graph::build_interaction_graph(recs, GraphMode::reply);
  CHECK(g.nodes == std::set<std::string>{"u1"});
  CHECK(g.edges.empty());
}

TEST_CASE("self-interactions never create self-loops", "[graph]") {
  std::vector<InteractionRecord> recs = {
      make_edge_record("u1", "u1", Kind::retweet, "1"),
  };
  auto g = graph::build_interaction_graph(recs, GraphMode::retweet);
  CHECK(g.edges.empty());
}

TEST_CASE("comment parents resolve to in-corpus authors", "[graph]") {
  std::vector<InteractionRecord> recs(3);
  recs[0].platform = Platform::reddit;
  recs[0].message_id = "t3_s1";
  recs[0].author_id = "op";
  recs[0].kind = Kind::submission;
  recs[1].platform = Platform::reddit;
  recs[1].message_id = "t1_c1";
  recs[1].author_id = "alice";
  recs[1].kind = Kind::comment;
  recs[1].parent_ref = "t3_s1";
  recs[2].platform = Platform::reddit;
  recs[2].message_id = "t1_c2";
  recs[2].author_id = "bob";
  recs[2].kind = Kind::comment;
  recs[2].parent_ref = "t1_missing";
  graph::resolve_comment_targets(recs);
  REQUIRE(recs[1].target_author_id.has_value());
  CHECK(*recs[1].target_author_id == "op");
  CHECK_FALSE(recs[2].target_author_id.has_value());
}

TEST_CASE("triangle survives the 2-core", "[graph]") {
  DirectedGraph g;
  g.add_edge("a", "b");
  g.add_edge("b", "c");
  g.add_edge("c", "a");
  CHECK(graph::k_core(g, 2) == std::set<std::string>{"a", "b", "c"});
}

TEST_CASE("star collapses to nothing at k=2", "[graph]") {
  DirectedGraph g;
  for (int i = 0; i < 5; ++i) g.add_edge("leaf" + std::to_string(i), "c");
  CHECK(graph::k_core(g, 2).empty());
  CHECK(graph::k_core(g, 1) == g.nodes);
  CHECK_THROWS_AS(graph::k_core(g, 0), ContractError);
}

TEST_CASE("reciprocal edges count once for coreness", "[graph]") {
  DirectedGraph g;
  g.add_edge("a", "b");
  g.add_edge("b", "a");
  CHECK(graph::k_core(g, 2).empty());  // one distinct neighbor each
}

TEST_CASE("k_core matches the deletion oracle on random graphs", "[graph]") {
  std::mt19937_64 rng(7021);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + static_cast<int>(rng() % 199);
    double p = 2.5 / n;
    auto g = random_graph(rng, n, p);
    for (int k = 1; k <= 3; ++k) {
      CHECK(graph::k_core(g, k) == k_core_oracle(g, k));
    }
    // monotonicity in k
    auto c1 = graph::k_core(g, 1);
    auto c2 = graph::k_core(g, 2);
    auto c3 = graph::k_core(g, 3);
    CHECK(std::includes(c1.begin(), c1.end(), c2.begin(), c2.end()));
    CHECK(std::includes(c2.begin(), c2.end(), c3.begin(), c3.end()));
  }
}

TEST_CASE("one-degree users are the set difference", "[graph]") {
  std::set<std::string> all = {"a", "b", "c", "d"};
  std::set<std::string> core = {"b", "d"};
  CHECK(graph::one_degree_users(all, core) ==
        std::set<std::string>{"a", "c"});
  CHECK(graph::one_degree_users(all, all).empty());
  CHECK(graph::one_degree_users(all, {}) == all);
  CHECK_THROWS_AS(graph::one_degree_users(core, all), ContractError);
}

TEST_CASE("degree classes partition the population", "[graph]") {
  std::set<std::string> all = {"a", "b", "c", "d", "e"};
  std::set<std::string> core = {"a", "e"};
  auto one = graph::one_degree_users(all, core);
  CHECK(one.size() + core.size() == all.size());
  for (const auto& u : core) CHECK(one.count(u) == 0);
}

TEST_CASE("disjoint cliques take their own seed labels", "[graph]") {
  DirectedGraph g;
  g.add_edge("a1", "a2");
  g.add_edge("a2", "a3");
  g.add_edge("a3", "a1");
  g.add_edge("b1", "b2");
  g.add_edge("b2", "b3");
  g.add_edge("b3", "b1");
  g.add_node("lone");
  std::map<std::string, Affiliation> seeds = {
      {"a1", Affiliation::democratic},
      {"b1", Affiliation::republican},
  };
  auto labels = graph::cluster_partition(g, seeds);
  CHECK(labels.at("a1") == Affiliation::democratic);
  CHECK(labels.at("a2") == Affiliation::democratic);
  CHECK(labels.at("a3") == Affiliation::democratic);
  CHECK(labels.at("b1") == Affiliation::republican);
  CHECK(labels.at("b2") == Affiliation::republican);
  CHECK(labels.at("b3") == Affiliation::republican);
  CHECK(labels.at("lone") == Affiliation::unknown);
  CHECK_THROWS_AS(graph::cluster_partition(g, {}), ConfigError);
}

TEST_CASE("barbell bridge endpoints keep their side's label", "[graph]") {
  DirectedGraph g;
  const std::vector<std::string> a = {"a1", "a2", "a3", "a4"};
  const std::vector<std::string> b = {"b1", "b2", "b3", "b4"};
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = i + 1; j < 4; ++j) {
      g.add_edge(a[i], a[j]);
      g.add_edge(b[i], b[j]);
    }
  g.add_edge("a4", "b4");  // the bridge
  std::map<std::string, Affiliation> seeds = {
      {"a1", Affiliation::democratic},
      {"b1", Affiliation::republican},
  };
  auto labels = graph::cluster_partition(g, seeds);
  for (const auto& n : a) CHECK(labels.at(n) == Affiliation::democratic);
  for (const auto& n : b) CHECK(labels.at(n) == Affiliation::republican);
}

TEST_CASE("partition is invariant under node relabeling", "[graph]") {
  DirectedGraph g;
  g.add_edge("a1", "a2");
  g.add_edge("a2", "a3");
  g.add_edge("a3", "a1");
  g.add_edge("a3", "m");
  g.add_edge("b1", "b2");
  g.add_edge("b2", "b3");
  g.add_edge("b3", "b1");
  g.add_edge("b3", "m");
  std::map<std::string, Affiliation> seeds = {
      {"a1", Affiliation::democratic},
      {"b1", Affiliation::republican},
  };
  auto labels = graph::cluster_partition(g, seeds);

  auto rename = [](const std::string& s) { return "zz_" + s; };
  DirectedGraph g2;
  for (const auto& n : g.nodes) g2.add_node(rename(n));
  for (const auto& [e, w] : g.edges)
    for (uint64_t i = 0; i < w; ++i) g2.add_edge(rename(e.first), rename(e.second));
  std::map<std::string, Affiliation> seeds2;
  for (const auto& [u, aff] : seeds) seeds2[rename(u)] = aff;
  auto labels2 = graph::cluster_partition(g2, seeds2);

  for (const auto& [u, aff] : labels) {
    CHECK(labels2.at(rename(u)) == aff);
  }
}

TEST_CASE("tie with support on both sides uses seed mass", "[graph]") {
  // v sits between one democratic and one republican neighbor; democratic
  // has more seeds overall, so the tie resolves democratic.
  DirectedGraph g;
  g.add_edge("d1", "v");
  g.add_edge("r1", "v");
  g.add_node("d2");
  std::map<std::string, Affiliation> seeds = {
      {"d1", Affiliation::democratic},
      {"d2", Affiliation::democratic},
      {"r1", Affiliation::republican},
  };
  auto labels = graph::cluster_partition(g, seeds);
  CHECK(labels.at("v") == Affiliation::democratic);

  // equal seed mass: lexicographic tie-break on the label name
  std::map<std::string, Affiliation> even = {
      {"d1", Affiliation::democratic},
      {"r1", Affiliation::republican},
  };
  auto labels2 = graph::cluster_partition(g, even);
  CHECK(labels2.at("v") == Affiliation::democratic);  // "democratic" < "republican"
}

TEST_CASE("cohen's kappa on hand-checked fixtures", "[graph]") {
  auto identical = graph::verify_sample({"A", "B", "A"}, {"A", "B", "A"});
  CHECK(identical.kappa == 1.0);
  CHECK(identical.observed_agreement == 1.0);

  auto zero = graph::verify_sample({"A", "A", "B", "B"}, {"A", "B", "A", "B"});
  CHECK(zero.kappa == Catch::Approx(0.0).margin(1e-12));
  CHECK(zero.observed_agreement == 0.5);

  auto mixed = graph::verify_sample(
      {"A", "A", "B", "B", "C", "A", "B", "C", "C", "A"},
      {"A", "B", "B", "B", "C", "A", "A", "C", "C", "A"});
  CHECK(mixed.kappa == Catch::Approx(0.696969696969697).epsilon(1e-12));

  CHECK_THROWS_AS(graph::verify_sample({"A"}, {"A", "B"}), ContractError);
  CHECK_THROWS_AS(graph::verify_sample({}, {}), ContractError);
}

TEST_CASE("agreement bands follow the published scale", "[graph]") {
  CHECK(graph::kappa_band(0.9264) == "near-perfect");
  CHECK(graph::kappa_band(0.9116) == "near-perfect");
  CHECK(graph::kappa_band(0.6482) == "substantial");
  CHECK(graph::kappa_band(0.5) == "moderate");
  CHECK(graph::kappa_band(0.3) == "fair");
  CHECK(graph::kappa_band(0.1) == "slight");
  CHECK(graph::kappa_band(-0.2) == "poor");
}

TEST_CASE("edge csv round-trips", "[graph]") {
  DirectedGraph g;
  g.add_edge("u1", "u2");
  g.add_edge("u1", "u2");
  g.add_edge("b,with comma", "u3");
  auto csv = graph::edges_to_csv(g);
  std::vector<std::string> lines;
  std::string cur;
  for (char c : csv) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  auto g2 = graph::edges_from_csv(lines);
  CHECK(g2.nodes == g.nodes);
  CHECK(g2.edges == g.edges);
}
