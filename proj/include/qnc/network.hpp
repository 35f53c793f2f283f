// Copyright 2026 The qnc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "qnc/linalg.hpp"
#include "qnc/state.hpp"

namespace qnc {

// One shared Bell pair. `a` sits at the tail node, `b` at the head node;
// for grid edges the tail is the smaller (row, column) endpoint.
struct EdgeRef {
  std::string id;
  Qubit a, b;
};

// A communication network with one Bell pair per edge. Cluster networks are
// k x N grids with nearest-neighbor vertical edges per column and horizontal
// edges per row; inputs sit in column 1 and outputs in column N. Generalized
// networks allow arbitrary same-column vertical pairs. The butterfly and
// grail graphs carry an explicit correspondence onto a (3,2)- resp.
// (2,3)-cluster network, stored in node_map/edge_map.
struct Network {
  enum class Kind { cluster, generalized, butterfly, grail };

  Kind kind = Kind::cluster;
  int k = 0;
  int n = 0;
  std::vector<EdgeRef> edges;
  std::vector<std::string> input_nodes;   // ordered by wire index
  std::vector<std::string> output_nodes;  // ordered by wire index
  // Named networks only: correspondence to the underlying cluster network.
  std::vector<std::pair<std::string, std::string>> node_map;  // named -> v:i,j
  std::vector<std::pair<std::string, std::string>> edge_map;  // E:n -> S/K id
  // Generalized networks only: the vertical pair list (i, i', j), i < i'.
  std::vector<std::tuple<int, int, int>> vertical_pairs;

  static std::string cluster_node(int i, int j) {
    return "v:" + std::to_string(i) + "," + std::to_string(j);
  }

  const EdgeRef* edge(const std::string& id) const {
    for (const EdgeRef& e : edges)
      if (e.id == id) return &e;
    return nullptr;
  }

  // Resolves a cluster-coordinate edge id ("S:i,j" / "K:i,j") to the actual
  // edge, following edge_map for the named graphs.
  const EdgeRef* find_cluster_edge(const std::string& cluster_id) const {
    if (kind == Kind::cluster || kind == Kind::generalized)
      return edge(cluster_id);
    for (const auto& [named, mapped] : edge_map)
      if (mapped == cluster_id) return edge(named);
    return nullptr;
  }

  // Resolves a cluster-coordinate node id to the actual node name.
  std::string find_cluster_node(const std::string& cluster_node_id) const {
    if (kind == Kind::cluster || kind == Kind::generalized)
      return cluster_node_id;
    for (const auto& [named, mapped] : node_map)
      if (mapped == cluster_node_id) return named;
    throw QncError("no node mapped to " + cluster_node_id);
  }

  std::vector<std::string> all_nodes() const {
    std::set<std::string> seen;
    std::vector<std::string> out;
    for (const EdgeRef& e : edges) {
      for (const std::string* n : {&e.a.node, &e.b.node})
        if (seen.insert(*n).second) out.push_back(*n);
    }
    return out;
  }

  int count_vertical() const {
    int c = 0;
    for (const EdgeRef& e : edges)
      if (e.id.rfind("S:", 0) == 0) ++c;
    return c;
  }
  int count_horizontal() const {
    int c = 0;
    for (const EdgeRef& e : edges)
      if (e.id.rfind("K:", 0) == 0) ++c;
    return c;
  }
};

namespace detail {

inline EdgeRef make_edge(const std::string& id, const std::string& node_a,
                         const std::string& node_b) {
  return EdgeRef{id, Qubit{id + ":1", node_a}, Qubit{id + ":2", node_b}};
}

}  // namespace detail

inline Network build_cluster(int k, int n) {
  if (k < 1 || n < 1) throw QncError("build_cluster: k and N must be >= 1");
  Network net;
  net.kind = Network::Kind::cluster;
  net.k = k;
  net.n = n;
  for (int i = 1; i <= k - 1; ++i)
    for (int j = 1; j <= n; ++j)
      net.edges.push_back(detail::make_edge(
          "S:" + std::to_string(i) + "," + std::to_string(j),
          Network::cluster_node(i, j), Network::cluster_node(i + 1, j)));
  for (int i = 1; i <= k; ++i)
    for (int j = 1; j <= n - 1; ++j)
      net.edges.push_back(detail::make_edge(
          "K:" + std::to_string(i) + "," + std::to_string(j),
          Network::cluster_node(i, j), Network::cluster_node(i, j + 1)));
  for (int i = 1; i <= k; ++i) {
    net.input_nodes.push_back(Network::cluster_node(i, 1));
    net.output_nodes.push_back(Network::cluster_node(i, n));
  }
  return net;
}

// Vertical edges may join any two rows of the same column. Nearest-neighbor
// pairs keep the plain cluster ids so that S_sub = S behaves identically to
// the cluster network everywhere downstream.
inline Network build_generalized(int k, int n,
                                 std::vector<std::tuple<int, int, int>> pairs) {
  if (k < 1 || n < 1) throw QncError("build_generalized: k, N must be >= 1");
  Network net;
  net.kind = Network::Kind::generalized;
  net.k = k;
  net.n = n;
  std::set<std::tuple<int, int, int>> seen;
  for (auto& [i, ip, j] : pairs) {
    if (i > ip) std::swap(i, ip);
    if (i < 1 || ip > k || i == ip || j < 1 || j > n)
      throw QncError("build_generalized: vertical pair out of range");
    if (!seen.insert({i, ip, j}).second)
      throw QncError("build_generalized: duplicate vertical pair");
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& l, const auto& r) {
              return std::tie(std::get<2>(l), std::get<0>(l), std::get<1>(l)) <
                     std::tie(std::get<2>(r), std::get<0>(r), std::get<1>(r));
            });
  net.vertical_pairs = pairs;
  for (const auto& [i, ip, j] : pairs) {
    const std::string id =
        ip == i + 1 ? "S:" + std::to_string(i) + "," + std::to_string(j)
                    : "S:" + std::to_string(i) + "-" + std::to_string(ip) +
                          "," + std::to_string(j);
    net.edges.push_back(detail::make_edge(id, Network::cluster_node(i, j),
                                          Network::cluster_node(ip, j)));
  }
  for (int i = 1; i <= k; ++i)
    for (int j = 1; j <= n - 1; ++j)
      net.edges.push_back(detail::make_edge(
          "K:" + std::to_string(i) + "," + std::to_string(j),
          Network::cluster_node(i, j), Network::cluster_node(i, j + 1)));
  for (int i = 1; i <= k; ++i) {
    net.input_nodes.push_back(Network::cluster_node(i, 1));
    net.output_nodes.push_back(Network::cluster_node(i, n));
  }
  return net;
}

// Butterfly graph on {i1, i2, o1, o2, n1, n2}. Nodes correspond to the
// (3,2)-cluster as i1,n1,i2 -> column 1 and o1,n2,o2 -> column 2; the edge
// sets {E1,E5,E3}, {E2,E4}, {E6,E7} correspond to K_1, S_1, S_2.
inline Network butterfly_network() {
  Network net;
  net.kind = Network::Kind::butterfly;
  net.k = 3;
  net.n = 2;
  net.node_map = {{"i1", "v:1,1"}, {"n1", "v:2,1"}, {"i2", "v:3,1"},
                  {"o1", "v:1,2"}, {"n2", "v:2,2"}, {"o2", "v:3,2"}};
  net.edge_map = {{"E:1", "K:1,1"}, {"E:2", "S:1,1"}, {"E:3", "K:3,1"},
                  {"E:4", "S:2,1"}, {"E:5", "K:2,1"}, {"E:6", "S:1,2"},
                  {"E:7", "S:2,2"}};
  const Network cluster = build_cluster(3, 2);
  for (const auto& [named, mapped] : net.edge_map) {
    const EdgeRef* ce = cluster.edge(mapped);
    auto back = [&](const std::string& cn) {
      for (const auto& [nn, mn] : net.node_map)
        if (mn == cn) return nn;
      throw QncError("butterfly_network: unmapped node");
    };
    net.edges.push_back(detail::make_edge(named, back(ce->a.node), back(ce->b.node)));
  }
  net.input_nodes = {"i1", "i2"};
  net.output_nodes = {"o1", "o2"};
  return net;
}

// Grail graph on {i1, i2, o1, o2, n1..n4}. E1 = (i1,n1) and E2 = (n4,o2) are
// plain teleport tails; the remaining seven edges form a (2,3)-cluster via
// n1,n2,o1 -> row 1 and i2,n3,n4 -> row 2.
inline Network grail_network() {
  Network net;
  net.kind = Network::Kind::grail;
  net.k = 2;
  net.n = 3;
  net.node_map = {{"n1", "v:1,1"}, {"n2", "v:1,2"}, {"o1", "v:1,3"},
                  {"i2", "v:2,1"}, {"n3", "v:2,2"}, {"n4", "v:2,3"}};
  net.edge_map = {{"E:1", ""},      {"E:2", ""},      {"E:3", "K:1,1"},
                  {"E:4", "K:1,2"}, {"E:5", "K:2,1"}, {"E:6", "K:2,2"},
                  {"E:7", "S:1,1"}, {"E:8", "S:1,2"}, {"E:9", "S:1,3"}};
  net.edges.push_back(detail::make_edge("E:1", "i1", "n1"));
  net.edges.push_back(detail::make_edge("E:2", "n4", "o2"));
  const Network cluster = build_cluster(2, 3);
  for (const auto& [named, mapped] : net.edge_map) {
    if (mapped.empty()) continue;
    const EdgeRef* ce = cluster.edge(mapped);
    auto back = [&](const std::string& cn) {
      for (const auto& [nn, mn] : net.node_map)
        if (mn == cn) return nn;
      throw QncError("grail_network: unmapped node");
    };
    net.edges.push_back(detail::make_edge(named, back(ce->a.node), back(ce->b.node)));
  }
  net.input_nodes = {"i1", "i2"};
  net.output_nodes = {"o1", "o2"};
  return net;
}

// ---------------------------------------------------------------------------
// Resource state: one Bell pair per edge, in edge-list order.

struct ResourceState {
  StateVector state;
  std::vector<EdgeRef> edges;
};

inline ResourceState build_resource_state(const Network& net, int qubit_cap = 24) {
  const int total = 2 * static_cast<int>(net.edges.size());
  if (total > qubit_cap)
    throw QncError("build_resource_state: " + std::to_string(total) +
                   " qubits exceed the cap of " + std::to_string(qubit_cap));
  ResourceState rs;
  rs.edges = net.edges;
  for (const EdgeRef& e : net.edges) rs.state.add_bell_pair(e.a, e.b);
  return rs;
}

// ---------------------------------------------------------------------------
// Loops of vertical edges within one column (generalized networks). Each
// loop is a distinct-edge cycle; it enables a cyclic permutation of qubit
// states around its nodes.

struct VerticalLoop {
  int column = 0;
  std::vector<int> rows;             // cycle i_1 -> i_2 -> ... -> i_1
  std::vector<std::string> edge_ids; // edge m connects rows[m], rows[m+1]
};

inline std::vector<VerticalLoop> find_vertical_loops(const Network& net,
                                                     std::size_t max_loops = 1000) {
  std::vector<VerticalLoop> loops;
  if (net.kind != Network::Kind::generalized &&
      net.kind != Network::Kind::cluster)
    throw QncError("find_vertical_loops: needs a (generalized) cluster network");
  for (int j = 1; j <= net.n; ++j) {
    // Adjacency for this column.
    std::map<int, std::vector<std::pair<int, std::string>>> adj;
    for (const EdgeRef& e : net.edges) {
      if (e.id.rfind("S:", 0) != 0) continue;
      const auto comma = e.id.find(',');
      if (std::stoi(e.id.substr(comma + 1)) != j) continue;
      const std::string rows = e.id.substr(2, comma - 2);
      const auto dash = rows.find('-');
      const int i = std::stoi(dash == std::string::npos ? rows : rows.substr(0, dash));
      const int ip = dash == std::string::npos ? i + 1 : std::stoi(rows.substr(dash + 1));
      adj[i].push_back({ip, e.id});
      adj[ip].push_back({i, e.id});
    }
    // Simple cycles: DFS restricted to nodes >= start, direction fixed by
    // requiring the second node to be smaller than the last.
    for (const auto& [start, nbrs] : adj) {
      (void)nbrs;
      std::vector<int> path{start};
      std::vector<std::string> path_edges;
      std::set<int> on_path{start};
      auto dfs = [&](auto&& self, int cur) -> void {
        if (loops.size() >= max_loops) return;
        for (const auto& [nxt, eid] : adj.at(cur)) {
          if (nxt == start && path.size() >= 3) {
            if (path[1] < path.back()) {
              VerticalLoop loop;
              loop.column = j;
              loop.rows = path;
              loop.edge_ids = path_edges;
              loop.edge_ids.push_back(eid);
              loops.push_back(loop);
            }
            continue;
          }
          if (nxt <= start || on_path.count(nxt)) continue;
          path.push_back(nxt);
          path_edges.push_back(eid);
          on_path.insert(nxt);
          self(self, nxt);
          path.pop_back();
          path_edges.pop_back();
          on_path.erase(nxt);
        }
      };
      dfs(dfs, start);
    }
  }
  return loops;
}

// ---------------------------------------------------------------------------
// Network description files.

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json j;
  switch (net.kind) {
    case Network::Kind::cluster: j["kind"] = "cluster"; break;
    case Network::Kind::generalized: j["kind"] = "generalized"; break;
    case Network::Kind::butterfly: j["kind"] = "butterfly"; break;
    case Network::Kind::grail: j["kind"] = "grail"; break;
  }
  j["k"] = net.k;
  j["N"] = net.n;
  if (net.kind == Network::Kind::generalized) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [i, ip, col] : net.vertical_pairs)
      pairs.push_back({i, ip, col});
    j["vertical_edges"] = pairs;
  }
  return j;
}

inline Network network_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "butterfly") return butterfly_network();
  if (kind == "grail") return grail_network();
  if (kind != "cluster" && kind != "generalized")
    throw QncError("network_from_json: unknown kind '" + kind + "'");
  const int k = j.at("k").get<int>();
  const int n = j.at("N").get<int>();
  if (kind == "cluster") return build_cluster(k, n);
  if (kind == "generalized") {
    std::vector<std::tuple<int, int, int>> pairs;
    for (const auto& p : j.at("vertical_edges"))
      pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>(), p.at(2).get<int>()});
    return build_generalized(k, n, std::move(pairs));
  }
  throw QncError("network_from_json: unknown kind '" + kind + "'");
}

}  // namespace qnc
