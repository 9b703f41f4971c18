#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "terrarank/error.hpp"
#include "terrarank/geo.hpp"
#include "terrarank/polyline.hpp"
#include "terrarank/transport.hpp"
#include "terrarank/weighting.hpp"

namespace terrarank {

using NodeId = std::int64_t;

/// Immutable road network. Node ids are external identifiers; internally
/// nodes are addressed by their index in `nodes()`.
class RoadGraph {
 public:
  struct Node {
    NodeId id;
    GeoPoint position;
  };

  struct Edge {
    NodeId u;
    NodeId v;
    double length;
    bool bidirectional = true;
  };

  /// A traversable direction of an edge, in node indices.
  struct Arc {
    std::size_t from;
    std::size_t to;
    std::size_t edge;
    double length;
  };

  RoadGraph(std::vector<Node> nodes, std::vector<Edge> edges)
      : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!index_.emplace(nodes_[i].id, i).second) {
        throw ArgumentError("duplicate node id " + std::to_string(nodes_[i].id));
      }
    }
    out_arcs_.resize(nodes_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto& edge = edges_[e];
      const auto u = index_of(edge.u);
      const auto v = index_of(edge.v);
      if (u == v) throw ArgumentError("self-loop on node " + std::to_string(edge.u));
      if (!(edge.length > 0) || !std::isfinite(edge.length)) {
        throw ArgumentError("edge " + std::to_string(e) + " has non-positive length");
      }
      out_arcs_[u].push_back({u, v, e, edge.length});
      if (edge.bidirectional) out_arcs_[v].push_back({v, u, e, edge.length});
    }
  }

  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Arc> arcs_from(std::size_t node_index) const { return out_arcs_[node_index]; }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool contains(NodeId id) const { return index_.contains(id); }

  std::size_t index_of(NodeId id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw ArgumentError("unknown node id " + std::to_string(id));
    return it->second;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::vector<Arc>> out_arcs_;
};

/// Parses {"nodes":[{id,lat,lng}],"edges":[{u,v,length?,bidirectional?}]}.
/// A missing length is the haversine distance between the endpoints.
inline RoadGraph load_graph(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("road graph JSON: ") + e.what(), e.byte);
  }
  std::vector<RoadGraph::Node> nodes;
  std::vector<RoadGraph::Edge> edges;
  try {
    for (const auto& n : doc.at("nodes")) {
      nodes.push_back({n.at("id").get<NodeId>(), GeoPoint(n.at("lat").get<double>(), n.at("lng").get<double>())});
    }
    std::unordered_map<NodeId, GeoPoint> pos;
    for (const auto& n : nodes) pos.emplace(n.id, n.position);
    for (const auto& e : doc.at("edges")) {
      RoadGraph::Edge edge{e.at("u").get<NodeId>(), e.at("v").get<NodeId>(), 0.0,
                           e.value("bidirectional", true)};
      if (e.contains("length")) {
        edge.length = e.at("length").get<double>();
      } else {
        const auto a = pos.find(edge.u);
        const auto b = pos.find(edge.v);
        if (a == pos.end() || b == pos.end()) {
          throw ArgumentError("edge references unknown node " + std::to_string(a == pos.end() ? edge.u : edge.v));
        }
        edge.length = haversine_distance(a->second, b->second);
      }
      edges.push_back(edge);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("road graph JSON: ") + e.what(), 0);
  }
  return RoadGraph(std::move(nodes), std::move(edges));
}

using EdgeCost = std::function<double(const RoadGraph::Arc&)>;

inline double length_cost(const RoadGraph::Arc& arc) { return arc.length; }

struct GraphPath {
  std::vector<std::size_t> nodes;  // node indices, src first
  std::vector<std::size_t> edges;  // edge indices, one per hop
  double cost = 0.0;
};

/// Minimum-cost path by node index. Frontier ties pop the lower node id first;
/// parents change only on strict improvement. Throws NoRouteError when `dst`
/// is unreachable or equals `src`.
inline GraphPath shortest_path(const RoadGraph& graph, std::size_t src, std::size_t dst,
                               const EdgeCost& cost = length_cost) {
  if (src == dst) throw NoRouteError("origin and destination are the same node");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto nodes = graph.nodes();
  std::vector<double> dist(graph.size(), kInf);
  std::vector<std::size_t> parent_arc_edge(graph.size(), SIZE_MAX);
  std::vector<std::size_t> parent(graph.size(), SIZE_MAX);
  std::vector<char> done(graph.size(), 0);

  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  dist[src] = 0.0;
  frontier.push({0.0, nodes[src].id});
  while (!frontier.empty()) {
    const auto [d, id] = frontier.top();
    frontier.pop();
    const auto u = graph.index_of(id);
    if (done[u] || d > dist[u]) continue;
    done[u] = 1;
    if (u == dst) break;
    for (const auto& arc : graph.arcs_from(u)) {
      const double c = cost(arc);
      if (!(c > 0) || !std::isfinite(c)) throw ArgumentError("edge cost must be finite and positive");
      const double nd = d + c;
      if (nd < dist[arc.to]) {
        dist[arc.to] = nd;
        parent[arc.to] = u;
        parent_arc_edge[arc.to] = arc.edge;
        frontier.push({nd, nodes[arc.to].id});
      }
    }
  }
  if (dist[dst] == kInf) {
    throw NoRouteError("node " + std::to_string(nodes[dst].id) + " is unreachable from node " +
                       std::to_string(nodes[src].id));
  }
  GraphPath path;
  path.cost = dist[dst];
  for (std::size_t v = dst; v != src; v = parent[v]) {
    path.nodes.push_back(v);
    path.edges.push_back(parent_arc_edge[v]);
  }
  path.nodes.push_back(src);
  std::reverse(path.nodes.begin(), path.nodes.end());
  std::reverse(path.edges.begin(), path.edges.end());
  return path;
}

inline Route path_to_route(const RoadGraph& graph, const GraphPath& path, std::string id) {
  std::vector<GeoPoint> pts;
  pts.reserve(path.nodes.size());
  for (auto i : path.nodes) pts.push_back(graph.nodes()[i].position);
  return Route::from_positions(std::move(id), pts);
}

inline Route dijkstra(const RoadGraph& graph, NodeId src, NodeId dst, const EdgeCost& cost = length_cost) {
  const auto s = graph.index_of(src);
  const auto t = graph.index_of(dst);
  return path_to_route(graph, shortest_path(graph, s, t, cost), "route0");
}

/// Cost = length * slope weight from per-node elevations (indexed like
/// graph.nodes()). Folds the environmental weight into the search itself.
inline EdgeCost slope_edge_cost(std::vector<double> node_elevations, WeightSpec spec) {
  return [elev = std::move(node_elevations), spec = std::move(spec)](const RoadGraph::Arc& arc) {
    return arc.length * slope_weight(elev[arc.from], elev[arc.to], arc.length, spec);
  };
}

// ---------------------------------------------------------------------------
// Candidates

enum class CandidateSource { local, provider, file };

inline const char* to_string(CandidateSource s) {
  switch (s) {
    case CandidateSource::local: return "local";
    case CandidateSource::provider: return "provider";
    case CandidateSource::file: return "file";
  }
  return "?";
}

/// Alternative routes between one origin/destination pair. `origin` and
/// `destination` are the resolved endpoints every route starts and ends at
/// (snapped nodes, or the provider's own endpoints); the requested points are
/// kept alongside.
struct CandidateSet {
  GeoPoint origin;
  GeoPoint destination;
  GeoPoint requested_origin;
  GeoPoint requested_destination;
  std::vector<Route> routes;
  CandidateSource source;
};

inline constexpr std::size_t kDefaultCandidates = 3;
inline constexpr double kDefaultPenalty = 1.3;

/// Id of the node nearest to `p`; ties go to the lowest id.
inline NodeId snap_to_graph(const RoadGraph& graph, const GeoPoint& p) {
  const auto nodes = graph.nodes();
  if (nodes.empty()) throw ArgumentError("cannot snap to an empty graph");
  NodeId best_id = nodes[0].id;
  double best = haversine_distance(p, nodes[0].position);
  for (const auto& n : nodes.subspan(1)) {
    const double d = haversine_distance(p, n.position);
    if (d < best || (d == best && n.id < best_id)) {
      best = d;
      best_id = n.id;
    }
  }
  return best_id;
}

struct Alternative {
  GraphPath path;
  double true_length;
};

/// Penalty-method alternatives by node index: repeatedly take the cheapest path
/// under the current costs, then multiply the cost of each of its edges by
/// `penalty`. Repeated geometries are discarded. Sorted by true length (stable).
inline std::vector<Alternative> penalty_alternatives(const RoadGraph& graph, std::size_t src,
                                                     std::size_t dst, std::size_t k, double penalty,
                                                     const EdgeCost& base_cost = length_cost) {
  if (k < 1) throw ArgumentError("k must be at least 1");
  if (!(penalty > 1.0) || !std::isfinite(penalty)) throw ArgumentError("penalty must be > 1");

  std::vector<double> factor(graph.edges().size(), 1.0);
  const EdgeCost penalized = [&](const RoadGraph::Arc& arc) { return base_cost(arc) * factor[arc.edge]; };
  std::vector<Alternative> found;
  const std::size_t max_iterations = 4 * k + 4;
  for (std::size_t it = 0; it < max_iterations && found.size() < k; ++it) {
    auto path = shortest_path(graph, src, dst, penalized);
    const bool duplicate = std::any_of(found.begin(), found.end(),
                                       [&](const Alternative& a) { return a.path.nodes == path.nodes; });
    for (auto e : path.edges) factor[e] *= penalty;
    if (duplicate) continue;
    double length = 0.0;
    for (auto e : path.edges) length += graph.edges()[e].length;
    found.push_back({std::move(path), length});
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const Alternative& a, const Alternative& b) { return a.true_length < b.true_length; });
  return found;
}

inline CandidateSet k_alternatives(const RoadGraph& graph, NodeId src, NodeId dst,
                                   std::size_t k = kDefaultCandidates, double penalty = kDefaultPenalty,
                                   const EdgeCost& base_cost = length_cost) {
  const auto s = graph.index_of(src);
  const auto t = graph.index_of(dst);
  const auto alts = penalty_alternatives(graph, s, t, k, penalty, base_cost);
  const auto& o = graph.nodes()[s].position;
  const auto& d = graph.nodes()[t].position;
  CandidateSet set{o, d, o, d, {}, CandidateSource::local};
  for (std::size_t i = 0; i < alts.size(); ++i) {
    set.routes.push_back(path_to_route(graph, alts[i].path, "route" + std::to_string(i)));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Directions provider

/// Source of provider-encoded candidate polylines.
class DirectionsClient {
 public:
  virtual ~DirectionsClient() = default;
  /// Raw response body of a directions request.
  virtual std::string request(const GeoPoint& origin, const GeoPoint& destination) const = 0;
  virtual CandidateSource source() const = 0;
};

/// Speaks `GET <url>?origin=lat,lng&destination=lat,lng&alternatives=true[&key=...]`
/// and expects {"status":"OK","routes":[{"overview_polyline":{"points":"..."}}...]}.
/// A file:// endpoint returns the file's contents for every request.
class HttpDirectionsClient final : public DirectionsClient {
 public:
  HttpDirectionsClient(Endpoint endpoint, std::string api_key = {}, RetryPolicy retry = {})
      : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), retry_(retry) {}

  std::string request(const GeoPoint& origin, const GeoPoint& destination) const override {
    char buf[160];
    std::snprintf(buf, sizeof buf, "origin=%.6f,%.6f&destination=%.6f,%.6f&alternatives=true", origin.lat(),
                  origin.lng(), destination.lat(), destination.lng());
    std::string query = buf;
    if (!api_key_.empty()) query += "&key=" + api_key_;
    return endpoint_.get(query, retry_);
  }

  CandidateSource source() const override {
    return endpoint_.is_file() ? CandidateSource::file : CandidateSource::provider;
  }

 private:
  Endpoint endpoint_;
  std::string api_key_;
  RetryPolicy retry_;
};

/// Decodes at most `k` provider routes, preserving provider order. Any failure
/// (transport, non-OK status, bad polyline) throws ProviderError.
inline CandidateSet fetch_provider_routes(const DirectionsClient& client, const GeoPoint& origin,
                                          const GeoPoint& destination, std::size_t k = kDefaultCandidates) {
  if (k < 1) throw ArgumentError("k must be at least 1");
  const auto body = client.request(origin, destination);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw ProviderError("directions service returned malformed JSON");
  }
  const auto status = doc.value("status", std::string{});
  if (status != "OK") throw ProviderError("directions service status: " + (status.empty() ? "<missing>" : status));
  const auto routes = doc.find("routes");
  if (routes == doc.end() || !routes->is_array() || routes->empty()) {
    throw ProviderError("directions service returned no routes");
  }

  std::vector<Route> out;
  for (std::size_t i = 0; i < routes->size() && out.size() < k; ++i) {
    try {
      const auto encoded = (*routes)[i].at("overview_polyline").at("points").get<std::string>();
      const auto pts = decode_polyline(encoded);
      out.push_back(Route::from_positions("route" + std::to_string(i), pts));
    } catch (const nlohmann::json::exception&) {
      throw ProviderError("directions route " + std::to_string(i) + " has no overview polyline");
    } catch (const Error& e) {
      throw ProviderError("directions route " + std::to_string(i) + ": " + e.what());
    }
  }

  const auto start = out.front().front().position;
  const auto end = out.front().back().position;
  for (const auto& r : out) {
    if (std::abs(r.front().position.lat() - start.lat()) > 1e-9 ||
        std::abs(r.front().position.lng() - start.lng()) > 1e-9 ||
        std::abs(r.back().position.lat() - end.lat()) > 1e-9 ||
        std::abs(r.back().position.lng() - end.lng()) > 1e-9) {
      throw ProviderError("directions routes do not share endpoints");
    }
  }
  return CandidateSet{start, end, origin, destination, std::move(out), client.source()};
}

}  // namespace terrarank
