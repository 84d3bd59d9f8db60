#pragma once

// General min-cost flow on an explicit graph: successive shortest paths with
// Johnson potentials and Dijkstra. Used as an independent reference for the
// specialised transport solver and for small networks.

#include "fairkm/errors.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

namespace fairkm {

class MinCostFlowGraph
{
public:
  struct Arc
  {
    std::size_t  to;
    std::size_t  rev;
    std::int64_t cap;
    std::int64_t cost;
    std::int64_t flow{0};
  };

  explicit MinCostFlowGraph(std::size_t nodes) : adj_(nodes), supply_(nodes, 0) {}

  std::size_t node_count() const { return adj_.size(); }

  /// Returns a handle (node, index) usable with flow_on().
  std::pair<std::size_t, std::size_t> add_arc(std::size_t from, std::size_t to, std::int64_t cap, std::int64_t cost)
  {
    if (cost < 0)
    {
      throw InvalidInput("MinCostFlowGraph: negative arc costs are not supported");
    }
    adj_[from].push_back({to, adj_[to].size(), cap, cost});
    adj_[to].push_back({from, adj_[from].size() - 1, 0, -cost});
    return {from, adj_[from].size() - 1};
  }

  /// Positive = supply, negative = demand.
  void set_supply(std::size_t node, std::int64_t b) { supply_[node] = b; }

  std::int64_t flow_on(std::pair<std::size_t, std::size_t> handle) const
  {
    return adj_[handle.first][handle.second].flow;
  }

  /// Min-cost flow meeting every supply and demand; nullopt if none exists.
  std::optional<std::int64_t> solve()
  {
    std::size_t const n      = adj_.size();
    std::size_t const source = n;
    std::size_t const sink   = n + 1;
    adj_.resize(n + 2);
    std::int64_t need = 0;
    std::int64_t give = 0;
    for (std::size_t v = 0; v < n; ++v)
    {
      if (supply_[v] > 0)
      {
        add_raw(source, v, supply_[v]);
        need += supply_[v];
      }
      else if (supply_[v] < 0)
      {
        add_raw(v, sink, -supply_[v]);
        give -= supply_[v];
      }
    }
    if (need != give)
    {
      return std::nullopt;
    }

    constexpr auto           kInf = std::numeric_limits<std::int64_t>::max() / 4;
    std::vector<std::int64_t> pot(n + 2, 0);
    std::vector<std::int64_t> dist(n + 2);
    std::vector<std::size_t>  prev_node(n + 2);
    std::vector<std::size_t>  prev_arc(n + 2);
    std::int64_t              sent = 0;
    std::int64_t              cost = 0;
    using Item                     = std::pair<std::int64_t, std::size_t>;
    while (sent < need)
    {
      std::fill(dist.begin(), dist.end(), kInf);
      dist[source] = 0;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      pq.push({0, source});
      while (!pq.empty())
      {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v])
        {
          continue;
        }
        for (std::size_t a = 0; a < adj_[v].size(); ++a)
        {
          auto const &e = adj_[v][a];
          if (e.cap - e.flow <= 0)
          {
            continue;
          }
          std::int64_t const nd = d + e.cost + pot[v] - pot[e.to];
          if (nd < dist[e.to])
          {
            dist[e.to]      = nd;
            prev_node[e.to] = v;
            prev_arc[e.to]  = a;
            pq.push({nd, e.to});
          }
        }
      }
      if (dist[sink] >= kInf)
      {
        adj_.resize(n);
        return std::nullopt;
      }
      for (std::size_t v = 0; v < n + 2; ++v)
      {
        if (dist[v] < kInf)
        {
          pot[v] += dist[v];
        }
      }
      std::int64_t push = need - sent;
      for (auto v = sink; v != source; v = prev_node[v])
      {
        auto const &e = adj_[prev_node[v]][prev_arc[v]];
        push          = std::min(push, e.cap - e.flow);
      }
      for (auto v = sink; v != source; v = prev_node[v])
      {
        auto &e = adj_[prev_node[v]][prev_arc[v]];
        e.flow += push;
        adj_[v][e.rev].flow -= push;
        cost += push * e.cost;
      }
      sent += push;
    }
    // Drop the helper terminals; arcs into them from real nodes are removed too.
    adj_.resize(n);
    for (auto &list : adj_)
    {
      std::erase_if(list, [n](Arc const &e) { return e.to >= n; });
    }
    return cost;
  }

private:
  void add_raw(std::size_t from, std::size_t to, std::int64_t cap)
  {
    adj_[from].push_back({to, adj_[to].size(), cap, 0});
    adj_[to].push_back({from, adj_[from].size() - 1, 0, 0});
  }

  std::vector<std::vector<Arc>> adj_;
  std::vector<std::int64_t>     supply_;
};

}  // namespace fairkm
