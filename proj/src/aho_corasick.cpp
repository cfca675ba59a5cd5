#include "proswitch/aho_corasick.hpp"

#include <algorithm>
#include <queue>

namespace proswitch {

AhoCorasick::AhoCorasick(const std::vector<std::string>& patterns) {
  nodes_.emplace_back();
  lengths_.reserve(patterns.size());
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    const std::string& pat = patterns[p];
    lengths_.push_back(pat.size());
    if (pat.empty()) continue;
    std::int32_t cur = 0;
    for (unsigned char b : pat) {
      auto& edges = nodes_[cur].edges;
      auto it = std::lower_bound(edges.begin(), edges.end(), b,
                                 [](const auto& e, std::uint8_t v) { return e.first < v; });
      if (it != edges.end() && it->first == b) {
        cur = it->second;
      } else {
        auto next = static_cast<std::int32_t>(nodes_.size());
        edges.insert(it, {b, next});
        nodes_.emplace_back();
        cur = next;
      }
    }
    if (nodes_[cur].pattern < 0) nodes_[cur].pattern = static_cast<std::int32_t>(p);
  }

  std::queue<std::int32_t> bfs;
  for (const auto& [b, c] : nodes_[0].edges) {
    nodes_[c].fail = 0;
    bfs.push(c);
  }
  while (!bfs.empty()) {
    std::int32_t u = bfs.front();
    bfs.pop();
    for (const auto& [b, v] : nodes_[u].edges) {
      std::int32_t f = nodes_[u].fail;
      std::int32_t target;
      while (true) {
        target = child(f, b);
        if (target >= 0 || f == 0) break;
        f = nodes_[f].fail;
      }
      nodes_[v].fail = target >= 0 ? target : 0;
      std::int32_t fn = nodes_[v].fail;
      nodes_[v].dict_link = nodes_[fn].pattern >= 0 ? fn : nodes_[fn].dict_link;
      bfs.push(v);
    }
  }
}

std::int32_t AhoCorasick::child(std::int32_t node, std::uint8_t byte) const {
  const auto& edges = nodes_[node].edges;
  auto it = std::lower_bound(edges.begin(), edges.end(), byte,
                             [](const auto& e, std::uint8_t v) { return e.first < v; });
  return (it != edges.end() && it->first == byte) ? it->second : -1;
}

std::vector<AhoCorasick::Occurrence> AhoCorasick::find_all(std::string_view text) const {
  std::vector<Occurrence> out;
  if (nodes_.empty()) return out;
  std::int32_t state = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto b = static_cast<std::uint8_t>(text[i]);
    while (true) {
      std::int32_t next = child(state, b);
      if (next >= 0) {
        state = next;
        break;
      }
      if (state == 0) break;
      state = nodes_[state].fail;
    }
    for (std::int32_t n = nodes_[state].pattern >= 0 ? state : nodes_[state].dict_link; n > 0;
         n = nodes_[n].dict_link) {
      auto p = static_cast<std::size_t>(nodes_[n].pattern);
      out.push_back({i + 1 - lengths_[p], p});
    }
  }
  return out;
}

}  // namespace proswitch
