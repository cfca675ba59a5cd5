#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace proswitch {

// Byte-level Aho-Corasick automaton. Children are kept in sorted edge lists so
// memory stays proportional to the trie size for large lexicons.
class AhoCorasick {
 public:
  struct Occurrence {
    std::size_t begin;
    std::size_t pattern;  // index into the construction vector
  };

  AhoCorasick() = default;
  explicit AhoCorasick(const std::vector<std::string>& patterns);

  std::size_t pattern_count() const { return lengths_.size(); }
  std::size_t node_count() const { return nodes_.size(); }

  // Every occurrence of every pattern, including overlapping ones, in order of
  // end position.
  std::vector<Occurrence> find_all(std::string_view text) const;

 private:
  struct Node {
    std::vector<std::pair<std::uint8_t, std::int32_t>> edges;  // sorted by byte
    std::int32_t fail = 0;
    std::int32_t dict_link = -1;  // nearest proper suffix node that ends a pattern
    std::int32_t pattern = -1;    // pattern ending exactly here
  };

  std::int32_t child(std::int32_t node, std::uint8_t byte) const;

  std::vector<Node> nodes_;
  std::vector<std::size_t> lengths_;
};

}  // namespace proswitch
