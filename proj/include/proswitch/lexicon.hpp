#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace proswitch {

enum class LexiconFormat { mesh_xml, plain_list };

LexiconFormat parse_lexicon_format(std::string_view s);

struct TermHit {
  std::string term;
  std::size_t offset;  // byte offset into the normalized text

  friend bool operator==(const TermHit&, const TermHit&) = default;
};

struct TermMatchResult {
  std::vector<TermHit> hits;  // sorted by offset, non-overlapping

  std::size_t hit_count() const { return hits.size(); }
};

// Immutable set of normalized domain terms with a compiled matcher. Copies
// share the same underlying automaton, so a lexicon can be handed to any
// number of evaluation threads.
class TermLexicon {
 public:
  // Terms are normalized and deduplicated; blanks are dropped.
  // Throws Error(empty_lexicon) when nothing remains.
  static TermLexicon from_terms(std::string domain_id, const std::vector<std::string>& terms,
                                std::string source_digest);

  const std::string& domain_id() const;
  const std::vector<std::string>& terms() const;  // sorted
  const std::string& source_digest() const;
  std::size_t size() const { return terms().size(); }
  bool contains(std::string_view normalized_term) const;

  // Case-insensitive, word-boundary aligned, non-overlapping occurrences.
  // Overlaps resolve longest match first, then leftmost.
  TermMatchResult match(std::string_view text) const;

  // Line format, see README ("Lexicon cache file").
  void save(const std::filesystem::path& path) const;
  static TermLexicon load(const std::filesystem::path& path);
  std::string serialize() const;
  static TermLexicon deserialize(std::string_view contents);

 private:
  struct Impl;
  explicit TermLexicon(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

// Every QualifierName element's text content (nested markup flattened).
std::vector<std::string> extract_qualifier_names(std::string_view xml_document);

TermLexicon build_lexicon(const std::filesystem::path& source, LexiconFormat format,
                          std::string domain_id = "default");
TermLexicon build_lexicon_from_bytes(std::string_view bytes, LexiconFormat format,
                                     std::string domain_id = "default");

inline TermMatchResult match_terms(const TermLexicon& lexicon, std::string_view text) {
  return lexicon.match(text);
}

}  // namespace proswitch
