#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace proswitch::xml {

struct Event {
  enum class Kind { start_element, end_element, text };
  Kind kind;
  std::string name;  // element name for start/end
  std::string text;  // decoded character data (entities and CDATA resolved)
  std::size_t line;  // 1-based line where the event begins
};

// Streaming pull reader over an in-memory XML document. Supports the subset
// found in terminology dumps: prolog, DOCTYPE (internal subset skipped),
// comments, processing instructions, CDATA, attributes and the predefined and
// numeric character references. Well-formedness violations throw ParseError
// carrying the offending line.
class Reader {
 public:
  explicit Reader(std::string_view document);

  std::optional<Event> next();

 private:
  bool at_end() const { return pos_ >= doc_.size(); }
  bool starts_with(std::string_view s) const;
  void advance(std::size_t n);
  void skip_until(std::string_view terminator, std::string_view what);
  void skip_whitespace();
  void skip_doctype();
  std::string read_name();
  std::string decode(std::string_view raw, std::size_t line) const;
  [[noreturn]] void fail(const std::string& message) const;

  std::string_view doc_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::vector<std::string> open_;
  std::optional<std::string> pending_close_;
  bool root_seen_ = false;
  bool root_closed_ = false;
};

}  // namespace proswitch::xml
