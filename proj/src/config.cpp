#include "proswitch/config.hpp"

#include "proswitch/errors.hpp"
#include "proswitch/text.hpp"

namespace proswitch {

std::map<std::string, std::string> parse_key_value(std::string_view contents) {
  std::map<std::string, std::string> out;
  std::size_t start = 0, line_no = 0;
  while (start < contents.size()) {
    auto nl = contents.find('\n', start);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string line = text::trim(contents.substr(start, nl - start));
    start = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    std::string key = text::trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ParseError(line_no, "empty key");
    out[key] = text::trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> load_key_value(const std::filesystem::path& path) {
  return parse_key_value(text::read_file(path));
}

}  // namespace proswitch
