#include "proswitch/xml_reader.hpp"

#include <cstdint>

#include "proswitch/errors.hpp"

namespace proswitch::xml {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':' || u >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool all_space(std::string_view s) {
  for (char c : s)
    if (!is_space(c)) return false;
  return true;
}

}  // namespace

Reader::Reader(std::string_view document) : doc_(document) {
  if (doc_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
}

bool Reader::starts_with(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }

void Reader::advance(std::size_t n) {
  for (std::size_t i = 0; i < n && pos_ < doc_.size(); ++i, ++pos_)
    if (doc_[pos_] == '\n') ++line_;
}

void Reader::fail(const std::string& message) const { throw ParseError(line_, message); }

void Reader::skip_until(std::string_view terminator, std::string_view what) {
  auto found = doc_.find(terminator, pos_);
  if (found == std::string_view::npos) fail("unterminated " + std::string(what));
  advance(found + terminator.size() - pos_);
}

void Reader::skip_whitespace() {
  while (!at_end() && is_space(doc_[pos_])) advance(1);
}

void Reader::skip_doctype() {
  // Positioned at "<!DOCTYPE". Skips to the closing '>' outside quotes and the
  // optional bracketed internal subset.
  advance(9);
  int bracket = 0;
  char quote = 0;
  while (!at_end()) {
    char c = doc_[pos_];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '[') {
      ++bracket;
    } else if (c == ']') {
      --bracket;
    } else if (c == '>' && bracket == 0) {
      advance(1);
      return;
    }
    advance(1);
  }
  fail("unterminated DOCTYPE declaration");
}

std::string Reader::read_name() {
  if (at_end() || !is_name_start(doc_[pos_])) fail("expected a name");
  std::size_t start = pos_;
  while (!at_end() && is_name_char(doc_[pos_])) advance(1);
  return std::string(doc_.substr(start, pos_ - start));
}

std::string Reader::decode(std::string_view raw, std::size_t line) const {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c == '\n') ++line;
    if (c != '&') {
      out.push_back(c);
      continue;
    }
    auto semi = raw.find(';', i);
    if (semi == std::string_view::npos || semi - i > 12)
      throw ParseError(line, "unterminated character reference");
    std::string_view ent = raw.substr(i + 1, semi - i - 1);
    if (ent == "amp") out.push_back('&');
    else if (ent == "lt") out.push_back('<');
    else if (ent == "gt") out.push_back('>');
    else if (ent == "quot") out.push_back('"');
    else if (ent == "apos") out.push_back('\'');
    else if (ent.size() > 1 && ent[0] == '#') {
      bool hex = ent[1] == 'x' || ent[1] == 'X';
      std::string_view digits = ent.substr(hex ? 2 : 1);
      if (digits.empty()) throw ParseError(line, "empty numeric character reference");
      std::uint32_t cp = 0;
      for (char d : digits) {
        int v;
        if (d >= '0' && d <= '9') v = d - '0';
        else if (hex && d >= 'a' && d <= 'f') v = d - 'a' + 10;
        else if (hex && d >= 'A' && d <= 'F') v = d - 'A' + 10;
        else throw ParseError(line, "bad numeric character reference &" + std::string(ent) + ";");
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        if (cp > 0x10FFFF) throw ParseError(line, "character reference out of range");
      }
      if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF))
        throw ParseError(line, "invalid character reference");
      append_utf8(out, cp);
    } else {
      throw ParseError(line, "unknown entity &" + std::string(ent) + ";");
    }
    i = semi;
  }
  return out;
}

std::optional<Event> Reader::next() {
  if (pending_close_) {
    Event ev{Event::Kind::end_element, std::move(*pending_close_), {}, line_};
    pending_close_.reset();
    open_.pop_back();
    if (open_.empty()) root_closed_ = true;
    return ev;
  }

  while (!at_end()) {
    const std::size_t line = line_;
    if (doc_[pos_] != '<') {
      std::size_t start = pos_;
      auto lt = doc_.find('<', pos_);
      if (lt == std::string_view::npos) lt = doc_.size();
      advance(lt - pos_);
      std::string_view raw = doc_.substr(start, lt - start);
      if (open_.empty()) {
        if (!all_space(raw)) throw ParseError(line, "character data outside the root element");
        continue;
      }
      return Event{Event::Kind::text, {}, decode(raw, line), line};
    }

    if (starts_with("<?")) {
      skip_until("?>", "processing instruction");
      continue;
    }
    if (starts_with("<!--")) {
      skip_until("-->", "comment");
      continue;
    }
    if (starts_with("<![CDATA[")) {
      if (open_.empty()) fail("CDATA section outside the root element");
      advance(9);
      std::size_t start = pos_;
      skip_until("]]>", "CDATA section");
      return Event{Event::Kind::text, {}, std::string(doc_.substr(start, pos_ - 3 - start)), line};
    }
    if (starts_with("<!DOCTYPE")) {
      if (root_seen_) fail("DOCTYPE after the root element");
      skip_doctype();
      continue;
    }
    if (starts_with("</")) {
      advance(2);
      std::string name = read_name();
      skip_whitespace();
      if (at_end() || doc_[pos_] != '>') fail("expected '>' after </" + name);
      advance(1);
      if (open_.empty()) fail("unexpected closing tag </" + name + ">");
      if (open_.back() != name)
        fail("mismatched closing tag </" + name + ">, expected </" + open_.back() + ">");
      open_.pop_back();
      if (open_.empty()) root_closed_ = true;
      return Event{Event::Kind::end_element, std::move(name), {}, line};
    }

    advance(1);
    std::string name = read_name();
    if (open_.empty() && root_closed_) fail("content after the root element <" + name + ">");
    bool self_closing = false;
    while (true) {
      bool had_space = !at_end() && is_space(doc_[pos_]);
      skip_whitespace();
      if (at_end()) fail("unterminated start tag <" + name + ">");
      if (starts_with("/>")) {
        advance(2);
        self_closing = true;
        break;
      }
      if (doc_[pos_] == '>') {
        advance(1);
        break;
      }
      if (!had_space) fail("expected whitespace between attributes in <" + name + ">");
      std::string attr = read_name();
      skip_whitespace();
      if (at_end() || doc_[pos_] != '=') fail("expected '=' after attribute " + attr);
      advance(1);
      skip_whitespace();
      if (at_end() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) fail("expected quoted value for " + attr);
      char quote = doc_[pos_];
      advance(1);
      std::size_t vstart = pos_;
      const std::size_t vline = line_;
      auto vend = doc_.find(quote, pos_);
      if (vend == std::string_view::npos) fail("unterminated attribute value for " + attr);
      std::string_view value = doc_.substr(vstart, vend - vstart);
      if (value.find('<') != std::string_view::npos) fail("'<' in attribute value of " + attr);
      decode(value, vline);
      advance(vend + 1 - pos_);
    }
    root_seen_ = true;
    open_.push_back(name);
    if (self_closing) pending_close_ = name;
    return Event{Event::Kind::start_element, std::move(name), {}, line};
  }

  if (!open_.empty()) fail("unexpected end of document: <" + open_.back() + "> is not closed");
  if (!root_seen_) fail("document has no root element");
  return std::nullopt;
}

}  // namespace proswitch::xml
