#include "proswitch/lexicon.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "proswitch/aho_corasick.hpp"
#include "proswitch/errors.hpp"
#include "proswitch/text.hpp"
#include "proswitch/xml_reader.hpp"

namespace proswitch {
namespace {

constexpr std::string_view kCacheMagic = "#proswitch-lexicon 1";

struct Candidate {
  std::size_t begin;
  std::size_t length;
  std::size_t term;
};

}  // namespace

struct TermLexicon::Impl {
  std::string domain_id;
  std::string digest;
  std::vector<std::string> terms;
  AhoCorasick matcher;
};

LexiconFormat parse_lexicon_format(std::string_view s) {
  if (s == "mesh-xml") return LexiconFormat::mesh_xml;
  if (s == "plain-list") return LexiconFormat::plain_list;
  throw Error(ErrorKind::input, "unknown lexicon format '" + std::string(s) + "'");
}

TermLexicon::TermLexicon(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

TermLexicon TermLexicon::from_terms(std::string domain_id, const std::vector<std::string>& terms,
                                    std::string source_digest) {
  std::vector<std::string> normalized;
  normalized.reserve(terms.size());
  for (const auto& t : terms) {
    std::string n = text::normalize_term(t);
    if (!n.empty()) normalized.push_back(std::move(n));
  }
  std::sort(normalized.begin(), normalized.end());
  normalized.erase(std::unique(normalized.begin(), normalized.end()), normalized.end());
  if (normalized.empty()) throw Error(ErrorKind::empty_lexicon, "lexicon has no terms");

  auto impl = std::make_shared<Impl>();
  impl->domain_id = std::move(domain_id);
  impl->digest = std::move(source_digest);
  impl->matcher = AhoCorasick(normalized);
  impl->terms = std::move(normalized);
  return TermLexicon(std::move(impl));
}

const std::string& TermLexicon::domain_id() const { return impl_->domain_id; }
const std::vector<std::string>& TermLexicon::terms() const { return impl_->terms; }
const std::string& TermLexicon::source_digest() const { return impl_->digest; }

bool TermLexicon::contains(std::string_view normalized_term) const {
  return std::binary_search(impl_->terms.begin(), impl_->terms.end(), normalized_term);
}

TermMatchResult TermLexicon::match(std::string_view raw_text) const {
  TermMatchResult result;
  if (raw_text.empty()) return result;
  const std::string normalized = text::normalize_for_matching(raw_text);
  const std::string_view s = normalized;

  std::vector<Candidate> candidates;
  for (const auto& occ : impl_->matcher.find_all(s)) {
    std::size_t len = impl_->terms[occ.pattern].size();
    if (text::word_char_before(s, occ.begin) || text::word_char_at(s, occ.begin + len)) continue;
    candidates.push_back({occ.begin, len, occ.pattern});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.length != b.length) return a.length > b.length;
    return a.begin < b.begin;
  });

  std::map<std::size_t, Candidate> chosen;  // keyed by begin
  for (const auto& c : candidates) {
    auto next = chosen.lower_bound(c.begin);
    if (next != chosen.end() && next->first < c.begin + c.length) continue;
    if (next != chosen.begin()) {
      auto prev = std::prev(next);
      if (prev->first + prev->second.length > c.begin) continue;
    }
    chosen.emplace(c.begin, c);
  }
  result.hits.reserve(chosen.size());
  for (const auto& [begin, c] : chosen) result.hits.push_back({impl_->terms[c.term], begin});
  return result;
}

std::string TermLexicon::serialize() const {
  std::ostringstream out;
  out << kCacheMagic << '\n';
  out << "domain\t" << impl_->domain_id << '\n';
  out << "digest\t" << impl_->digest << '\n';
  out << "terms\t" << impl_->terms.size() << '\n';
  for (const auto& t : impl_->terms) out << t << '\n';
  return out.str();
}

TermLexicon TermLexicon::deserialize(std::string_view contents) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < contents.size()) {
    auto nl = contents.find('\n', start);
    if (nl == std::string_view::npos) nl = contents.size();
    lines.emplace_back(contents.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.size() < 4 || lines[0] != kCacheMagic)
    throw ParseError(1, "not a lexicon cache file (missing '" + std::string(kCacheMagic) + "')");
  auto field = [&](std::size_t idx, std::string_view key) {
    const std::string& l = lines[idx];
    if (l.rfind(std::string(key) + "\t", 0) != 0)
      throw ParseError(idx + 1, "expected '" + std::string(key) + "' header");
    return l.substr(key.size() + 1);
  };
  std::string domain = field(1, "domain");
  std::string digest = field(2, "digest");
  std::size_t count = 0;
  try {
    count = std::stoul(field(3, "terms"));
  } catch (const std::logic_error&) {
    throw ParseError(4, "bad term count");
  }
  std::vector<std::string> terms(lines.begin() + 4, lines.end());
  if (terms.size() != count)
    throw ParseError(4, "term count " + std::to_string(count) + " does not match " +
                            std::to_string(terms.size()) + " stored terms");
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (text::normalize_term(terms[i]) != terms[i])
      throw ParseError(i + 5, "term is not normalized: '" + terms[i] + "'");
  return from_terms(std::move(domain), terms, std::move(digest));
}

void TermLexicon::save(const std::filesystem::path& path) const {
  text::write_file_atomic(path, serialize());
}

TermLexicon TermLexicon::load(const std::filesystem::path& path) {
  return deserialize(text::read_file(path));
}

std::vector<std::string> extract_qualifier_names(std::string_view xml_document) {
  std::vector<std::string> names;
  xml::Reader reader(xml_document);
  int depth = 0;  // nesting inside QualifierName
  std::string current;
  while (auto ev = reader.next()) {
    switch (ev->kind) {
      case xml::Event::Kind::start_element:
        if (ev->name == "QualifierName") {
          if (depth == 0) current.clear();
          ++depth;
        } else if (depth > 0) {
          current.push_back(' ');
        }
        break;
      case xml::Event::Kind::end_element:
        if (ev->name == "QualifierName" && --depth == 0) names.push_back(text::collapse_whitespace(current));
        else if (depth > 0) current.push_back(' ');
        break;
      case xml::Event::Kind::text:
        if (depth > 0) current += ev->text;
        break;
    }
  }
  return names;
}

TermLexicon build_lexicon_from_bytes(std::string_view bytes, LexiconFormat format,
                                     std::string domain_id) {
  std::vector<std::string> raw;
  if (format == LexiconFormat::mesh_xml) {
    raw = extract_qualifier_names(bytes);
  } else {
    std::size_t start = 0;
    while (start <= bytes.size()) {
      auto nl = bytes.find('\n', start);
      if (nl == std::string_view::npos) nl = bytes.size();
      raw.emplace_back(bytes.substr(start, nl - start));
      start = nl + 1;
    }
  }
  return TermLexicon::from_terms(std::move(domain_id), raw, text::sha256_hex(bytes));
}

TermLexicon build_lexicon(const std::filesystem::path& source, LexiconFormat format,
                          std::string domain_id) {
  return build_lexicon_from_bytes(text::read_file(source), format, std::move(domain_id));
}

}  // namespace proswitch
