#include "trt/query/model.hpp"

#include <algorithm>
#include <cctype>

#include "trt/error.hpp"

namespace trt::query {

std::string to_string(const Term& t) {
  if (t.kind == Term::Kind::literal) return "\"" + t.text + "\"";
  return t.text;
}

std::string to_string(const BindTarget& b) { return b.series + "." + (b.is_time() ? "@time" : b.column); }

const BindTarget* ModelMapping::binding(const Term& node) const {
  const auto it = bindings.find(node);
  return it == bindings.end() ? nullptr : &it->second;
}

bool ModelMapping::mentions(const Term& node) const {
  return std::any_of(triples.begin(), triples.end(), [&](const Triple& t) {
    return t.subject == node || t.predicate == node || t.object == node;
  });
}

namespace {

struct LineLexer {
  std::string_view line;
  std::size_t lineno;
  std::size_t pos = 0;

  [[noreturn]] void error(const std::string& msg) const { throw ParseError(lineno, pos + 1, msg); }

  void skip_space() {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
  }
  bool at_end() {
    skip_space();
    return pos >= line.size() || line[pos] == '#';
  }
  // Returns the raw token: <...>, "..." (with any ^^type or @lang suffix) or a bare word.
  std::string_view token() {
    skip_space();
    const auto start = pos;
    if (pos >= line.size()) error("unexpected end of line");
    if (line[pos] == '<') {
      const auto close = line.find('>', pos);
      if (close == std::string_view::npos) error("unterminated <iri>");
      pos = close + 1;
    } else if (line[pos] == '"') {
      ++pos;
      while (pos < line.size() && line[pos] != '"') pos += line[pos] == '\\' ? 2 : 1;
      if (pos >= line.size()) error("unterminated literal");
      ++pos;
      while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    } else {
      while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    }
    return line.substr(start, pos - start);
  }
};

std::string unescape(std::string_view body) {
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] == '\\' && i + 1 < body.size()) {
      const char c = body[++i];
      out += c == 'n' ? '\n' : (c == 't' ? '\t' : c);
    } else {
      out += body[i];
    }
  }
  return out;
}

}  // namespace

ModelMapping map_load(std::string_view text, std::string name) {
  ModelMapping m;
  m.name = std::move(name);
  std::map<std::string, std::string, std::less<>> prefixes;
  std::vector<std::pair<std::size_t, Term>> bound_nodes;

  auto make_term = [&](LineLexer& lx, std::string_view tok) -> Term {
    if (tok.front() == '<') return Term::iri(std::string(tok.substr(1, tok.size() - 2)));
    if (tok.front() == '"') {
      const auto close = tok.rfind('"');
      return Term::literal(unescape(tok.substr(1, close - 1)));
    }
    const auto colon = tok.find(':');
    if (colon != std::string_view::npos) {
      const auto it = prefixes.find(tok.substr(0, colon));
      if (it != prefixes.end()) return Term::iri(it->second + std::string(tok.substr(colon + 1)));
    }
    if (tok.front() == '?' || tok.front() == '$') lx.error("variables are not allowed in a mapping");
    return Term::iri(std::string(tok));
  };

  std::size_t lineno = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++lineno;
    begin = end + 1;
    LineLexer lx{line, lineno};
    if (lx.at_end()) {
      if (end == text.size()) break;
      continue;
    }
    const auto first = lx.token();
    if (first == "@prefix") {
      auto p = lx.token();
      if (p.empty() || p.back() != ':') lx.error("expected prefix name ending in ':'");
      const auto iri = lx.token();
      if (iri.front() != '<') lx.error("expected <iri> after prefix");
      prefixes[std::string(p.substr(0, p.size() - 1))] = std::string(iri.substr(1, iri.size() - 2));
    } else if (first == "@name") {
      m.name = std::string(lx.token());
    } else if (first == "@bind") {
      const auto node = make_term(lx, lx.token());
      const auto target = lx.token();
      const auto dot = target.rfind('.');
      if (dot == std::string_view::npos || dot == 0 || dot + 1 == target.size()) {
        lx.error("expected <series>.<column> or <series>.@time");
      }
      BindTarget b{std::string(target.substr(0, dot)), std::string(target.substr(dot + 1))};
      if (b.column == "@time") b.column.clear();
      if (m.bindings.count(node) != 0 && m.bindings[node] != b) lx.error("node " + to_string(node) + " bound twice");
      m.bindings[node] = b;
      bound_nodes.emplace_back(lineno, node);
    } else if (first.front() == '@') {
      lx.error("unknown directive " + std::string(first));
    } else {
      Triple t;
      t.subject = make_term(lx, first);
      const auto verb = lx.token();
      t.predicate = verb == "a" ? Term::iri(std::string(rdf_type)) : make_term(lx, verb);
      t.object = make_term(lx, lx.token());
      if (t.subject.kind == Term::Kind::literal || t.predicate.kind == Term::Kind::literal) {
        lx.error("only the object of a triple may be a literal");
      }
      m.triples.push_back(std::move(t));
    }
    if (!lx.at_end()) lx.error("unexpected trailing text");
    if (end == text.size()) break;
  }
  std::sort(m.triples.begin(), m.triples.end());
  m.triples.erase(std::unique(m.triples.begin(), m.triples.end()), m.triples.end());
  for (const auto& [line, node] : bound_nodes) {
    if (!m.mentions(node)) throw ParseError(line, 1, "binding for " + to_string(node) + " names no model node");
  }
  return m;
}

void MappingSet::add(ModelMapping mapping) {
  if (mappings_.count(mapping.name) != 0) fail(Errc::already_exists, "mapping '" + mapping.name + "' already loaded");
  for (const auto& [node, target] : mapping.bindings) {
    const auto* other = merged_.binding(node);
    if (other != nullptr && *other != target) {
      fail(Errc::contract_violation, "node " + to_string(node) + " is bound to both " + to_string(*other) + " and " +
                                         to_string(target));
    }
  }
  for (const auto& t : mapping.triples) merged_.triples.push_back(t);
  std::sort(merged_.triples.begin(), merged_.triples.end());
  merged_.triples.erase(std::unique(merged_.triples.begin(), merged_.triples.end()), merged_.triples.end());
  for (const auto& [node, target] : mapping.bindings) merged_.bindings[node] = target;
  auto name = mapping.name;
  mappings_.emplace(std::move(name), std::move(mapping));
}

const ModelMapping& MappingSet::get(std::string_view name) const {
  const auto it = mappings_.find(name);
  if (it == mappings_.end()) fail(Errc::not_found, "no mapping named '" + std::string(name) + "'");
  return it->second;
}

bool MappingSet::contains(std::string_view name) const { return mappings_.find(name) != mappings_.end(); }

std::vector<std::string> MappingSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, m] : mappings_) out.push_back(name);
  return out;
}

}  // namespace trt::query
