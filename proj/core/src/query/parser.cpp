#include "trt/query/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>

#include "trt/error.hpp"
#include "trt/timefmt.hpp"

namespace trt::query {

namespace {

enum class Tok : std::uint8_t { end, iri, word, var, string, integer, decimal, duration, punct };

struct Token {
  Tok kind = Tok::end;
  std::string text;      // iri body, word, variable name, string body, number text or punctuation
  std::string datatype;  // for strings with ^^type
  std::int64_t nanoseconds = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip();
      Token t;
      t.line = line_;
      t.column = pos_ - line_start_ + 1;
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      lex(t);
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void error(const std::string& msg) const { throw ParseError(line_, pos_ - line_start_ + 1, msg); }

  char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++pos_;
        ++line_;
        line_start_ = pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        return;
      }
    }
  }

  void lex(Token& t) {
    const char c = peek();
    // Inside parentheses '<' is always less-than: expressions hold no IRIs.
    if (c == '<' && depth_ == 0 && looks_like_iri()) {
      const auto close = text_.find('>', pos_);
      t.kind = Tok::iri;
      t.text = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
      pos_ = close + 1;
    } else if ((c == '?' || c == '$') && (std::isalnum(static_cast<unsigned char>(peek(1))) || peek(1) == '_')) {
      ++pos_;
      const auto start = pos_;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
      t.kind = Tok::var;
      t.text = std::string(text_.substr(start, pos_ - start));
    } else if (c == '"' || c == '\'') {
      lex_string(t, c);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      lex_number(t);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':') {
      const auto start = pos_;
      while (name_char(peek()) || (peek() == '.' && name_char(peek(1)) && peek(1) != ':')) ++pos_;
      t.kind = Tok::word;
      t.text = std::string(text_.substr(start, pos_ - start));
    } else {
      static const char* two[] = {"&&", "||", "!=", "<=", ">=", "^^"};
      t.kind = Tok::punct;
      for (const char* op : two) {
        if (c == op[0] && peek(1) == op[1]) {
          t.text = op;
          pos_ += 2;
          return;
        }
      }
      if (std::string_view("{}().;,*=<>!+-/^|?[]@").find(c) == std::string_view::npos) {
        error(std::string("unexpected character '") + c + "'");
      }
      t.text = std::string(1, c);
      ++pos_;
      if (c == '(') ++depth_;
      if (c == ')' && depth_ > 0) --depth_;
    }
  }

  // `<` starts an IRI when a '>' follows before any whitespace.
  bool looks_like_iri() const {
    for (std::size_t i = pos_ + 1; i < text_.size(); ++i) {
      if (text_[i] == '>') return i > pos_ + 1;
      if (std::isspace(static_cast<unsigned char>(text_[i])) ||
          std::string_view("<\"{}|^`\\").find(text_[i]) != std::string_view::npos) {
        return false;
      }
    }
    return false;
  }

  void lex_string(Token& t, char quote) {
    ++pos_;
    std::string body;
    for (;;) {
      if (pos_ >= text_.size() || peek() == '\n') throw ParseError(t.line, t.column, "unterminated string");
      const char c = text_[pos_++];
      if (c == quote) break;
      if (c == '\\') {
        const char e = peek();
        ++pos_;
        body += e == 'n' ? '\n' : (e == 't' ? '\t' : e);
      } else {
        body += c;
      }
    }
    t.kind = Tok::string;
    t.text = std::move(body);
    if (peek() == '^' && peek(1) == '^') {
      pos_ += 2;
      if (peek() == '<') {
        const auto close = text_.find('>', pos_);
        if (close == std::string_view::npos) error("unterminated datatype IRI");
        t.datatype = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
        pos_ = close + 1;
      } else {
        const auto start = pos_;
        while (name_char(peek())) ++pos_;
        if (start == pos_) error("expected a datatype after ^^");
        t.datatype = std::string(text_.substr(start, pos_ - start));
      }
    } else if (peek() == '@') {
      ++pos_;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-') ++pos_;
    }
  }

  void lex_number(Token& t) {
    const auto start = pos_;
    bool decimal = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      decimal = true;
      ++pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      decimal = true;
      pos_ += 2;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    t.text = std::string(text_.substr(start, pos_ - start));
    t.kind = decimal ? Tok::decimal : Tok::integer;
    if (decimal || !std::isalpha(static_cast<unsigned char>(peek()))) return;

    const auto unit_start = pos_;
    while (std::isalpha(static_cast<unsigned char>(peek()))) ++pos_;
    const auto unit = text_.substr(unit_start, pos_ - unit_start);
    static const std::map<std::string_view, std::int64_t> units = {
        {"ms", 1'000'000},          {"s", 1'000'000'000},         {"m", 60'000'000'000},
        {"h", 3'600'000'000'000},   {"d", 86'400'000'000'000},    {"w", 604'800'000'000'000}};
    const auto it = units.find(unit);
    if (it == units.end()) error("unknown duration unit '" + std::string(unit) + "'");
    std::int64_t count = 0;
    std::from_chars(t.text.data(), t.text.data() + t.text.size(), count);
    if (__builtin_mul_overflow(count, it->second, &t.nanoseconds)) error("duration is too long");
    t.kind = Tok::duration;
    t.text += std::string(unit);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
  std::size_t depth_ = 0;
};

bool is_aggregate_name(const std::string& upper_name) {
  return upper_name == "COUNT" || upper_name == "SUM" || upper_name == "AVG" || upper_name == "MIN" ||
         upper_name == "MAX" || upper_name == "SAMPLE" || upper_name == "GROUP_CONCAT";
}

AggOp aggregate_op(const std::string& upper_name) {
  if (upper_name == "COUNT") return AggOp::count;
  if (upper_name == "SUM") return AggOp::sum;
  if (upper_name == "AVG") return AggOp::avg;
  if (upper_name == "MIN") return AggOp::min;
  if (upper_name == "MAX") return AggOp::max;
  if (upper_name == "SAMPLE") return AggOp::sample;
  return AggOp::group_concat;
}

// Aggregates met while parsing SELECT expressions.
struct AggregateSink {
  std::vector<AggSpec> specs;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  OpPtr query() {
    prologue();
    if (keyword("CONSTRUCT") || keyword("ASK") || keyword("DESCRIBE")) {
      unsupported(cur(), upper(cur().text) + " queries");
    }
    if (!keyword("SELECT")) error(cur(), "expected SELECT");
    next();

    bool distinct = false;
    if (keyword("DISTINCT") || keyword("REDUCED")) {
      distinct = true;
      next();
    }

    // Select items: plain variables, or expressions with a target variable.
    struct Item {
      std::string var;
      ExprPtr expr;
      Token at;
    };
    std::vector<Item> items;
    bool star = false;
    AggregateSink sink;
    if (punct("*")) {
      star = true;
      next();
    } else {
      while (cur().kind == Tok::var || punct("(")) {
        Item item;
        item.at = cur();
        if (cur().kind == Tok::var) {
          item.var = next().text;
        } else {
          next();
          item.expr = expression(&sink);
          expect_keyword("AS");
          item.var = expect_var();
          expect(")");
        }
        items.push_back(std::move(item));
      }
      if (items.empty()) error(cur(), "expected '*', a variable or '(' in SELECT");
    }

    if (keyword("FROM")) unsupported(cur(), "FROM");
    if (keyword("WHERE")) next();
    OpPtr plan = group_pattern();

    // GROUP BY
    std::vector<GroupKey> keys;
    bool grouped = false;
    if (keyword("GROUP")) {
      next();
      expect_keyword("BY");
      grouped = true;
      do {
        keys.push_back(group_key(plan));
      } while (cur().kind == Tok::var || punct("(") ||
               (cur().kind == Tok::word && !keyword("ORDER") && !keyword("LIMIT") && !keyword("OFFSET") &&
                !keyword("HAVING") && !keyword("VALUES")));
    }
    if (keyword("HAVING")) unsupported(cur(), "HAVING");

    // ORDER BY
    std::vector<SortKey> order;
    if (keyword("ORDER")) {
      next();
      expect_keyword("BY");
      do {
        SortKey k;
        if (keyword("ASC") || keyword("DESC")) {
          k.descending = keyword("DESC");
          next();
          expect("(");
          k.column = expect_var();
          expect(")");
        } else if (cur().kind == Tok::var) {
          k.column = next().text;
        } else {
          error(cur(), "expected a variable, ASC(...) or DESC(...) in ORDER BY");
        }
        order.push_back(std::move(k));
      } while (cur().kind == Tok::var || keyword("ASC") || keyword("DESC"));
    }

    std::int64_t offset = 0;
    std::optional<std::int64_t> fetch;
    bool any_slice = false;
    for (;;) {
      if (keyword("LIMIT")) {
        next();
        fetch = expect_integer();
        any_slice = true;
      } else if (keyword("OFFSET")) {
        next();
        offset = expect_integer();
        any_slice = true;
      } else {
        break;
      }
    }
    if (keyword("VALUES")) unsupported(cur(), "VALUES");
    if (cur().kind != Tok::end) error(cur(), "unexpected '" + cur().text + "' after the query");

    // Aggregation: every selected expression either is one aggregate, or is
    // computed after aggregation from aggregate results and group keys.
    const bool aggregated = grouped || !sink.specs.empty();
    std::vector<std::pair<std::string, ExprPtr>> extends;
    if (aggregated) {
      if (star) error(items.empty() ? cur() : items[0].at, "SELECT * cannot be used with aggregates");
      std::set<std::string> scope;
      for (const auto& k : keys) scope.insert(k.column);
      std::vector<AggSpec> specs;
      for (auto& item : items) {
        if (!item.expr) {
          if (scope.count(item.var) == 0) {
            error(item.at, "?" + item.var + " is neither grouped nor aggregated");
          }
          continue;
        }
        // A bare aggregate is named by its target directly.
        if (item.expr->kind == Expr::Kind::variable && item.expr->name.rfind(".agg", 0) == 0) {
          const auto idx = std::stoul(item.expr->name.substr(4));
          auto spec = sink.specs[idx];
          spec.as = item.var;
          rename_[item.expr->name] = item.var;
          specs.push_back(std::move(spec));
          scope.insert(item.var);
          continue;
        }
        std::set<std::string> used;
        collect_variables(*item.expr, used);
        for (const auto& v : used) {
          if (v.rfind(".agg", 0) != 0 && scope.count(v) == 0) {
            error(item.at, "?" + v + " is neither grouped nor aggregated");
          }
        }
        extends.emplace_back(item.var, item.expr);
        scope.insert(item.var);
      }
      // Aggregates used inside larger expressions keep their internal names.
      for (std::size_t i = 0; i < sink.specs.size(); ++i) {
        const auto name = ".agg" + std::to_string(i);
        if (rename_.count(name) != 0) continue;
        auto spec = sink.specs[i];
        spec.as = name;
        specs.push_back(std::move(spec));
      }
      for (auto& [var, expr] : extends) expr = renamed(expr);
      plan = op_aggregate(plan, std::move(keys), std::move(specs));
    } else {
      for (const auto& item : items) {
        if (item.expr) extends.emplace_back(item.var, item.expr);
      }
    }
    for (const auto& [var, expr] : extends) plan = op_extend(plan, var, expr);
    if (!order.empty()) plan = op_sort(plan, std::move(order));
    if (!star) {
      std::vector<std::string> columns;
      for (const auto& item : items) columns.push_back(item.var);
      plan = op_project(plan, columns);
    }
    if (distinct) plan = op_distinct(plan);
    if (any_slice) plan = op_limit(plan, offset, fetch);
    return plan;
  }

 private:
  // ---- token helpers ----

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek_token(std::size_t ahead = 1) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool punct(std::string_view p) const { return cur().kind == Tok::punct && cur().text == p; }
  bool keyword(std::string_view k) const { return cur().kind == Tok::word && upper(cur().text) == k; }

  [[noreturn]] static void error(const Token& at, const std::string& msg) { throw ParseError(at.line, at.column, msg); }
  [[noreturn]] static void unsupported(const Token& at, const std::string& what) {
    fail(Errc::unsupported_feature, "line " + std::to_string(at.line) + ", column " + std::to_string(at.column) +
                                        ": " + what + " is not supported");
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::end: return "end of query";
      case Tok::var: return "?" + t.text;
      case Tok::iri: return "<" + t.text + ">";
      case Tok::string: return "\"" + t.text + "\"";
      default: return "'" + t.text + "'";
    }
  }

  void expect(std::string_view p) {
    if (!punct(p)) error(cur(), "expected '" + std::string(p) + "', found " + describe(cur()));
    next();
  }
  void expect_keyword(std::string_view k) {
    if (!keyword(k)) error(cur(), "expected " + std::string(k) + ", found " + describe(cur()));
    next();
  }
  std::string expect_var() {
    if (cur().kind != Tok::var) error(cur(), "expected a variable, found " + describe(cur()));
    return next().text;
  }
  std::int64_t expect_integer() {
    if (cur().kind != Tok::integer) error(cur(), "expected an integer, found " + describe(cur()));
    const auto& t = next();
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{}) error(t, "integer out of range");
    return v;
  }

  // ---- prologue and terms ----

  void prologue() {
    for (;;) {
      if (keyword("PREFIX")) {
        next();
        if (cur().kind != Tok::word || cur().text.back() != ':') error(cur(), "expected a prefix name ending in ':'");
        auto name = next().text;
        name.pop_back();
        if (cur().kind != Tok::iri) error(cur(), "expected <iri> after PREFIX " + name + ":");
        prefixes_[name] = next().text;
      } else if (keyword("BASE")) {
        unsupported(cur(), "BASE");
      } else {
        return;
      }
    }
  }

  std::string expand(const std::string& word) const {
    const auto colon = word.find(':');
    if (colon != std::string::npos) {
      const auto it = prefixes_.find(word.substr(0, colon));
      if (it != prefixes_.end()) return it->second + word.substr(colon + 1);
    }
    return word;
  }

  // Subject or object of a triple pattern.
  PatternTerm pattern_term(bool object) {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::var: next(); return Var{t.text};
      case Tok::iri: next(); return Term::iri(t.text);
      case Tok::word: {
        if (object && (t.text == "true" || t.text == "false")) {
          next();
          return Term::literal(t.text);
        }
        next();
        return Term::iri(expand(t.text));
      }
      case Tok::string:
      case Tok::integer:
      case Tok::decimal:
        if (!object) error(t, "a literal cannot be the subject of a triple");
        next();
        return Term::literal(t.text);
      default:
        if (punct("[")) unsupported(t, "blank node syntax");
        error(t, std::string("expected ") + (object ? "an object" : "a subject") + ", found " + describe(t));
    }
  }

  PatternTerm verb() {
    const Token& t = cur();
    if (punct("^") || punct("!") || punct("(")) unsupported(t, "property paths");
    PatternTerm p;
    if (t.kind == Tok::var) {
      p = Var{t.text};
    } else if (t.kind == Tok::iri) {
      p = Term::iri(t.text);
    } else if (t.kind == Tok::word) {
      p = t.text == "a" ? Term::iri(std::string(rdf_type)) : Term::iri(expand(t.text));
    } else {
      error(t, "expected a predicate, found " + describe(t));
    }
    next();
    if (punct("/") || punct("|") || punct("*") || punct("+") || punct("?")) unsupported(cur(), "property paths");
    return p;
  }

  // subject verb object (, object)* (; verb object (, object)*)*
  void triples(BasicGraphPattern& bgp) {
    const auto subject = pattern_term(false);
    for (;;) {
      const auto predicate = verb();
      for (;;) {
        bgp.push_back({subject, predicate, pattern_term(true)});
        if (!punct(",")) break;
        next();
      }
      if (!punct(";")) break;
      next();
      if (punct(".") || punct("}")) break;
    }
  }

  // ---- group graph patterns ----

  OpPtr group_pattern() {
    expect("{");
    if (keyword("SELECT")) unsupported(cur(), "subqueries");
    OpPtr current;
    BasicGraphPattern bgp;
    std::vector<ExprPtr> filters;
    const auto flush = [&] {
      if (bgp.empty()) return;
      auto leaf = op_match_scan(std::move(bgp));
      bgp.clear();
      current = current ? op_join(current, leaf) : leaf;
    };
    const auto add = [&](OpPtr p) {
      flush();
      current = current ? op_join(current, std::move(p)) : std::move(p);
    };

    while (!punct("}")) {
      if (cur().kind == Tok::end) error(cur(), "expected '}'");
      if (punct("{")) {
        add(union_chain());
      } else if (keyword("OPTIONAL")) {
        next();
        flush();
        auto right = group_pattern();
        current = op_left_join(current ? current : op_match_scan({}), std::move(right));
      } else if (keyword("MINUS")) {
        next();
        flush();
        auto right = group_pattern();
        current = op_minus(current ? current : op_match_scan({}), std::move(right));
      } else if (keyword("FILTER")) {
        next();
        filters.push_back(constraint());
      } else if (keyword("BIND")) {
        next();
        flush();
        expect("(");
        auto e = expression(nullptr);
        expect_keyword("AS");
        auto v = expect_var();
        expect(")");
        current = op_extend(current ? current : op_match_scan({}), std::move(v), std::move(e));
      } else if (keyword("GRAPH")) {
        next();
        std::string name;
        if (cur().kind == Tok::iri) {
          name = next().text;
        } else if (cur().kind == Tok::word) {
          name = expand(next().text);
        } else if (cur().kind == Tok::var) {
          unsupported(cur(), "GRAPH with a variable");
        } else {
          error(cur(), "expected a graph name after GRAPH");
        }
        add(op_set_map(std::move(name), group_pattern()));
      } else if (keyword("SERVICE")) {
        unsupported(cur(), "SERVICE");
      } else if (keyword("VALUES")) {
        unsupported(cur(), "VALUES");
      } else if (keyword("SELECT")) {
        unsupported(cur(), "subqueries");
      } else {
        triples(bgp);
        if (punct(".")) next();
        continue;
      }
      if (punct(".")) next();
    }
    next();
    flush();
    if (!current) current = op_match_scan({});
    if (!filters.empty()) current = op_filter(current, conjunction(filters));
    return current;
  }

  // {A} UNION {B} UNION {C} nests to the right: union(A, union(B, C)).
  OpPtr union_chain() {
    auto first = group_pattern();
    if (!keyword("UNION")) return first;
    next();
    return op_union({std::move(first), union_chain()});
  }

  ExprPtr constraint() {
    if (punct("(")) {
      next();
      auto e = expression(nullptr);
      expect(")");
      return e;
    }
    if (cur().kind == Tok::word) return primary(nullptr);
    error(cur(), "expected '(' or a function call after FILTER");
  }

  GroupKey group_key(OpPtr& plan) {
    GroupKey k;
    if (cur().kind == Tok::var) {
      k.column = next().text;
      return k;
    }
    if (punct("(")) {
      next();
      auto e = expression(nullptr);
      if (!keyword("AS")) {
        if (e->kind == Expr::Kind::variable) {
          expect(")");
          k.column = e->name;
          return k;
        }
        error(cur(), "expected AS in GROUP BY expression");
      }
      next();
      k.column = expect_var();
      expect(")");
      plan = op_extend(plan, k.column, std::move(e));
      return k;
    }
    const Token at = cur();
    const auto name = lower(at.text);
    if (name == "sma") {
      next();
      expect("(");
      k.kind = GroupKey::Kind::sma;
      k.column = expect_var();
      expect(",");
      if (cur().kind != Tok::duration) error(cur(), "expected a duration such as 1d or 30m");
      k.width_ns = next().nanoseconds;
      if (k.width_ns <= 0) error(at, "sma horizon must be positive");
      expect(")");
      k.function = "sma";
      return k;
    }
    if (const auto width = bucket_function_width(name); width != 0) {
      next();
      expect("(");
      k.kind = GroupKey::Kind::bucket;
      k.column = expect_var();
      k.width_ns = width;
      k.function = name;
      expect(")");
      return k;
    }
    if (name == "forecast" || name.rfind("arima", 0) == 0) unsupported(at, at.text);
    unsupported(at, "GROUP BY " + at.text + "()");
  }

  // ---- expressions ----

  ExprPtr expression(AggregateSink* sink) { return or_expr(sink); }

  ExprPtr or_expr(AggregateSink* sink) {
    auto e = and_expr(sink);
    while (punct("||")) {
      next();
      e = binary("||", e, and_expr(sink));
    }
    return e;
  }

  ExprPtr and_expr(AggregateSink* sink) {
    auto e = relational(sink);
    while (punct("&&")) {
      next();
      e = binary("&&", e, relational(sink));
    }
    return e;
  }

  ExprPtr relational(AggregateSink* sink) {
    auto e = additive(sink);
    for (const char* op : {"=", "!=", "<", "<=", ">", ">="}) {
      if (punct(op)) {
        next();
        return binary(op, e, additive(sink));
      }
    }
    if (keyword("IN") || keyword("NOT")) unsupported(cur(), "IN / NOT IN");
    return e;
  }

  ExprPtr additive(AggregateSink* sink) {
    auto e = multiplicative(sink);
    while (punct("+") || punct("-")) {
      const auto op = next().text;
      e = binary(op, e, multiplicative(sink));
    }
    return e;
  }

  ExprPtr multiplicative(AggregateSink* sink) {
    auto e = unary_expr(sink);
    while (punct("*") || punct("/")) {
      const auto op = next().text;
      e = binary(op, e, unary_expr(sink));
    }
    return e;
  }

  ExprPtr unary_expr(AggregateSink* sink) {
    if (punct("!")) {
      next();
      return unary("!", unary_expr(sink));
    }
    if (punct("-")) {
      next();
      auto operand = unary_expr(sink);
      if (operand->kind == Expr::Kind::literal) {
        if (const auto* i = std::get_if<std::int64_t>(&operand->value)) return lit(-*i);
        if (const auto* d = std::get_if<double>(&operand->value)) return lit(-*d);
      }
      return unary("-", std::move(operand));
    }
    if (punct("+")) {
      next();
      return unary_expr(sink);
    }
    return primary(sink);
  }

  ExprPtr primary(AggregateSink* sink) {
    const Token t = cur();
    switch (t.kind) {
      case Tok::var: next(); return var(t.text);
      case Tok::integer: {
        next();
        std::int64_t v = 0;
        const auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{}) return lit(std::stod(t.text));
        return lit(v);
      }
      case Tok::decimal: next(); return lit(std::stod(t.text));
      case Tok::duration: next(); return duration(t.nanoseconds);
      case Tok::string: next(); return typed_literal(t);
      case Tok::iri: error(t, "IRIs cannot be used in expressions");
      case Tok::word: break;
      case Tok::punct:
        if (t.text == "(") {
          next();
          auto e = expression(sink);
          expect(")");
          return e;
        }
        error(t, "expected an expression, found " + describe(t));
      case Tok::end: error(t, "expected an expression, found end of query");
    }

    const auto up = upper(t.text);
    if (up == "TRUE" || up == "FALSE") {
      next();
      return lit(up == "TRUE");
    }
    if (up == "EXISTS" || up == "NOT") unsupported(t, "EXISTS / NOT EXISTS");
    if (up == "FORECAST" || up.rfind("ARIMA", 0) == 0) unsupported(t, t.text);
    if (peek_token().kind != Tok::punct || peek_token().text != "(") {
      error(t, "unexpected '" + t.text + "' in expression");
    }
    if (is_aggregate_name(up)) {
      if (sink == nullptr) error(t, "aggregate " + up + " is only allowed in SELECT");
      next();
      expect("(");
      if (keyword("DISTINCT")) unsupported(cur(), "DISTINCT inside aggregates");
      AggSpec spec;
      spec.op = aggregate_op(up);
      if (punct("*")) {
        if (spec.op != AggOp::count) error(cur(), "only COUNT accepts *");
        next();
      } else {
        spec.arg = expression(nullptr);
      }
      if (punct(";")) unsupported(cur(), "GROUP_CONCAT separator");
      expect(")");
      const auto name = ".agg" + std::to_string(sink->specs.size());
      sink->specs.push_back(std::move(spec));
      return var(name);
    }
    const auto name = lower(t.text);
    if (!is_scalar_function(name)) unsupported(t, "function " + t.text + "()");
    next();
    expect("(");
    std::vector<ExprPtr> args;
    if (!punct(")")) {
      for (;;) {
        args.push_back(expression(sink));
        if (!punct(",")) break;
        next();
      }
    }
    expect(")");
    if (args.size() != 1) error(t, name + "() takes one argument");
    return call(name, std::move(args));
  }

  ExprPtr typed_literal(const Token& t) {
    if (t.datatype.empty()) return lit(t.text);
    const auto type = t.datatype;
    const auto local = type.substr(type.find_last_of(":#/") + 1);
    if (local == "boolean") {
      if (t.text != "true" && t.text != "false") error(t, "invalid boolean literal \"" + t.text + "\"");
      return lit(t.text == "true");
    }
    try {
      if (local == "dateTime" || local == "dateTimeStamp") return time_lit(t.text);
      if (local == "integer" || local == "int" || local == "long") return lit(std::int64_t{std::stoll(t.text)});
      if (local == "double" || local == "decimal" || local == "float") return lit(std::stod(t.text));
    } catch (const std::exception&) {
      error(t, "invalid " + local + " literal \"" + t.text + "\"");
    }
    return lit(t.text);
  }

  ExprPtr renamed(const ExprPtr& e) {
    if (e->kind == Expr::Kind::variable) {
      const auto it = rename_.find(e->name);
      return it == rename_.end() ? e : var(it->second);
    }
    if (e->args.empty()) return e;
    auto copy = std::make_shared<Expr>(*e);
    for (auto& a : copy->args) a = renamed(a);
    return copy;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, std::string> prefixes_;
  std::map<std::string, std::string> rename_;
};

}  // namespace

OpPtr parse_query(std::string_view text) { return Parser(Lexer(text).run()).query(); }

}  // namespace trt::query
