#include "tbsynth/template_engine.hpp"

#include <algorithm>
#include <cctype>
#include <variant>

#include "text_util.hpp"

namespace tbsynth {

using nlohmann::json;

namespace template_detail {

struct Condition {
  struct Term {
    bool negate = false;
    std::string path;
    std::optional<std::string> compare_to;
    bool compare_equal = true;
  };
  std::vector<Term> terms;
  std::vector<std::string> joiners;  // "and" / "or" between terms
};

}  // namespace template_detail

using template_detail::Condition;

struct Template::Node {
  struct Text {
    std::string text;
  };
  struct Var {
    std::string path;
    std::vector<std::string> filters;
  };
  struct For {
    std::string var;
    std::string path;
    std::vector<Node> body;
  };
  struct If {
    std::vector<std::pair<Condition, std::vector<Node>>> branches;
    std::vector<Node> otherwise;
  };
  std::variant<Text, Var, For, If> v;
};

namespace {

struct Token {
  enum Kind { kText, kVar, kBlock } kind;
  std::string body;
  int line = 1;
};

// Splits source into text / {{ }} / {% %} tokens and applies line trimming for
// block tags and comments standing alone on a line.
std::vector<Token> tokenize(std::string_view src, const std::string& origin,
                            std::vector<std::string>& comments) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  std::string text;
  bool line_dirty = false;  // visible content emitted since the last newline
  auto flush_text = [&] {
    if (!text.empty()) out.push_back({Token::kText, text, line});
    text.clear();
  };
  while (i < src.size()) {
    if (src[i] == '{' && i + 1 < src.size() && (src[i + 1] == '{' || src[i + 1] == '%' || src[i + 1] == '#')) {
      const char open = src[i + 1];
      const std::string close = open == '{' ? "}}" : (open == '%' ? "%}" : "#}");
      const std::size_t end = src.find(close, i + 2);
      if (end == std::string_view::npos) {
        throw TemplateSyntaxError(origin + ":" + std::to_string(line) + ": unterminated tag");
      }
      std::string body(src.substr(i + 2, end - i - 2));
      const int tag_line = line;
      for (std::size_t k = i; k < end; ++k) {
        if (src[k] == '\n') ++line;
      }
      std::size_t next = end + 2;
      if (open == '{') {
        line_dirty = true;
      } else {
        std::size_t after = next;
        while (after < src.size() && (src[after] == ' ' || src[after] == '\t')) ++after;
        const bool alone = !line_dirty && (after >= src.size() || src[after] == '\n');
        if (alone) {
          while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.pop_back();
          next = after < src.size() ? after + 1 : after;
          if (after < src.size()) ++line;
        } else {
          line_dirty = true;
        }
      }
      flush_text();
      if (open == '{') {
        out.push_back({Token::kVar, text::trim(body), tag_line});
      } else if (open == '%') {
        out.push_back({Token::kBlock, text::trim(body), tag_line});
      } else {
        comments.push_back(body);
      }
      i = next;
      continue;
    }
    if (src[i] == '\n') {
      ++line;
      line_dirty = false;
    } else if (src[i] != ' ' && src[i] != '\t') {
      line_dirty = true;
    }
    text.push_back(src[i]);
    ++i;
  }
  flush_text();
  return out;
}

Condition parse_condition(const std::string& expr, const std::string& where) {
  Condition c;
  auto words = text::split_ws(expr);
  std::size_t i = 0;
  auto expect_term = [&] {
    Condition::Term t;
    if (i < words.size() && words[i] == "not") {
      t.negate = true;
      ++i;
    }
    if (i >= words.size()) throw TemplateSyntaxError(where + ": empty condition");
    t.path = words[i++];
    if (i < words.size() && (words[i] == "==" || words[i] == "!=")) {
      t.compare_equal = words[i] == "==";
      ++i;
      if (i >= words.size()) throw TemplateSyntaxError(where + ": comparison without operand");
      std::string lit = words[i++];
      if (lit.size() < 2 || lit.front() != '"' || lit.back() != '"') {
        throw TemplateSyntaxError(where + ": comparison operand must be a quoted string");
      }
      t.compare_to = lit.substr(1, lit.size() - 2);
    }
    c.terms.push_back(t);
  };
  expect_term();
  while (i < words.size()) {
    if (words[i] != "and" && words[i] != "or") throw TemplateSyntaxError(where + ": bad condition '" + expr + "'");
    c.joiners.push_back(words[i++]);
    expect_term();
  }
  return c;
}

std::string root_of(const std::string& path) { return path.substr(0, path.find('.')); }

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string origin) : toks_(std::move(tokens)), origin_(std::move(origin)) {}

  std::vector<Template::Node> parse_all(std::set<std::string>& refs) {
    refs_ = &refs;
    auto nodes = parse_until({});
    if (pos_ < toks_.size()) {
      throw TemplateSyntaxError(where() + ": unexpected '" + toks_[pos_].body + "'");
    }
    return nodes;
  }

 private:
  std::vector<Token> toks_;
  std::string origin_;
  std::size_t pos_ = 0;
  std::vector<std::string> loop_vars_;
  std::set<std::string>* refs_ = nullptr;

  std::string where() const {
    const int line = pos_ < toks_.size() ? toks_[pos_].line : (toks_.empty() ? 0 : toks_.back().line);
    return origin_ + ":" + std::to_string(line);
  }

  void note_ref(const std::string& path) {
    const std::string root = root_of(path);
    if (root == "loop") return;
    if (std::find(loop_vars_.begin(), loop_vars_.end(), root) != loop_vars_.end()) return;
    refs_->insert(root);
  }

  static std::string keyword(const std::string& body) {
    auto words = text::split_ws(body);
    return words.empty() ? std::string() : words[0];
  }

  std::vector<Template::Node> parse_until(const std::set<std::string>& stops) {
    std::vector<Template::Node> nodes;
    while (pos_ < toks_.size()) {
      const Token& t = toks_[pos_];
      if (t.kind == Token::kText) {
        nodes.push_back({Template::Node::Text{t.body}});
        ++pos_;
        continue;
      }
      if (t.kind == Token::kVar) {
        auto parts = text::split(t.body, '|');
        Template::Node::Var v;
        v.path = text::trim(parts[0]);
        if (v.path.empty()) throw TemplateSyntaxError(where() + ": empty slot");
        for (std::size_t k = 1; k < parts.size(); ++k) {
          auto f = text::trim(parts[k]);
          if (f != "upper" && f != "lower" && f != "hex") throw TemplateSyntaxError(where() + ": unknown filter " + f);
          v.filters.push_back(f);
        }
        note_ref(v.path);
        nodes.push_back({v});
        ++pos_;
        continue;
      }
      const std::string kw = keyword(t.body);
      if (stops.count(kw)) return nodes;
      if (kw == "for") {
        auto words = text::split_ws(t.body);
        if (words.size() != 4 || words[2] != "in") throw TemplateSyntaxError(where() + ": malformed for");
        Template::Node::For f;
        f.var = words[1];
        f.path = words[3];
        note_ref(f.path);
        ++pos_;
        loop_vars_.push_back(f.var);
        f.body = parse_until({"endfor"});
        loop_vars_.pop_back();
        expect("endfor");
        nodes.push_back({std::move(f)});
      } else if (kw == "if") {
        Template::Node::If node;
        std::string cond = t.body.substr(2);
        ++pos_;
        while (true) {
          Condition c = parse_condition(cond, where());
          for (const auto& term : c.terms) note_ref(term.path);
          auto body = parse_until({"elif", "else", "endif"});
          node.branches.emplace_back(std::move(c), std::move(body));
          if (pos_ >= toks_.size()) throw TemplateSyntaxError(where() + ": unterminated if");
          const std::string k = keyword(toks_[pos_].body);
          if (k == "elif") {
            cond = toks_[pos_].body.substr(4);
            ++pos_;
            continue;
          }
          if (k == "else") {
            ++pos_;
            node.otherwise = parse_until({"endif"});
          }
          expect("endif");
          break;
        }
        nodes.push_back({std::move(node)});
      } else {
        throw TemplateSyntaxError(where() + ": unexpected block '" + t.body + "'");
      }
    }
    if (!stops.empty()) throw TemplateSyntaxError(origin_ + ": unbalanced block, missing end tag");
    return nodes;
  }

  void expect(const std::string& kw) {
    if (pos_ >= toks_.size() || keyword(toks_[pos_].body) != kw) {
      throw TemplateSyntaxError(where() + ": expected {% " + kw + " %}");
    }
    ++pos_;
  }
};

// Scope chain for loop variables; the outermost scope is the render context.
struct Scope {
  const json* context;
  std::vector<std::pair<std::string, json>> locals;

  const json* lookup(const std::string& path) const {
    auto segs = text::split(path, '.');
    const json* cur = nullptr;
    for (auto it = locals.rbegin(); it != locals.rend(); ++it) {
      if (it->first == segs[0]) {
        cur = &it->second;
        break;
      }
    }
    if (!cur) {
      auto f = context->find(segs[0]);
      if (f == context->end()) return nullptr;
      cur = &*f;
    }
    for (std::size_t i = 1; i < segs.size(); ++i) {
      if (!cur->is_object()) return nullptr;
      auto f = cur->find(segs[i]);
      if (f == cur->end()) return nullptr;
      cur = &*f;
    }
    return cur;
  }
};

bool truthy(const json* v) {
  if (!v || v->is_null()) return false;
  if (v->is_boolean()) return v->get<bool>();
  if (v->is_number_integer() || v->is_number_unsigned()) return v->get<std::int64_t>() != 0;
  if (v->is_number_float()) return v->get<double>() != 0.0;
  if (v->is_string()) return !v->get<std::string>().empty();
  return !v->empty();
}

std::string stringify(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  return v.dump();
}

bool eval(const Condition& c, const Scope& scope) {
  auto term_value = [&](const Condition::Term& t) {
    const json* v = scope.lookup(t.path);
    bool r;
    if (t.compare_to) {
      const bool eq = v && stringify(*v) == *t.compare_to;
      r = t.compare_equal ? eq : !eq;
    } else {
      r = truthy(v);
    }
    return t.negate ? !r : r;
  };
  bool acc = term_value(c.terms[0]);
  for (std::size_t i = 0; i < c.joiners.size(); ++i) {
    const bool rhs = term_value(c.terms[i + 1]);
    acc = c.joiners[i] == "and" ? (acc && rhs) : (acc || rhs);
  }
  return acc;
}

void render_nodes(const std::vector<Template::Node>& nodes, Scope& scope, std::string& out);

void render_node(const Template::Node& n, Scope& scope, std::string& out) {
  if (auto* t = std::get_if<Template::Node::Text>(&n.v)) {
    out += t->text;
  } else if (auto* v = std::get_if<Template::Node::Var>(&n.v)) {
    const json* val = scope.lookup(v->path);
    if (!val || val->is_null()) throw MissingSlot(v->path);
    std::string s = stringify(*val);
    for (const auto& f : v->filters) {
      if (f == "upper") {
        for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      } else if (f == "lower") {
        s = text::to_lower(s);
      } else if (f == "hex" && (val->is_number_unsigned() || val->is_number_integer())) {
        s = text::hex(val->get<std::uint64_t>()).substr(2);
      }
    }
    out += s;
  } else if (auto* f = std::get_if<Template::Node::For>(&n.v)) {
    const json* seq = scope.lookup(f->path);
    if (!seq) throw MissingSlot(f->path);
    if (!seq->is_array()) throw TemplateSyntaxError("for-loop over non-list '" + f->path + "'");
    const std::size_t count = seq->size();
    for (std::size_t i = 0; i < count; ++i) {
      scope.locals.emplace_back(f->var, (*seq)[i]);
      scope.locals.emplace_back("loop", json{{"index", i + 1},
                                             {"index0", i},
                                             {"first", i == 0},
                                             {"last", i + 1 == count},
                                             {"length", count}});
      render_nodes(f->body, scope, out);
      scope.locals.pop_back();
      scope.locals.pop_back();
    }
  } else if (auto* c = std::get_if<Template::Node::If>(&n.v)) {
    for (const auto& [cond, body] : c->branches) {
      if (eval(cond, scope)) {
        render_nodes(body, scope, out);
        return;
      }
    }
    render_nodes(c->otherwise, scope, out);
  }
}

void render_nodes(const std::vector<Template::Node>& nodes, Scope& scope, std::string& out) {
  for (const auto& n : nodes) render_node(n, scope, out);
}

}  // namespace

Template Template::parse(std::string_view source, std::string origin) {
  Template t;
  t.origin_ = std::move(origin);
  std::vector<std::string> comments;
  auto tokens = tokenize(source, t.origin_, comments);
  if (comments.empty() || comments.front().find("@name") == std::string::npos) {
    throw TemplateSyntaxError(t.origin_ + ": missing header comment with @name");
  }
  for (const auto& raw_line : text::split(comments.front(), '\n')) {
    const std::string line = text::trim(raw_line);
    if (line.empty() || line[0] != '@') continue;
    const auto sp = line.find_first_of(" \t");
    const std::string key = line.substr(1, sp == std::string::npos ? std::string::npos : sp - 1);
    const std::string rest = sp == std::string::npos ? "" : text::trim(line.substr(sp));
    t.attributes_[key].push_back(rest);
  }
  auto single = [&](const std::string& key) {
    auto it = t.attributes_.find(key);
    if (it == t.attributes_.end() || it->second.size() != 1 || it->second[0].empty()) {
      throw TemplateSyntaxError(t.origin_ + ": header needs exactly one @" + key);
    }
    return it->second[0];
  };
  t.name_ = single("name");
  t.kind_ = single("kind");
  t.scope_ = single("scope");
  static const std::set<std::string> kScopes = {"wishbone",         "axi4lite",          "direct_ready_done",
                                                "direct_valid_ready", "direct_busy",     "direct_streaming",
                                                "protocol_agnostic"};
  if (!kScopes.count(t.scope_)) throw TemplateSyntaxError(t.origin_ + ": unknown scope " + t.scope_);
  for (const auto& entry : t.attribute("slots")) {
    for (auto& s : text::split_ws(entry)) t.required_slots_.insert(s);
  }

  Parser parser(std::move(tokens), t.origin_);
  t.body_ = std::make_shared<const std::vector<Node>>(parser.parse_all(t.referenced_slots_));
  for (const auto& ref : t.referenced_slots_) {
    if (!t.required_slots_.count(ref)) {
      throw TemplateSyntaxError(t.origin_ + ": slot '" + ref + "' is used but not declared in @slots");
    }
  }
  return t;
}

const std::vector<std::string>& Template::attribute(const std::string& key) const {
  static const std::vector<std::string> kEmpty;
  auto it = attributes_.find(key);
  return it == attributes_.end() ? kEmpty : it->second;
}

std::string Template::render(const json& context) const {
  for (const auto& slot : required_slots_) {
    if (!context.contains(slot) || context.at(slot).is_null()) throw MissingSlot(slot);
  }
  Scope scope{&context, {}};
  std::string out;
  render_nodes(*body_, scope, out);
  return out;
}

}  // namespace tbsynth
