#include "tbsynth/protocol_lint.hpp"

#include <cctype>
#include <cstring>
#include <map>
#include <set>

namespace tbsynth {

namespace {

enum class Tok { kIdent, kNumber, kString, kMacro, kOp };

struct Token {
  Tok type;
  std::string text;
  int line;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

std::vector<Token> lex(std::string_view s) {
  static const char* kOps[] = {"===", "!==", "<<<", ">>>", "<<=", ">>=", "==", "!=", "<=", ">=", "&&",
                               "||",  "<<",  ">>",  "::",  "++",  "--",  "+=", "-=", "*=", "/=", "|=",
                               "&=",  "^=",  "%=",  "+:",  "-:",  "->",  "##"};
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && s[i + 1] == '/') {
      while (i < n && s[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && s[i + 1] == '*') {
      i += 2;
      while (i + 1 < n && !(s[i] == '*' && s[i + 1] == '/')) {
        if (s[i] == '\n') ++line;
        ++i;
      }
      i += 2;
      continue;
    }
    if (c == '"') {
      const int start_line = line;
      std::size_t j = i + 1;
      while (j < n && s[j] != '"') {
        if (s[j] == '\\') ++j;
        else if (s[j] == '\n') ++line;
        ++j;
      }
      out.push_back({Tok::kString, std::string(s.substr(i, j + 1 - i)), start_line});
      i = j + 1;
      continue;
    }
    if (c == '`') {
      std::size_t j = i + 1;
      while (j < n && ident_char(s[j])) ++j;
      out.push_back({Tok::kMacro, std::string(s.substr(i, j - i)), line});
      i = j;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < n && ident_char(s[j])) ++j;
      out.push_back({Tok::kIdent, std::string(s.substr(i, j - i)), line});
      i = j;
      continue;
    }
    auto based = [&](std::size_t j) {
      // after the quote: [s] base digits
      if (j < n && (s[j] == 's' || s[j] == 'S')) ++j;
      if (j < n && std::strchr("hHdDbBoO", s[j])) {
        ++j;
        while (j < n && (std::isxdigit(static_cast<unsigned char>(s[j])) || s[j] == '_' ||
                         std::strchr("xXzZ?", s[j]))) {
          ++j;
        }
        return j;
      }
      if (j < n && std::strchr("01xXzZ", s[j])) return j + 1;
      return std::size_t{0};
    };
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < n && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '.')) ++j;
      if (j < n && s[j] == '\'') {
        if (std::size_t k = based(j + 1)) j = k;
      }
      out.push_back({Tok::kNumber, std::string(s.substr(i, j - i)), line});
      i = j;
      continue;
    }
    if (c == '\'') {
      if (std::size_t k = based(i + 1)) {
        out.push_back({Tok::kNumber, std::string(s.substr(i, k - i)), line});
        i = k;
        continue;
      }
    }
    bool matched = false;
    for (const char* op : kOps) {
      const std::size_t len = std::strlen(op);
      if (s.substr(i, len) == op) {
        out.push_back({Tok::kOp, op, line});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back({Tok::kOp, std::string(1, c), line});
      ++i;
    }
  }
  return out;
}

bool is(const std::vector<Token>& t, std::size_t i, std::string_view text) {
  return i < t.size() && t[i].text == text && t[i].type != Tok::kString;
}

// Index one past the group opened at `open` ("(", "[" or "{").
std::size_t skip_group(const std::vector<Token>& t, std::size_t open) {
  const std::string o = t[open].text;
  const std::string c = o == "(" ? ")" : o == "[" ? "]" : "}";
  int depth = 0;
  for (std::size_t i = open; i < t.size(); ++i) {
    if (t[i].type != Tok::kOp) continue;
    if (t[i].text == o) ++depth;
    if (t[i].text == c && --depth == 0) return i + 1;
  }
  return t.size();
}

// Index of the "[" matching the "]" at `close`, or npos.
std::size_t back_group(const std::vector<Token>& t, std::size_t close) {
  int depth = 0;
  for (std::size_t i = close + 1; i-- > 0;) {
    if (t[i].type != Tok::kOp) continue;
    if (t[i].text == "]") ++depth;
    if (t[i].text == "[" && --depth == 0) return i;
  }
  return std::string::npos;
}

LintTarget guess_target(const std::vector<Token>& t) {
  bool has_module = false;
  LintTarget seq = LintTarget::kOther;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].type != Tok::kIdent) continue;
    if (t[i].text == "module") has_module = true;
    if (t[i].text == "extends" && i + 1 < t.size()) {
      const std::string& base = t[i + 1].text;
      if (base == "uvm_driver") return LintTarget::kDriver;
      if (base == "uvm_monitor") return LintTarget::kMonitor;
      if (base.rfind("uvm_sequence", 0) == 0 ||
          (base.size() > 9 && base.compare(base.size() - 9, 9, "_base_seq") == 0)) {
        seq = LintTarget::kSequence;
      }
    }
  }
  if (seq == LintTarget::kSequence) return seq;
  return has_module ? LintTarget::kBfm : LintTarget::kOther;
}

const std::map<std::string, std::string>& block_pairs() {
  static const std::map<std::string, std::string> pairs = {
      {"begin", "end"},           {"fork", "join"},
      {"class", "endclass"},      {"module", "endmodule"},
      {"task", "endtask"},        {"function", "endfunction"},
      {"case", "endcase"},        {"casez", "endcase"},
      {"casex", "endcase"},       {"randcase", "endcase"},
      {"covergroup", "endgroup"}, {"interface", "endinterface"},
      {"package", "endpackage"},  {"generate", "endgenerate"},
      {"program", "endprogram"},  {"clocking", "endclocking"},
      {"property", "endproperty"}, {"sequence", "endsequence"},
  };
  return pairs;
}

bool is_closer(const std::string& s) {
  if (s == "join_any" || s == "join_none") return true;
  for (const auto& [_, c] : block_pairs()) {
    if (c == s) return true;
  }
  return false;
}

bool closes(const std::string& opener, const std::string& closer) {
  const std::string& want = block_pairs().at(opener);
  if (want == "join") return closer == "join" || closer == "join_any" || closer == "join_none";
  return want == closer;
}

// A declaration-only opener that has no matching end keyword.
bool is_prototype(const std::vector<Token>& t, std::size_t i) {
  const std::string& kw = t[i].text;
  std::size_t j = i;
  while (j > 0) {
    const std::string& p = t[j - 1].text;
    if (p == "virtual" || p == "static" || p == "protected" || p == "local" || p == "automatic") {
      if (p == "virtual" && kw == "interface") return true;
      --j;
      continue;
    }
    if (p == "extern" || p == "pure") return true;
    if (p == "typedef" && kw == "class") return true;
    if ((p == "wait" || p == "disable") && kw == "fork") return true;
    if (t[j - 1].type == Tok::kString && j >= 2 && (t[j - 2].text == "import" || t[j - 2].text == "export")) {
      return true;
    }
    break;
  }
  if (kw == "interface" && i > 0 && t[i - 1].text == "virtual") return true;
  return false;
}

const std::set<std::string>& statement_openers() {
  static const std::set<std::string> s = {";",     "begin", "end",     "else",      "do",       "forever",
                                          "fork",  "join",  "join_any", "join_none", "initial", "final",
                                          "always", "always_comb", "always_latch", ")",   "{"};
  return s;
}

struct Linter {
  const std::vector<Token>& t;
  const Blueprint& bp;
  LintTarget target;
  RuleReport report;

  void add(LintRule r, int line, std::string msg) { report.violations.push_back({r, line, std::move(msg)}); }

  void balance() {
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i].type != Tok::kIdent) continue;
      const std::string& w = t[i].text;
      if (block_pairs().count(w)) {
        if (is_prototype(t, i)) continue;
        stack.push_back(i);
      } else if (is_closer(w)) {
        if (stack.empty()) {
          add(LintRule::kBalancedBlocks, t[i].line, "'" + w + "' without an open block");
          continue;
        }
        const Token& open = t[stack.back()];
        if (!closes(open.text, w)) {
          add(LintRule::kBalancedBlocks, t[i].line,
              "'" + w + "' closes '" + open.text + "' opened on line " + std::to_string(open.line));
        }
        stack.pop_back();
      }
    }
    for (std::size_t idx : stack) {
      add(LintRule::kBalancedBlocks, t[idx].line, "'" + t[idx].text + "' is never closed");
    }
  }

  void signals() {
    for (std::size_t i = 0; i + 2 < t.size(); ++i) {
      if (t[i].type == Tok::kIdent && t[i].text == "vif" && is(t, i + 1, ".") && t[i + 2].type == Tok::kIdent) {
        if (!bp.find_port(t[i + 2].text)) {
          add(LintRule::kSignalExists, t[i].line, "vif." + t[i + 2].text + " is not a port of " + bp.design_name);
        }
      }
    }
  }

  void loops() {
    const bool forever_ok =
        target == LintTarget::kDriver || target == LintTarget::kMonitor || target == LintTarget::kBfm;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i].type != Tok::kIdent) continue;
      const std::string& w = t[i].text;
      if (w == "while" && is(t, i + 1, "(")) {
        const std::size_t end = skip_group(t, i + 1);
        bool bounded = false;
        for (std::size_t j = i + 2; j + 1 < end; ++j) {
          if (t[j].type == Tok::kOp && (t[j].text == "<" || t[j].text == "<=")) bounded = true;
        }
        if (!bounded) add(LintRule::kBoundedLoop, t[i].line, "loop condition has no '<' iteration bound");
      } else if (w == "wait" && is(t, i + 1, "(")) {
        add(LintRule::kBoundedLoop, t[i].line, "wait() is an unbounded wait");
      } else if (w == "forever" && !forever_ok) {
        add(LintRule::kBoundedLoop, t[i].line, "forever is only allowed in drivers, monitors and BFMs");
      }
    }
  }

  std::set<std::string> module_outputs() const {
    std::set<std::string> outs;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!(t[i].type == Tok::kIdent && t[i].text == "output")) continue;
      std::string last;
      for (std::size_t j = i + 1; j < t.size(); ++j) {
        if (t[j].type == Tok::kOp && (t[j].text == "," || t[j].text == ")" || t[j].text == ";")) break;
        if (t[j].type == Tok::kOp && t[j].text == "[") {
          j = skip_group(t, j) - 1;
          continue;
        }
        if (t[j].type == Tok::kIdent) last = t[j].text;
      }
      if (!last.empty()) outs.insert(last);
    }
    return outs;
  }

  void assignments() {
    const std::set<std::string> outputs =
        target == LintTarget::kBfm ? module_outputs() : std::set<std::string>{};
    int paren = 0;
    int brace = 0;
    int bracket = 0;
    int depth = 0;              // begin/end nesting
    int clocked_depth = -1;     // begin depth that ends the clocked region
    bool clocked_stmt = false;  // single-statement clocked body
    bool in_assign = false;
    int class_depth = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Token& k = t[i];
      if (k.type == Tok::kIdent) {
        if (k.text == "class" && (i == 0 || t[i - 1].text != "typedef")) ++class_depth;
        if (k.text == "endclass" && class_depth > 0) --class_depth;
        if (k.text == "for" && is(t, i + 1, "(")) {
          i = skip_group(t, i + 1) - 1;
          continue;
        }
        if (k.text == "assign" && paren == 0) in_assign = true;
        if (k.text == "begin") {
          ++depth;
        } else if (k.text == "end") {
          if (clocked_depth >= 0 && depth == clocked_depth + 1) clocked_depth = -1;
          --depth;
        }
        const bool clocked_kw = k.text == "always_ff" || k.text == "always";
        if (clocked_kw && is(t, i + 1, "@")) {
          std::size_t j = i + 2;
          bool edge = k.text == "always_ff";
          if (is(t, j, "(")) {
            const std::size_t end = skip_group(t, j);
            for (std::size_t m = j; m < end; ++m) {
              if (t[m].text == "posedge" || t[m].text == "negedge") edge = true;
            }
            j = end;
          } else {
            ++j;
          }
          if (edge && clocked_depth < 0 && !clocked_stmt) {
            if (is(t, j, "begin")) {
              clocked_depth = depth;
            } else {
              clocked_stmt = true;
            }
          }
          i = j - 1;
          continue;
        }
        continue;
      }
      if (k.type != Tok::kOp) continue;
      if (k.text == "(") ++paren;
      if (k.text == ")") --paren;
      if (k.text == "{") ++brace;
      if (k.text == "}") --brace;
      if (k.text == "[") ++bracket;
      if (k.text == "]") --bracket;
      if (k.text == ";" && paren == 0) {
        in_assign = false;
        if (clocked_stmt && brace == 0) clocked_stmt = false;
        continue;
      }
      static const std::set<std::string> kAssignOps = {"=", "+=", "-=", "*=", "/=", "|=", "&=", "^=", "%=",
                                                       "<<=", ">>="};
      if (!kAssignOps.count(k.text) || paren != 0 || brace != 0 || bracket != 0 || in_assign) continue;
      check_assignment(i, outputs, clocked_depth >= 0 || clocked_stmt, class_depth > 0);
    }
  }

  void check_assignment(std::size_t eq, const std::set<std::string>& outputs, bool clocked, bool in_class) {
    // Walk back over an lvalue: ident ( . ident | [..] )*
    std::size_t start = eq;
    std::size_t j = eq;
    while (j > 0) {
      const Token& p = t[j - 1];
      if (p.type == Tok::kOp && p.text == "]") {
        const std::size_t open = back_group(t, j - 1);
        if (open == std::string::npos) break;
        j = open;
        start = j;
        continue;
      }
      if (p.type == Tok::kIdent) {
        j -= 1;
        start = j;
        if (j > 0 && (is(t, j - 1, ".") || is(t, j - 1, "::"))) {
          j -= 1;
          continue;
        }
        break;
      }
      break;
    }
    if (start == eq) return;
    const Token* prev = start > 0 ? &t[start - 1] : nullptr;
    bool statement = prev == nullptr || prev->type == Tok::kNumber ||
                     (prev->type != Tok::kString && statement_openers().count(prev->text) > 0) ||
                     (prev->type == Tok::kOp && prev->text == ":");
    if (!statement && prev->type == Tok::kIdent && start >= 3 && is(t, start - 2, ":") &&
        (t[start - 3].text == "begin" || t[start - 3].text == "fork")) {
      statement = true;  // first statement after a block label
    }
    if (!statement) return;  // declaration with initializer

    std::string lhs;
    for (std::size_t m = start; m < eq; ++m) lhs += t[m].text;
    const std::string& base = t[start].text;
    const int line = t[eq].line;
    if (base == "vif" && is(t, start + 1, ".")) {
      add(LintRule::kNonBlockingDrive, line, "blocking assignment to DUT signal " + lhs);
    } else if (!in_class && bp.find_port(base) && !is(t, start + 1, ".")) {
      add(LintRule::kNonBlockingDrive, line, "blocking assignment to DUT port " + lhs);
    } else if (clocked) {
      add(LintRule::kNonBlockingDrive, line, "blocking assignment to " + lhs + " in a clocked block");
    } else if (outputs.count(base)) {
      add(LintRule::kNonBlockingDrive, line, "blocking assignment to module output " + lhs);
    }
  }
};

}  // namespace

std::string_view to_string(LintRule r) {
  switch (r) {
    case LintRule::kNonBlockingDrive: return "non_blocking_drive";
    case LintRule::kSignalExists: return "signal_exists";
    case LintRule::kBoundedLoop: return "bounded_loop";
    case LintRule::kBalancedBlocks: return "balanced_blocks";
  }
  return "?";
}

std::string LintViolation::to_string() const {
  return std::string(tbsynth::to_string(rule)) + " line " + std::to_string(line) + ": " + message;
}

std::size_t RuleReport::count(LintRule r) const {
  std::size_t n = 0;
  for (const auto& v : violations) n += v.rule == r;
  return n;
}

std::string RuleReport::summary() const {
  if (violations.empty()) return "ok";
  std::string out;
  for (const auto& v : violations) out += v.to_string() + "\n";
  return out;
}

RuleReport check_protocol_rules(std::string_view sv_text, const Blueprint& bp, LintTarget target) {
  const std::vector<Token> tokens = lex(sv_text);
  Linter l{tokens, bp, target == LintTarget::kAuto ? guess_target(tokens) : target, {}};
  l.balance();
  l.signals();
  l.loops();
  l.assignments();
  return l.report;
}

}  // namespace tbsynth
