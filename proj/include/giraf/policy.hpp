#pragma once

#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "giraf/error.hpp"

namespace giraf {

// One-statement-per-line imperative subset: comments, assignments and calls
// over string/number literals and identifiers. No control flow by design —
// that is the whole safety argument for running generated code.

struct Expr;

struct StringLit {
  std::string value;
  bool operator==(const StringLit&) const = default;
};

struct NumberLit {
  double value = 0.0;
  bool operator==(const NumberLit&) const = default;
};

struct Identifier {
  std::string name;
  bool operator==(const Identifier&) const = default;
};

struct Call {
  std::string name;
  std::vector<Expr> args;
  bool operator==(const Call&) const;
};

struct Expr {
  std::variant<StringLit, NumberLit, Identifier, Call> node;
  bool operator==(const Expr&) const = default;
};

inline bool Call::operator==(const Call& o) const {
  return name == o.name && args == o.args;
}

struct Comment {
  std::string text;  // everything after '#', verbatim
  bool operator==(const Comment&) const = default;
};

struct Assign {
  std::string name;
  Expr value;
  bool operator==(const Assign&) const = default;
};

struct ExprStatement {
  Call call;
  bool operator==(const ExprStatement&) const = default;
};

struct Statement {
  std::variant<Comment, Assign, ExprStatement> node;
  int line = 0;  // 1-based source line; not part of structural equality

  bool operator==(const Statement& o) const { return node == o.node; }
};

struct PolicyProgram {
  std::vector<Statement> statements;
  bool operator==(const PolicyProgram&) const = default;
};

namespace detail {

class PolicyParser {
 public:
  explicit PolicyParser(std::string_view text) : text_(text) {}

  PolicyProgram parse() {
    PolicyProgram prog;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text_.size()) {
      std::size_t eol = text_.find('\n', pos);
      std::string_view line = text_.substr(
          pos, eol == std::string_view::npos ? text_.size() - pos : eol - pos);
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      parse_line(prog, line, line_no);
      if (eol == std::string_view::npos) break;
      pos = eol + 1;
    }
    return prog;
  }

 private:
  void parse_line(PolicyProgram& prog, std::string_view line, int line_no) {
    line_ = line;
    line_no_ = line_no;
    col_ = 0;
    skip_ws();
    if (col_ >= line_.size()) return;  // blank line
    if (line_[col_] == '#') {
      Statement st;
      st.node = Comment{std::string(line_.substr(col_ + 1))};
      st.line = line_no_;
      prog.statements.push_back(std::move(st));
      return;
    }
    std::string name = expect_ident("statement");
    skip_ws();
    Statement st;
    st.line = line_no_;
    if (col_ < line_.size() && line_[col_] == '=') {
      ++col_;
      skip_ws();
      st.node = Assign{std::move(name), parse_expr()};
    } else if (col_ < line_.size() && line_[col_] == '(') {
      st.node = ExprStatement{parse_call(std::move(name))};
    } else {
      fail("expected '=' or '(' after identifier");
    }
    skip_ws();
    if (col_ < line_.size()) fail("trailing characters after statement");
    prog.statements.push_back(std::move(st));
  }

  Expr parse_expr() {
    skip_ws();
    if (col_ >= line_.size()) fail("expected expression");
    char c = line_[col_];
    if (c == '\'') return Expr{parse_string()};
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+')
      return Expr{parse_number()};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name = expect_ident("expression");
      skip_ws();
      if (col_ < line_.size() && line_[col_] == '(')
        return Expr{parse_call(std::move(name))};
      return Expr{Identifier{std::move(name)}};
    }
    fail("unexpected character in expression");
    return {};
  }

  Call parse_call(std::string name) {
    // at '('
    ++col_;
    Call call;
    call.name = std::move(name);
    skip_ws();
    if (col_ < line_.size() && line_[col_] == ')') {
      ++col_;
      return call;
    }
    while (true) {
      call.args.push_back(parse_expr());
      skip_ws();
      if (col_ >= line_.size()) fail("unterminated argument list");
      if (line_[col_] == ',') {
        ++col_;
        continue;
      }
      if (line_[col_] == ')') {
        ++col_;
        return call;
      }
      fail("expected ',' or ')' in argument list");
    }
  }

  StringLit parse_string() {
    ++col_;  // opening quote
    std::size_t start = col_;
    while (col_ < line_.size() && line_[col_] != '\'') ++col_;
    if (col_ >= line_.size()) fail("unterminated string literal");
    StringLit lit{std::string(line_.substr(start, col_ - start))};
    ++col_;  // closing quote
    return lit;
  }

  NumberLit parse_number() {
    std::size_t start = col_;
    if (line_[col_] == '-' || line_[col_] == '+') ++col_;
    bool digits = false;
    while (col_ < line_.size() &&
           (std::isdigit(static_cast<unsigned char>(line_[col_])) ||
            line_[col_] == '.' || line_[col_] == 'e' || line_[col_] == 'E' ||
            ((line_[col_] == '-' || line_[col_] == '+') && col_ > start &&
             (line_[col_ - 1] == 'e' || line_[col_ - 1] == 'E')))) {
      if (std::isdigit(static_cast<unsigned char>(line_[col_]))) digits = true;
      ++col_;
    }
    if (!digits) fail_at(start, "malformed number literal");
    double value = 0.0;
    auto sv = line_.substr(start, col_ - start);
    auto res = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (res.ec != std::errc{} || res.ptr != sv.data() + sv.size())
      fail_at(start, "malformed number literal");
    return NumberLit{value};
  }

  std::string expect_ident(const char* where) {
    skip_ws();
    if (col_ >= line_.size() ||
        (!std::isalpha(static_cast<unsigned char>(line_[col_])) &&
         line_[col_] != '_'))
      fail(std::string("expected identifier in ") + where);
    std::size_t start = col_;
    while (col_ < line_.size() &&
           (std::isalnum(static_cast<unsigned char>(line_[col_])) ||
            line_[col_] == '_'))
      ++col_;
    return std::string(line_.substr(start, col_ - start));
  }

  void skip_ws() {
    while (col_ < line_.size() &&
           (line_[col_] == ' ' || line_[col_] == '\t'))
      ++col_;
  }

  [[noreturn]] void fail(const std::string& msg) { fail_at(col_, msg); }

  [[noreturn]] void fail_at(std::size_t col, const std::string& msg) {
    throw PolicyParseError(line_no_, static_cast<int>(col) + 1, msg);
  }

  std::string_view text_;
  std::string_view line_;
  std::size_t col_ = 0;
  int line_no_ = 0;
};

}  // namespace detail

inline PolicyProgram parse_policy(std::string_view text) {
  return detail::PolicyParser(text).parse();
}

namespace detail {

inline std::string format_number(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void print_expr(const Expr& e, std::string& out);

inline void print_call(const Call& c, std::string& out) {
  out += c.name;
  out += '(';
  for (std::size_t i = 0; i < c.args.size(); ++i) {
    if (i) out += ", ";
    print_expr(c.args[i], out);
  }
  out += ')';
}

inline void print_expr(const Expr& e, std::string& out) {
  if (const auto* s = std::get_if<StringLit>(&e.node)) {
    out += '\'';
    out += s->value;
    out += '\'';
  } else if (const auto* n = std::get_if<NumberLit>(&e.node)) {
    out += format_number(n->value);
  } else if (const auto* id = std::get_if<Identifier>(&e.node)) {
    out += id->name;
  } else {
    print_call(std::get<Call>(e.node), out);
  }
}

}  // namespace detail

inline std::string pretty_print(const PolicyProgram& prog) {
  std::string out;
  // Blank separator lines are not statements; rebuild them from the gaps in
  // the recorded line numbers so parsed text survives printing unchanged.
  int prev = 0;
  for (const auto& st : prog.statements) {
    int line = st.line > prev ? st.line : prev + 1;
    for (int i = prev + 1; i < line; ++i) out += '\n';
    prev = line;
    if (const auto* c = std::get_if<Comment>(&st.node)) {
      out += '#';
      out += c->text;
    } else if (const auto* a = std::get_if<Assign>(&st.node)) {
      out += a->name;
      out += " = ";
      detail::print_expr(a->value, out);
    } else {
      detail::print_call(std::get<ExprStatement>(st.node).call, out);
    }
    out += '\n';
  }
  return out;
}

enum class ValueKind { Position, Direction, Scalar, String, Void };

inline const char* value_kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Position: return "position";
    case ValueKind::Direction: return "direction";
    case ValueKind::Scalar: return "scalar";
    case ValueKind::String: return "string";
    case ValueKind::Void: return "void";
  }
  return "void";
}

inline std::optional<ValueKind> parse_value_kind(std::string_view s) {
  for (ValueKind k : {ValueKind::Position, ValueKind::Direction,
                      ValueKind::Scalar, ValueKind::String, ValueKind::Void})
    if (s == value_kind_name(k)) return k;
  return std::nullopt;
}

struct FunctionSpec {
  std::string name;
  std::vector<ValueKind> params;
  ValueKind returns = ValueKind::Void;
  bool perception = false;
  std::string doc;
};

// The whitelist the validator and interpreter work against: perception
// functions return values, action primitives are void.
class PrimitiveCatalog {
 public:
  void add(FunctionSpec spec) { specs_.emplace(spec.name, std::move(spec)); }

  const FunctionSpec* find(const std::string& name) const {
    auto it = specs_.find(name);
    return it == specs_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, FunctionSpec>& all() const { return specs_; }

  static PrimitiveCatalog defaults() {
    PrimitiveCatalog c;
    using VK = ValueKind;
    c.add({"detect_referred_obj_pos", {VK::String}, VK::Position, true,
           "position of the referred object whose label matches the query"});
    c.add({"detect_referred_location", {}, VK::Position, true,
           "point in the scene cloud the user is pointing at"});
    c.add({"detect_referred_direction", {}, VK::Direction, true,
           "unit vector along the pointing finger"});
    c.add({"detect_hand_center_pos", {}, VK::Position, true,
           "centroid of the user's palm"});
    c.add({"move_gripper_to_pos", {VK::Position}, VK::Void, false,
           "move the gripper to a position"});
    c.add({"move_gripper_by_dir", {VK::Direction, VK::Scalar}, VK::Void, false,
           "move the gripper along a direction by a distance in meters"});
    c.add({"open_gripper", {}, VK::Void, false, "open the gripper"});
    c.add({"close_gripper", {}, VK::Void, false,
           "close the gripper, grasping any object at the gripper"});
    c.add({"pick_up_obj_at_pos", {VK::Position}, VK::Void, false,
           "pick up the object at a position"});
    c.add({"place_obj_at_pos", {VK::Position}, VK::Void, false,
           "place the held object at a position"});
    c.add({"open_drawer_at_pos", {VK::Position}, VK::Void, false,
           "open the drawer whose front is at a position"});
    c.add({"say", {VK::String}, VK::Void, false, "speak a sentence aloud"});
    c.add({"stop", {}, VK::Void, false, "halt all motion immediately"});
    c.add({"twist_gripper", {}, VK::Void, false,
           "rotate the gripper about its axis"});
    return c;
  }

 private:
  std::map<std::string, FunctionSpec> specs_;
};

struct Violation {
  enum class Kind {
    UnknownFunction,
    ArityViolation,
    UseBeforeBind,
    AssignFromVoid,
    KindMismatch,
  };
  Kind kind;
  int line = 0;
  std::string message;
};

inline const char* violation_kind_name(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::UnknownFunction: return "UnknownFunction";
    case Violation::Kind::ArityViolation: return "ArityViolation";
    case Violation::Kind::UseBeforeBind: return "UseBeforeBind";
    case Violation::Kind::AssignFromVoid: return "AssignFromVoid";
    case Violation::Kind::KindMismatch: return "KindMismatch";
  }
  return "UnknownFunction";
}

namespace detail {

// Deduces an expression's value kind against `env`, appending violations as
// it goes; Void marks an undeducible expression.
inline ValueKind check_expr(const Expr& e, const PrimitiveCatalog& catalog,
                            const std::map<std::string, ValueKind>& env,
                            int line, std::vector<Violation>& out) {
  if (std::holds_alternative<StringLit>(e.node)) return ValueKind::String;
  if (std::holds_alternative<NumberLit>(e.node)) return ValueKind::Scalar;
  if (const auto* id = std::get_if<Identifier>(&e.node)) {
    auto it = env.find(id->name);
    if (it == env.end()) {
      out.push_back({Violation::Kind::UseBeforeBind, line,
                     "identifier '" + id->name + "' used before binding"});
      return ValueKind::Void;
    }
    return it->second;
  }
  const Call& call = std::get<Call>(e.node);
  const FunctionSpec* spec = catalog.find(call.name);
  if (!spec) {
    out.push_back({Violation::Kind::UnknownFunction, line,
                   "unknown function '" + call.name + "'"});
    for (const auto& a : call.args) check_expr(a, catalog, env, line, out);
    return ValueKind::Void;
  }
  if (call.args.size() != spec->params.size()) {
    out.push_back(
        {Violation::Kind::ArityViolation, line,
         "'" + call.name + "' takes " + std::to_string(spec->params.size()) +
             " argument(s), got " + std::to_string(call.args.size())});
    for (const auto& a : call.args) check_expr(a, catalog, env, line, out);
    return spec->returns;
  }
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    ValueKind got = check_expr(call.args[i], catalog, env, line, out);
    if (got != ValueKind::Void && got != spec->params[i])
      out.push_back({Violation::Kind::KindMismatch, line,
                     "argument " + std::to_string(i + 1) + " of '" +
                         call.name + "' expects " +
                         value_kind_name(spec->params[i]) + ", got " +
                         value_kind_name(got)});
  }
  return spec->returns;
}

}  // namespace detail

inline std::vector<Violation> validate_policy(const PolicyProgram& prog,
                                              const PrimitiveCatalog& catalog) {
  std::vector<Violation> out;
  std::map<std::string, ValueKind> env;
  for (const auto& st : prog.statements) {
    if (std::holds_alternative<Comment>(st.node)) continue;
    if (const auto* a = std::get_if<Assign>(&st.node)) {
      ValueKind k =
          detail::check_expr(a->value, catalog, env, st.line, out);
      if (k == ValueKind::Void &&
          std::holds_alternative<Call>(a->value.node) &&
          catalog.find(std::get<Call>(a->value.node).name)) {
        out.push_back({Violation::Kind::AssignFromVoid, st.line,
                       "'" + a->name + "' assigned from a void call"});
      }
      env[a->name] = k;
    } else {
      detail::check_expr(Expr{std::get<ExprStatement>(st.node).call}, catalog,
                         env, st.line, out);
    }
  }
  return out;
}

namespace detail {

template <typename Fn>
void visit_calls(const Expr& e, Fn&& fn) {
  if (const auto* c = std::get_if<Call>(&e.node)) {
    fn(*c);
    for (const auto& a : c->args) visit_calls(a, fn);
  }
}

}  // namespace detail

// Invokes `fn` on every Call in the program, outermost first, in statement
// order.
template <typename Fn>
void for_each_call(const PolicyProgram& prog, Fn&& fn) {
  for (const auto& st : prog.statements) {
    if (const auto* a = std::get_if<Assign>(&st.node)) {
      detail::visit_calls(a->value, fn);
    } else if (const auto* e = std::get_if<ExprStatement>(&st.node)) {
      fn(e->call);
      for (const auto& arg : e->call.args) detail::visit_calls(arg, fn);
    }
  }
}

inline bool calls_function(const PolicyProgram& prog, std::string_view name) {
  bool found = false;
  for_each_call(prog, [&](const Call& c) { found |= (c.name == name); });
  return found;
}

// Kind of the first argument of the first call to `name`, resolved against
// the same environment rules the validator uses. Used by scoring harnesses.
inline std::optional<ValueKind> first_arg_kind(const PolicyProgram& prog,
                                               const PrimitiveCatalog& catalog,
                                               const std::string& name) {
  std::map<std::string, ValueKind> env;
  std::vector<Violation> scratch;
  for (const auto& st : prog.statements) {
    const Call* call = nullptr;
    if (const auto* a = std::get_if<Assign>(&st.node)) {
      ValueKind k = detail::check_expr(a->value, catalog, env, st.line, scratch);
      env[a->name] = k;
      if (const auto* c = std::get_if<Call>(&a->value.node))
        if (c->name == name) call = c;
    } else if (const auto* e = std::get_if<ExprStatement>(&st.node)) {
      if (e->call.name == name) call = &e->call;
    }
    if (call) {
      if (call->args.empty()) return ValueKind::Void;  // "no argument"
      return detail::check_expr(call->args[0], catalog, env, st.line, scratch);
    }
  }
  return std::nullopt;
}

}  // namespace giraf
