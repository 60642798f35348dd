#pragma once

// Fully parenthesized modular expressions.
//
// A node is either a leaf operand (0-9) or a parenthesized group of two or
// more children joined by operators. Every operator inside one group has the
// same precedence (all of +/- or all *), so the text reads the same under
// ordinary precedence and under left-to-right evaluation.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "cotsup/core.hpp"

namespace cotsup {

struct Expr {
  int value = 0;
  std::vector<Expr> children;
  std::vector<char> ops;  // size() == children.size() - 1

  bool is_leaf() const { return children.empty(); }

  friend bool operator==(const Expr&, const Expr&) = default;
};

inline Expr make_leaf(int value) { return Expr{value, {}, {}}; }

inline Expr make_group(std::vector<Expr> children, std::vector<char> ops) {
  return Expr{0, std::move(children), std::move(ops)};
}

inline std::size_t leaf_count(const Expr& e) {
  if (e.is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : e.children) n += leaf_count(c);
  return n;
}

inline int nesting_depth(const Expr& e) {
  if (e.is_leaf()) return 0;
  int deepest = 0;
  for (const auto& c : e.children) deepest = std::max(deepest, nesting_depth(c));
  return deepest + 1;
}

inline void render_expr(const Expr& e, std::string& out) {
  if (e.is_leaf()) {
    out += std::to_string(e.value);
    return;
  }
  out.push_back('(');
  for (std::size_t i = 0; i < e.children.size(); ++i) {
    if (i > 0) {
      out.push_back(' ');
      out.push_back(e.ops[i - 1]);
      out.push_back(' ');
    }
    render_expr(e.children[i], out);
  }
  out.push_back(')');
}

inline std::string render_expr(const Expr& e) {
  std::string out;
  render_expr(e, out);
  return out;
}

// Post-order token stream: operands as digits, operators as "+", "-", "*".
// A group (c0 op1 c1 op2 c2) becomes c0 c1 op1 c2 op2.
inline void to_postfix(const Expr& e, std::vector<std::string>& out) {
  if (e.is_leaf()) {
    out.push_back(std::to_string(e.value));
    return;
  }
  to_postfix(e.children[0], out);
  for (std::size_t i = 1; i < e.children.size(); ++i) {
    to_postfix(e.children[i], out);
    out.emplace_back(1, e.ops[i - 1]);
  }
}

inline std::vector<std::string> to_postfix(const Expr& e) {
  std::vector<std::string> out;
  to_postfix(e, out);
  return out;
}

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Expr parse() {
    skip_ws();
    Expr e = parse_operand();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::MalformedPayload,
                "expression '" + std::string(text_) + "': " + why + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  // Accepts ASCII operators plus the UTF-8 multiplication and minus signs.
  bool read_op(char& op) {
    skip_ws();
    if (pos_ >= text_.size()) return false;
    const char c = text_[pos_];
    if (c == '+' || c == '-' || c == '*' || c == 'x') {
      op = c == 'x' ? '*' : c;
      ++pos_;
      return true;
    }
    if (text_.substr(pos_, 2) == "\xC3\x97") {  // ×
      op = '*';
      pos_ += 2;
      return true;
    }
    if (text_.substr(pos_, 3) == "\xE2\x88\x92") {  // −
      op = '-';
      pos_ += 3;
      return true;
    }
    return false;
  }

  Expr parse_operand() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end");
    if (text_[pos_] == '(') {
      ++pos_;
      std::vector<Expr> children;
      std::vector<char> ops;
      children.push_back(parse_operand());
      char op = 0;
      while (read_op(op)) {
        ops.push_back(op);
        children.push_back(parse_operand());
      }
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
      ++pos_;
      if (children.size() < 2) fail("group needs at least two operands");
      const bool multiplicative = ops.front() == '*';
      for (char o : ops) {
        if ((o == '*') != multiplicative) fail("mixed precedence inside one group");
      }
      return make_group(std::move(children), std::move(ops));
    }
    if (!std::isdigit(static_cast<unsigned char>(text_[pos_]))) fail("expected operand");
    const int v = text_[pos_++] - '0';
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      fail("operands are single digits");
    }
    return make_leaf(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expr(std::string_view text) { return detail::ExprParser(text).parse(); }

// Random group tree with exactly `operands` leaves and at most `max_depth`
// parenthesis levels. One group in three is multiplicative.
inline Expr random_expr(Rng& rng, std::size_t operands, int max_depth) {
  if (operands == 1) return make_leaf(uniform_int(rng, 0, 9));
  std::vector<std::size_t> parts;
  if (max_depth <= 1 || operands == 2) {
    parts.assign(operands, 1);
  } else {
    const std::size_t k =
        2 + uniform_below(rng, std::min<std::size_t>(operands, 4) - 1);
    // Random composition of `operands` into k positive parts: choose k-1
    // distinct cut points out of operands-1.
    std::vector<std::size_t> cuts;
    while (cuts.size() < k - 1) {
      const std::size_t c = 1 + uniform_below(rng, operands - 1);
      if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    std::size_t prev = 0;
    for (std::size_t c : cuts) {
      parts.push_back(c - prev);
      prev = c;
    }
    parts.push_back(operands - prev);
  }
  const bool multiplicative = uniform_below(rng, 3) == 0;
  std::vector<Expr> children;
  std::vector<char> ops;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    children.push_back(random_expr(rng, parts[i], max_depth - 1));
    if (i > 0) ops.push_back(multiplicative ? '*' : (uniform_below(rng, 2) == 0 ? '+' : '-'));
  }
  return make_group(std::move(children), std::move(ops));
}

}  // namespace cotsup
