#include "lemsfem/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <numbers>

#include "lemsfem/common.hpp"

namespace lemsfem {

namespace {

using Node = std::function<double(double, double)>;

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Node parse() {
    Node n = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression '" + text_ + "': " + msg + " at column " + std::to_string(pos_ + 1));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Node expression() {
    Node lhs = term();
    for (;;) {
      if (accept('+')) {
        Node rhs = term();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) + rhs(x, y); };
      } else if (accept('-')) {
        Node rhs = term();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) - rhs(x, y); };
      } else {
        return lhs;
      }
    }
  }

  Node term() {
    Node lhs = unary();
    for (;;) {
      if (accept('*')) {
        Node rhs = unary();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) * rhs(x, y); };
      } else if (accept('/')) {
        Node rhs = unary();
        lhs = [lhs, rhs](double x, double y) { return lhs(x, y) / rhs(x, y); };
      } else {
        return lhs;
      }
    }
  }

  Node unary() {
    if (accept('-')) {
      Node inner = unary();
      return [inner](double x, double y) { return -inner(x, y); };
    }
    if (accept('+')) return unary();
    return power();
  }

  Node power() {
    Node base = primary();
    if (accept('^')) {
      Node exponent = unary();
      return [base, exponent](double x, double y) { return std::pow(base(x, y), exponent(x, y)); };
    }
    return base;
  }

  Node primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (accept('(')) {
      Node inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      double value = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return [value](double, double) { return value; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      std::string name = text_.substr(start, pos_ - start);
      if (name == "x") return [](double x, double) { return x; };
      if (name == "y") return [](double, double y) { return y; };
      if (name == "pi") return [](double, double) { return std::numbers::pi; };
      static const std::map<std::string, double (*)(double)> functions = {
          {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
          {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
          {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
          {"abs", [](double v) { return std::abs(v); }},
      };
      auto it = functions.find(name);
      if (it == functions.end()) {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      if (!accept('(')) fail("expected '(' after " + name);
      Node arg = expression();
      if (!accept(')')) fail("expected ')'");
      auto fn = it->second;
      return [fn, arg](double x, double y) { return fn(arg(x, y)); };
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::function<double(double, double)> compile_expression(const std::string& text) {
  return Parser(text).parse();
}

}  // namespace lemsfem
