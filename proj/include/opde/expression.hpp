#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "opde/error.hpp"

namespace opde {

/// Scalar expression in the variable t: numbers, t, pi, e, + - * / ^,
/// parentheses and exp, log, sqrt, sin, cos, tan, tanh, abs.
class Expression {
 public:
  explicit Expression(std::string source) : source_(std::move(source)) {
    pos_ = 0;
    root_ = parse_sum();
    skip_space();
    if (pos_ != source_.size()) fail("unexpected '" + std::string(1, source_[pos_]) + "'");
  }

  double operator()(double t) const { return root_->eval(t); }
  const std::string& source() const { return source_; }

 private:
  struct Node {
    virtual ~Node() = default;
    virtual double eval(double t) const = 0;
  };
  using Ptr = std::shared_ptr<const Node>;

  struct Constant final : Node {
    double value;
    explicit Constant(double v) : value(v) {}
    double eval(double) const override { return value; }
  };
  struct Variable final : Node {
    double eval(double t) const override { return t; }
  };
  struct Unary final : Node {
    std::function<double(double)> fn;
    Ptr arg;
    Unary(std::function<double(double)> f, Ptr a) : fn(std::move(f)), arg(std::move(a)) {}
    double eval(double t) const override { return fn(arg->eval(t)); }
  };
  struct Binary final : Node {
    char op;
    Ptr lhs, rhs;
    Binary(char o, Ptr l, Ptr r) : op(o), lhs(std::move(l)), rhs(std::move(r)) {}
    double eval(double t) const override {
      const double a = lhs->eval(t);
      const double b = rhs->eval(t);
      switch (op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: return std::pow(a, b);
      }
    }
  };

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::ConfigInvalid,
                "expression \"" + source_ + "\" at position " + std::to_string(pos_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < source_.size() && std::isspace(static_cast<unsigned char>(source_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < source_.size() && source_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Ptr parse_sum() {
    Ptr lhs = parse_product();
    for (;;) {
      if (accept('+')) lhs = std::make_shared<Binary>('+', lhs, parse_product());
      else if (accept('-')) lhs = std::make_shared<Binary>('-', lhs, parse_product());
      else return lhs;
    }
  }

  Ptr parse_product() {
    Ptr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = std::make_shared<Binary>('*', lhs, parse_unary());
      else if (accept('/')) lhs = std::make_shared<Binary>('/', lhs, parse_unary());
      else return lhs;
    }
  }

  Ptr parse_unary() {
    if (accept('-')) return std::make_shared<Unary>([](double x) { return -x; }, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  // Right-associative; binds tighter than unary minus on its left.
  Ptr parse_power() {
    Ptr base = parse_atom();
    if (accept('^')) return std::make_shared<Binary>('^', base, parse_unary());
    return base;
  }

  Ptr parse_atom() {
    skip_space();
    if (pos_ >= source_.size()) fail("unexpected end");
    if (accept('(')) {
      Ptr inner = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    const char c = source_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = source_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return std::make_shared<Constant>(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < source_.size() && std::isalnum(static_cast<unsigned char>(source_[pos_]))) ++pos_;
      const std::string name = source_.substr(start, pos_ - start);
      if (name == "t") return std::make_shared<Variable>();
      if (name == "pi") return std::make_shared<Constant>(std::numbers::pi);
      if (name == "e") return std::make_shared<Constant>(std::numbers::e);
      const auto fn = function(name);
      if (!fn) fail("unknown name '" + name + "'");
      if (!accept('(')) fail("expected '(' after " + name);
      Ptr arg = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return std::make_shared<Unary>(fn, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  static std::function<double(double)> function(const std::string& name) {
    if (name == "exp") return [](double x) { return std::exp(x); };
    if (name == "log") return [](double x) { return std::log(x); };
    if (name == "sqrt") return [](double x) { return std::sqrt(x); };
    if (name == "sin") return [](double x) { return std::sin(x); };
    if (name == "cos") return [](double x) { return std::cos(x); };
    if (name == "tan") return [](double x) { return std::tan(x); };
    if (name == "tanh") return [](double x) { return std::tanh(x); };
    if (name == "abs") return [](double x) { return std::abs(x); };
    return {};
  }

  std::string source_;
  std::size_t pos_ = 0;
  Ptr root_;
};

}  // namespace opde
