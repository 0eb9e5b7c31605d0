#include "mfgz/expression.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "mfgz/errors.hpp"

namespace mfgz {

namespace {

constexpr std::size_t kMaxStack = 256;

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

// Recursive-descent parser. Line and column are tracked so errors point at the
// offending token.
class Expression::Parser {
 public:
  Parser(std::string_view src, Expression& out) : src_(src), out_(out) {}

  int parse_all() {
    skip_space();
    if (at_end()) fail("empty expression");
    const int root = parse_sum();
    skip_space();
    if (!at_end()) fail(std::string("unexpected '") + src_[pos_] + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, column_); }

  bool at_end() const { return pos_ >= src_.size(); }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  bool accept(char c) {
    skip_space();
    if (!at_end() && src_[pos_] == c) {
      advance();
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (at_end()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "' but found '" + src_[pos_] + "'");
    }
  }

  int parse_sum() {
    int lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = out_.make_binary(Op::add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = out_.make_binary(Op::sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  int parse_product() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = out_.make_binary(Op::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = out_.make_binary(Op::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (accept('-')) return out_.make_unary(Op::neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (accept('^')) return out_.make_binary(Op::pow, base, parse_unary());
    return base;
  }

  std::string read_identifier() {
    std::string id;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      id += src_[pos_];
      advance();
    }
    return id;
  }

  int parse_primary() {
    skip_space();
    if (at_end()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      advance();
      const int inner = parse_sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  int parse_number() {
    const std::size_t start_col = column_;
    std::string text(src_.substr(pos_));
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    const std::size_t used = static_cast<std::size_t>(end - text.c_str());
    if (used == 0) {
      column_ = start_col;
      fail("malformed number");
    }
    for (std::size_t k = 0; k < used; ++k) advance();
    return out_.make_constant(value);
  }

  int parse_identifier() {
    const std::size_t id_line = line_;
    const std::size_t id_col = column_;
    const std::string id = read_identifier();
    auto fail_here = [&](const std::string& msg) { throw ParseError(msg, id_line, id_col); };

    skip_space();
    const bool call = !at_end() && src_[pos_] == '(';
    if (call) {
      if (id == "feature") return parse_feature(id_line, id_col);
      Op op;
      if (id == "sin") op = Op::sin;
      else if (id == "cos") op = Op::cos;
      else if (id == "exp") op = Op::exp;
      else if (id == "sqrt") op = Op::sqrt;
      else if (id == "abs") op = Op::abs;
      else fail_here("unknown function '" + id + "'");
      advance();
      const int arg = parse_sum();
      if (accept(',')) fail_here("function '" + id + "' takes exactly one argument");
      expect(')');
      return out_.make_unary(op, arg);
    }

    if (id == "t") {
      Node n;
      n.op = Op::variable;
      n.var = VarKind::time;
      return out_.add_node(n);
    }
    if (id == "pi") return out_.make_constant(M_PI);
    if (id == "sin" || id == "cos" || id == "exp" || id == "sqrt" || id == "abs" || id == "feature")
      fail_here("function '" + id + "' requires an argument list");
    if (id.size() >= 2 && (id[0] == 'x' || id[0] == 'u' || id[0] == 'v' || id[0] == 'z')) {
      bool digits = true;
      for (std::size_t k = 1; k < id.size(); ++k) digits &= std::isdigit(static_cast<unsigned char>(id[k])) != 0;
      if (digits) {
        const long k = std::stol(id.substr(1));
        if (k < 1) fail_here("variable indices start at 1: '" + id + "'");
        Node n;
        n.op = Op::variable;
        n.var = id[0] == 'x' ? VarKind::x : id[0] == 'u' ? VarKind::u : id[0] == 'v' ? VarKind::v : VarKind::z;
        n.index = static_cast<std::size_t>(k - 1);
        return out_.add_node(n);
      }
    }
    throw ParseError("unknown identifier '" + id + "'", id_line, id_col);
  }

  int parse_feature(std::size_t id_line, std::size_t id_col) {
    expect('(');
    skip_space();
    const std::string name = read_identifier();
    Feature f;
    try {
      f = feature_from_name(name);
    } catch (const InvalidArgument&) {
      throw ParseError("unknown feature '" + name + "'", id_line, id_col);
    }
    std::size_t component = 0;
    if (accept(',')) {
      if (f != Feature::mean) throw ParseError("feature '" + name + "' takes no component", id_line, id_col);
      skip_space();
      std::string digits;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits += src_[pos_];
        advance();
      }
      if (digits.empty() || std::stol(digits) < 1)
        throw ParseError("feature component must be a positive integer", id_line, id_col);
      component = static_cast<std::size_t>(std::stol(digits) - 1);
      if (accept(',')) throw ParseError("feature takes at most two arguments", id_line, id_col);
    }
    expect(')');
    Node n;
    n.op = Op::feature;
    n.feature = f;
    n.index = component;
    return out_.add_node(n);
  }

  std::string_view src_;
  Expression& out_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

Expression::Expression() {
  root_ = make_constant(0.0);
  finalize();
}

Expression Expression::constant(double value) {
  Expression e;
  e.nodes_.clear();
  e.root_ = e.make_constant(value);
  e.finalize();
  return e;
}

Expression Expression::parse(std::string_view source) {
  Expression e;
  e.nodes_.clear();
  Parser parser(source, e);
  e.root_ = parser.parse_all();
  e.finalize();
  return e;
}

int Expression::add_node(Node n) {
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size() - 1);
}

int Expression::make_constant(double value) {
  Node n;
  n.op = Op::constant;
  n.value = value;
  return add_node(n);
}

int Expression::make_unary(Op op, int a) {
  Node n;
  n.op = op;
  n.a = a;
  return add_node(n);
}

int Expression::make_binary(Op op, int a, int b) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  return add_node(n);
}

void Expression::finalize() {
  program_.clear();
  info_ = ExpressionInfo{};
  emit_postfix(root_);
  // Stack depth needed by the postfix program.
  std::size_t depth = 0;
  stack_depth_ = 0;
  for (const Node& n : program_) {
    switch (n.op) {
      case Op::constant:
      case Op::variable:
      case Op::feature:
        ++depth;
        break;
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::div:
      case Op::pow:
        --depth;
        break;
      default:
        break;
    }
    stack_depth_ = std::max(stack_depth_, depth);
  }
  if (stack_depth_ > kMaxStack) throw ParseError("expression nests too deeply", 1, 1);
}

void Expression::emit_postfix(int node) {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.a >= 0) emit_postfix(n.a);
  if (n.b >= 0) emit_postfix(n.b);
  program_.push_back(n);
  switch (n.op) {
    case Op::variable:
      switch (n.var) {
        case VarKind::time: info_.uses_time = true; break;
        case VarKind::x: info_.x_count = std::max(info_.x_count, n.index + 1); break;
        case VarKind::u: info_.u_count = std::max(info_.u_count, n.index + 1); break;
        case VarKind::v: info_.v_count = std::max(info_.v_count, n.index + 1); break;
        case VarKind::z: info_.z_count = std::max(info_.z_count, n.index + 1); break;
      }
      break;
    case Op::feature:
      if (n.feature == Feature::mean) {
        info_.features.mean = true;
        info_.mean_components = std::max(info_.mean_components, n.index + 1);
      } else if (n.feature == Feature::second_moment) {
        info_.features.second_moment = true;
      } else {
        info_.features.mean_sin = true;
      }
      break;
    default:
      break;
  }
}

bool Expression::is_constant() const noexcept {
  return program_.size() == 1 && program_.front().op == Op::constant;
}

double Expression::evaluate(const EvalContext& ctx) const {
  std::array<double, kMaxStack> stack;
  std::size_t top = 0;
  for (const Node& n : program_) {
    switch (n.op) {
      case Op::constant:
        stack[top++] = n.value;
        break;
      case Op::variable: {
        std::span<const double> src;
        switch (n.var) {
          case VarKind::time:
            stack[top++] = ctx.t;
            continue;
          case VarKind::x: src = ctx.x; break;
          case VarKind::u: src = ctx.u; break;
          case VarKind::v: src = ctx.v; break;
          case VarKind::z: src = ctx.z; break;
        }
        if (n.index >= src.size()) throw EvalError("expression variable index out of range");
        stack[top++] = src[n.index];
        break;
      }
      case Op::feature: {
        if (ctx.features == nullptr) throw EvalError("expression needs measure features");
        double value = 0.0;
        if (n.feature == Feature::mean) {
          if (n.index >= ctx.features->mean.size()) throw EvalError("feature(mean) not available");
          value = ctx.features->mean[n.index];
        } else if (n.feature == Feature::second_moment) {
          value = ctx.features->second_moment;
        } else {
          value = ctx.features->mean_sin;
        }
        stack[top++] = value;
        break;
      }
      case Op::neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::sin: stack[top - 1] = std::sin(stack[top - 1]); break;
      case Op::cos: stack[top - 1] = std::cos(stack[top - 1]); break;
      case Op::exp: stack[top - 1] = std::exp(stack[top - 1]); break;
      case Op::sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
      case Op::abs: stack[top - 1] = std::abs(stack[top - 1]); break;
      case Op::add: --top; stack[top - 1] += stack[top]; break;
      case Op::sub: --top; stack[top - 1] -= stack[top]; break;
      case Op::mul: --top; stack[top - 1] *= stack[top]; break;
      case Op::div:
        --top;
        if (stack[top] == 0.0) throw EvalError("division by zero");
        stack[top - 1] /= stack[top];
        break;
      case Op::pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
    }
  }
  const double result = stack[0];
  if (!std::isfinite(result)) throw EvalError("expression produced a non-finite value");
  return result;
}

int Expression::copy_subtree(const Expression& src, int node) {
  Node n = src.nodes_[static_cast<std::size_t>(node)];
  if (n.a >= 0) n.a = copy_subtree(src, n.a);
  if (n.b >= 0) n.b = copy_subtree(src, n.b);
  return add_node(n);
}

int Expression::derive(const Expression& src, int node, VarKind kind, std::size_t index) {
  const Node& n = src.nodes_[static_cast<std::size_t>(node)];
  auto is_zero = [&](int k) {
    const Node& m = nodes_[static_cast<std::size_t>(k)];
    return m.op == Op::constant && m.value == 0.0;
  };
  auto is_one = [&](int k) {
    const Node& m = nodes_[static_cast<std::size_t>(k)];
    return m.op == Op::constant && m.value == 1.0;
  };
  auto mul = [&](int a, int b) {
    if (is_zero(a) || is_zero(b)) return make_constant(0.0);
    if (is_one(a)) return b;
    if (is_one(b)) return a;
    return make_binary(Op::mul, a, b);
  };
  auto add = [&](int a, int b) {
    if (is_zero(a)) return b;
    if (is_zero(b)) return a;
    return make_binary(Op::add, a, b);
  };
  auto sub = [&](int a, int b) {
    if (is_zero(b)) return a;
    if (is_zero(a)) return make_unary(Op::neg, b);
    return make_binary(Op::sub, a, b);
  };

  switch (n.op) {
    case Op::constant:
      return make_constant(0.0);
    case Op::variable:
      return make_constant(n.var == kind && (kind == VarKind::time || n.index == index) ? 1.0 : 0.0);
    case Op::feature:
      throw InvalidArgument("cannot differentiate through feature(" + std::string(feature_name(n.feature)) + ")");
    case Op::abs:
      throw InvalidArgument("cannot differentiate abs()");
    case Op::neg: {
      const int da = derive(src, n.a, kind, index);
      return is_zero(da) ? da : make_unary(Op::neg, da);
    }
    case Op::add:
      return add(derive(src, n.a, kind, index), derive(src, n.b, kind, index));
    case Op::sub:
      return sub(derive(src, n.a, kind, index), derive(src, n.b, kind, index));
    case Op::mul: {
      const int da = derive(src, n.a, kind, index);
      const int db = derive(src, n.b, kind, index);
      return add(mul(da, copy_subtree(src, n.b)), mul(copy_subtree(src, n.a), db));
    }
    case Op::div: {
      // (a/b)' = a'/b - a b' / b^2
      const int da = derive(src, n.a, kind, index);
      const int db = derive(src, n.b, kind, index);
      int left = is_zero(da) ? make_constant(0.0) : make_binary(Op::div, da, copy_subtree(src, n.b));
      if (is_zero(db)) return left;
      const int b2 = make_binary(Op::mul, copy_subtree(src, n.b), copy_subtree(src, n.b));
      return sub(left, make_binary(Op::div, mul(copy_subtree(src, n.a), db), b2));
    }
    case Op::pow: {
      const Node& e = src.nodes_[static_cast<std::size_t>(n.b)];
      if (e.op != Op::constant) throw InvalidArgument("cannot differentiate a non-constant exponent");
      const int da = derive(src, n.a, kind, index);
      if (is_zero(da)) return da;
      const int reduced = make_binary(Op::pow, copy_subtree(src, n.a), make_constant(e.value - 1.0));
      return mul(mul(make_constant(e.value), reduced), da);
    }
    case Op::sin:
      return mul(make_unary(Op::cos, copy_subtree(src, n.a)), derive(src, n.a, kind, index));
    case Op::cos:
      return mul(make_unary(Op::neg, make_unary(Op::sin, copy_subtree(src, n.a))),
                 derive(src, n.a, kind, index));
    case Op::exp:
      return mul(make_unary(Op::exp, copy_subtree(src, n.a)), derive(src, n.a, kind, index));
    case Op::sqrt: {
      const int da = derive(src, n.a, kind, index);
      if (is_zero(da)) return da;
      const int denom = make_binary(Op::mul, make_constant(2.0), make_unary(Op::sqrt, copy_subtree(src, n.a)));
      return make_binary(Op::div, da, denom);
    }
  }
  throw InvalidArgument("derivative: unknown node");
}

Expression Expression::derivative(VarKind kind, std::size_t index) const {
  Expression out;
  out.nodes_.clear();
  out.root_ = out.derive(*this, root_, kind, index);
  out.finalize();
  return out;
}

void Expression::print(int node, std::string& out) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  auto binary = [&](const char* sym) {
    out += '(';
    print(n.a, out);
    out += sym;
    print(n.b, out);
    out += ')';
  };
  auto call = [&](const char* name) {
    out += name;
    out += '(';
    print(n.a, out);
    out += ')';
  };
  switch (n.op) {
    case Op::constant: out += format_number(n.value); break;
    case Op::variable:
      switch (n.var) {
        case VarKind::time: out += 't'; return;
        case VarKind::x: out += 'x'; break;
        case VarKind::u: out += 'u'; break;
        case VarKind::v: out += 'v'; break;
        case VarKind::z: out += 'z'; break;
      }
      out += std::to_string(n.index + 1);
      break;
    case Op::feature:
      out += "feature(";
      out += feature_name(n.feature);
      if (n.feature == Feature::mean && n.index > 0) out += ", " + std::to_string(n.index + 1);
      out += ')';
      break;
    case Op::neg:
      out += "(-";
      print(n.a, out);
      out += ')';
      break;
    case Op::add: binary(" + "); break;
    case Op::sub: binary(" - "); break;
    case Op::mul: binary("*"); break;
    case Op::div: binary("/"); break;
    case Op::pow: binary("^"); break;
    case Op::sin: call("sin"); break;
    case Op::cos: call("cos"); break;
    case Op::exp: call("exp"); break;
    case Op::sqrt: call("sqrt"); break;
    case Op::abs: call("abs"); break;
  }
}

std::string Expression::to_string() const {
  std::string out;
  print(root_, out);
  return out;
}

}  // namespace mfgz
