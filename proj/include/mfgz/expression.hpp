#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfgz/measure.hpp"

namespace mfgz {

/// Variables an expression may reference. Indices are 1-based in source text
/// (x1, u2, ...) and 0-based everywhere in code.
enum class VarKind { time, x, u, v, z };

/// Values bound to the variables during one evaluation.
struct EvalContext {
  double t = 0.0;
  std::span<const double> x;
  std::span<const double> u;
  std::span<const double> v;
  std::span<const double> z;
  const MeasureFeatures* features = nullptr;
};

/// What an expression refers to; used to validate it against a game.
struct ExpressionInfo {
  bool uses_time = false;
  std::size_t x_count = 0;  // one past the largest x index used
  std::size_t u_count = 0;
  std::size_t v_count = 0;
  std::size_t z_count = 0;
  std::size_t mean_components = 0;  // one past the largest feature(mean, k) component
  FeatureMask features;
};

/// Small arithmetic language: + - * / ^, unary minus, sin cos exp sqrt abs,
/// constants (numbers, pi), variables t x<k> u<k> v<k> z<k>, and
/// feature(mean[, k]) / feature(second_moment) / feature(mean_sin).
///
/// Immutable after parsing; evaluation is a pure postfix walk.
class Expression {
 public:
  /// The constant 0.
  Expression();

  static Expression parse(std::string_view source);
  static Expression constant(double value);

  double evaluate(const EvalContext& ctx) const;

  /// Symbolic partial derivative with respect to one variable. Throws
  /// InvalidArgument on abs, feature nodes, or a non-constant exponent.
  Expression derivative(VarKind kind, std::size_t index) const;

  const ExpressionInfo& info() const noexcept { return info_; }
  std::string to_string() const;

  /// True if the expression is a literal constant (no variables or features).
  bool is_constant() const noexcept;

 private:
  enum class Op { constant, variable, feature, neg, add, sub, mul, div, pow, sin, cos, exp, sqrt, abs };

  struct Node {
    Op op = Op::constant;
    double value = 0.0;
    VarKind var = VarKind::x;
    Feature feature = Feature::mean;
    std::size_t index = 0;
    int a = -1;
    int b = -1;
  };

  class Parser;

  int add_node(Node n);
  int derive(const Expression& src, int node, VarKind kind, std::size_t index);
  int copy_subtree(const Expression& src, int node);
  int make_binary(Op op, int a, int b);
  int make_unary(Op op, int a);
  int make_constant(double value);
  void finalize();
  void emit_postfix(int node);
  void print(int node, std::string& out) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::vector<Node> program_;
  std::size_t stack_depth_ = 0;
  ExpressionInfo info_;
};

inline Expression parse_expression(std::string_view source) { return Expression::parse(source); }

}  // namespace mfgz
