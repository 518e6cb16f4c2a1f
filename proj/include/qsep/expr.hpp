#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace qsep {

/// Syntax error, undeclared variable or component-count mismatch. `position`
/// is a byte offset into the source text.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Raised when evaluation hits a domain error (division by zero). The message
/// names the offending input.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable parsed expression over an ordered list of named real variables.
///
/// The grammar covers literals, variables, + - * /, unary minus, integer
/// powers, abs/min/max, `if <cmp> then <expr> else <expr>` and a top-level
/// vector `[e1, ..., ek]` for maps. Every `if` carries an `else`, so guards are
/// total by construction. Guard comparisons are exact floating comparisons.
///
/// Copies share the underlying tree; evaluation is const and reentrant.
class Expr {
 public:
  Expr() = default;

  static Expr parse(std::string_view source, std::vector<std::string> variables);

  /// Parses and requires exactly `output_dim` components (1 = scalar, a bare
  /// expression without brackets).
  static Expr parse(std::string_view source, std::vector<std::string> variables,
                    std::size_t output_dim);

  std::size_t arity() const;
  std::size_t output_dim() const;
  bool is_scalar() const { return output_dim() == 1; }
  const std::vector<std::string>& variables() const;

  /// Scalar evaluation; `args.size()` must equal arity().
  double eval(std::span<const double> args) const;
  void eval_into(std::span<const double> args, std::span<double> out) const;
  Eigen::VectorXd eval_vector(std::span<const double> args) const;

  /// True if component `component` references variable `variable`.
  bool depends_on(std::size_t component, std::size_t variable) const;

  /// Fully parenthesised source that parses back to an equivalent tree.
  std::string to_string() const;

  struct Tree;

 private:
  explicit Expr(std::shared_ptr<const Tree> tree) : tree_(std::move(tree)) {}
  const Tree& tree() const;

  std::shared_ptr<const Tree> tree_;
};

/// Formats a double so that parsing it back yields the same value.
std::string format_real(double value);

}  // namespace qsep
