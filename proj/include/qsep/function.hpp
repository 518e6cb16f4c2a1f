#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qsep/expr.hpp"

namespace qsep {

using Point = Eigen::VectorXd;
using Index = Eigen::Index;

/// h : R^n -> R. Either backed by a parsed Expr or by a composite callable
/// (linear combinations, pointwise max, grid infimum, ...).
class ScalarFn {
 public:
  using Callable = std::function<double(const Point&)>;

  ScalarFn() = default;
  ScalarFn(Index dim, Callable fn, std::string description);
  explicit ScalarFn(Expr expr);

  /// Parses `source` over `variables` as a scalar expression.
  static ScalarFn parse(const std::string& source, const std::vector<std::string>& variables);

  double operator()(const Point& x) const;

  Index dim() const { return dim_; }
  bool valid() const { return static_cast<bool>(fn_); }
  const std::string& description() const { return description_; }
  const std::optional<Expr>& expr() const { return expr_; }

 private:
  Index dim_ = 0;
  std::shared_ptr<const Callable> fn_;
  std::string description_;
  std::optional<Expr> expr_;
};

/// R^in -> R^out. Houses E (in = out = n) and explicit gradients.
class VectorMap {
 public:
  using Callable = std::function<Point(const Point&)>;

  VectorMap() = default;
  VectorMap(Index in_dim, Index out_dim, Callable fn, std::string description);
  explicit VectorMap(Expr expr);

  static VectorMap parse(const std::string& source, const std::vector<std::string>& variables,
                         Index out_dim);
  static VectorMap identity(Index n);

  Point operator()(const Point& x) const;

  Index in_dim() const { return in_dim_; }
  Index out_dim() const { return out_dim_; }
  bool valid() const { return static_cast<bool>(fn_); }
  const std::string& description() const { return description_; }
  const std::optional<Expr>& expr() const { return expr_; }

  /// Component i depends on input i only (or on nothing). Known for
  /// Expr-backed maps and the identity; other composite maps report false.
  bool is_separable() const;

 private:
  Index in_dim_ = 0;
  Index out_dim_ = 0;
  std::shared_ptr<const Callable> fn_;
  std::string description_;
  std::optional<Expr> expr_;
  bool separable_ = false;
};

/// Psi : R^n x R^n -> R^n, evaluated on the concatenation (a, b).
class PairMap {
 public:
  PairMap() = default;
  explicit PairMap(VectorMap joint);

  static PairMap parse(const std::string& source, const std::vector<std::string>& variables,
                       Index n);
  /// Psi(a, b) = a - b.
  static PairMap difference(Index n);

  Point operator()(const Point& a, const Point& b) const;

  Index dim() const { return joint_.out_dim(); }
  bool valid() const { return joint_.valid(); }
  const VectorMap& joint() const { return joint_; }
  const std::string& description() const { return joint_.description(); }

 private:
  VectorMap joint_;
};

using MapE = VectorMap;
using MapPsi = PairMap;

/// Default variable names: n = 1 -> {s}, n = 2 -> {s, t}, otherwise x1..xn.
std::vector<std::string> default_variables(Index n);

/// Names for a pair argument (a, b): every name suffixed with 1, then with 2.
std::vector<std::string> pair_variables(const std::vector<std::string>& variables);

Point concat(const Point& a, const Point& b);

}  // namespace qsep
