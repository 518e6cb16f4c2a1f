#include "qsep/function.hpp"

#include <stdexcept>

namespace qsep {

namespace {

std::span<const double> as_span(const Point& x) {
  return {x.data(), static_cast<std::size_t>(x.size())};
}

void require_dim(const char* who, Index expected, Index got) {
  if (expected != got) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " + std::to_string(got) + ")");
  }
}

}  // namespace

ScalarFn::ScalarFn(Index dim, Callable fn, std::string description)
    : dim_(dim),
      fn_(std::make_shared<const Callable>(std::move(fn))),
      description_(std::move(description)) {}

ScalarFn::ScalarFn(Expr expr)
    : dim_(static_cast<Index>(expr.arity())), description_(expr.to_string()), expr_(expr) {
  if (!expr.is_scalar()) throw std::invalid_argument("ScalarFn: expression is vector-valued");
  fn_ = std::make_shared<const Callable>(
      [e = std::move(expr)](const Point& x) { return e.eval(as_span(x)); });
}

ScalarFn ScalarFn::parse(const std::string& source, const std::vector<std::string>& variables) {
  return ScalarFn(Expr::parse(source, variables, 1));
}

double ScalarFn::operator()(const Point& x) const {
  require_dim("ScalarFn", dim_, x.size());
  return (*fn_)(x);
}

VectorMap::VectorMap(Index in_dim, Index out_dim, Callable fn, std::string description)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      fn_(std::make_shared<const Callable>(std::move(fn))),
      description_(std::move(description)) {}

VectorMap::VectorMap(Expr expr)
    : in_dim_(static_cast<Index>(expr.arity())),
      out_dim_(static_cast<Index>(expr.output_dim())),
      description_(expr.to_string()),
      expr_(expr) {
  fn_ = std::make_shared<const Callable>(
      [e = std::move(expr)](const Point& x) { return e.eval_vector(as_span(x)); });
}

VectorMap VectorMap::parse(const std::string& source, const std::vector<std::string>& variables,
                           Index out_dim) {
  return VectorMap(Expr::parse(source, variables, static_cast<std::size_t>(out_dim)));
}

VectorMap VectorMap::identity(Index n) {
  VectorMap m(n, n, [](const Point& x) { return x; }, "identity");
  m.separable_ = true;
  return m;
}

Point VectorMap::operator()(const Point& x) const {
  require_dim("VectorMap", in_dim_, x.size());
  return (*fn_)(x);
}

bool VectorMap::is_separable() const {
  if (separable_) return true;
  if (!expr_ || in_dim_ != out_dim_) return false;
  for (Index i = 0; i < out_dim_; ++i) {
    for (Index j = 0; j < in_dim_; ++j) {
      if (i != j && expr_->depends_on(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
        return false;
      }
    }
  }
  return true;
}

PairMap::PairMap(VectorMap joint) : joint_(std::move(joint)) {
  if (joint_.in_dim() != 2 * joint_.out_dim()) {
    throw std::invalid_argument("PairMap: joint map must take 2n inputs and return n outputs");
  }
}

PairMap PairMap::parse(const std::string& source, const std::vector<std::string>& variables,
                       Index n) {
  return PairMap(VectorMap::parse(source, variables, n));
}

PairMap PairMap::difference(Index n) {
  return PairMap(VectorMap(
      2 * n, n, [n](const Point& ab) -> Point { return ab.head(n) - ab.tail(n); }, "a - b"));
}

Point PairMap::operator()(const Point& a, const Point& b) const {
  return joint_(concat(a, b));
}

std::vector<std::string> default_variables(Index n) {
  if (n == 1) return {"s"};
  if (n == 2) return {"s", "t"};
  std::vector<std::string> out;
  for (Index i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

std::vector<std::string> pair_variables(const std::vector<std::string>& variables) {
  std::vector<std::string> out;
  for (const auto& v : variables) out.push_back(v + "1");
  for (const auto& v : variables) out.push_back(v + "2");
  return out;
}

Point concat(const Point& a, const Point& b) {
  Point out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace qsep
