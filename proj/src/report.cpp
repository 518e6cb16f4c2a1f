#include "qsep/report.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>

namespace qsep {

namespace {
std::atomic<double> g_tolerance{kRelTol};
}  // namespace

double default_tolerance() { return g_tolerance.load(); }

void set_default_tolerance(double rel_tol) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  g_tolerance = rel_tol;
}

namespace {

void add_required(std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string(what) + " values must lie in [0, 1]");
    }
  }
  values.insert(values.end(), {0.0, 0.5, 1.0});
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
}

}  // namespace

SamplingPlan& SamplingPlan::normalize() {
  if (grid_per_axis < 2) throw std::invalid_argument("grid_per_axis must be at least 2");
  if (random_pairs < 0) throw std::invalid_argument("random_pairs must be non-negative");
  add_required(alpha_values, "alpha");
  add_required(lambda_values, "lambda");
  return *this;
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Certified: return "certified_on_samples";
    case Status::Refuted: return "refuted";
    case Status::TheoremViolation: return "theorem_violation";
    case Status::HypothesisFailed: return "hypothesis_failed";
  }
  return "unknown";
}

Status status_from_string(std::string_view text) {
  for (Status s : {Status::Certified, Status::Refuted, Status::TheoremViolation,
                   Status::HypothesisFailed}) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown report status '" + std::string(text) + "'");
}

const CertReport* CertReport::find(std::string_view property_name) const {
  if (property == property_name) return this;
  for (const auto& sub : sub_reports) {
    if (const CertReport* hit = sub.find(property_name)) return hit;
  }
  return nullptr;
}

bool contains_theorem_violation(const CertReport& report) {
  if (report.status == Status::TheoremViolation) return true;
  return std::any_of(report.sub_reports.begin(), report.sub_reports.end(),
                     [](const CertReport& r) { return contains_theorem_violation(r); });
}

int exit_code(const CertReport& report) {
  if (contains_theorem_violation(report)) return 3;
  return report.status == Status::Certified ? 0 : 2;
}

nlohmann::json point_to_json(const Point& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < p.size(); ++i) arr.push_back(p[i]);
  return arr;
}

Point point_from_json(const nlohmann::json& j) {
  if (j.is_number()) {
    Point p(1);
    p[0] = j.get<double>();
    return p;
  }
  Point p(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<Index>(i)] = j.at(i).get<double>();
  return p;
}

void to_json(nlohmann::json& j, const Probe& p) {
  j = {{"s", point_to_json(p.s)}, {"t", point_to_json(p.t)}, {"alpha", p.alpha},
       {"lambda", p.lambda}};
}

void from_json(const nlohmann::json& j, Probe& p) {
  p.s = point_from_json(j.at("s"));
  p.t = point_from_json(j.at("t"));
  p.alpha = j.at("alpha").get<double>();
  p.lambda = j.value("lambda", 0.0);
}

void to_json(nlohmann::json& j, const SamplingPlan& plan) {
  j = {{"seed", plan.seed},
       {"grid_per_axis", plan.grid_per_axis},
       {"random_pairs", plan.random_pairs},
       {"alpha_values", plan.alpha_values},
       {"lambda_values", plan.lambda_values},
       {"max_grid_pairs", plan.max_grid_pairs}};
  if (!plan.probes.empty()) j["probes"] = plan.probes;
}

void from_json(const nlohmann::json& j, SamplingPlan& plan) {
  plan = SamplingPlan{};
  plan.seed = j.value("seed", plan.seed);
  plan.grid_per_axis = j.value("grid_per_axis", j.value("grid", plan.grid_per_axis));
  plan.random_pairs = j.value("random_pairs", plan.random_pairs);
  if (j.contains("alpha_values")) plan.alpha_values = j.at("alpha_values").get<std::vector<double>>();
  if (j.contains("lambda_values")) {
    plan.lambda_values = j.at("lambda_values").get<std::vector<double>>();
  }
  plan.max_grid_pairs = j.value("max_grid_pairs", plan.max_grid_pairs);
  if (j.contains("probes")) plan.probes = j.at("probes").get<std::vector<Probe>>();
}

void to_json(nlohmann::json& j, const Witness& w) {
  j = {{"s", point_to_json(w.s)}, {"t", point_to_json(w.t)}, {"alpha", w.alpha},
       {"lambda", w.lambda},      {"lhs", w.lhs},             {"rhs", w.rhs},
       {"margin", w.margin}};
}

void from_json(const nlohmann::json& j, Witness& w) {
  w.s = point_from_json(j.at("s"));
  w.t = point_from_json(j.at("t"));
  w.alpha = j.at("alpha").get<double>();
  w.lambda = j.at("lambda").get<double>();
  w.lhs = j.at("lhs").get<double>();
  w.rhs = j.at("rhs").get<double>();
  w.margin = j.at("margin").get<double>();
}

void to_json(nlohmann::json& j, const CertReport& r) {
  j = {{"property", r.property},
       {"status", std::string(to_string(r.status))},
       {"samples_checked", r.samples_checked},
       {"violations", r.violations},
       {"tolerance", r.tolerance},
       {"plan", r.plan},
       {"sub_reports", r.sub_reports}};
  if (r.witness) j["witness"] = *r.witness;
  if (!r.stage.empty()) j["stage"] = r.stage;
  if (!r.notes.empty()) j["notes"] = r.notes;
}

void from_json(const nlohmann::json& j, CertReport& r) {
  r = CertReport{};
  r.property = j.at("property").get<std::string>();
  r.status = status_from_string(j.at("status").get<std::string>());
  r.samples_checked = j.at("samples_checked").get<std::size_t>();
  r.violations = j.value("violations", std::size_t{0});
  r.tolerance = j.at("tolerance").get<double>();
  r.plan = j.at("plan").get<SamplingPlan>();
  if (j.contains("witness")) r.witness = j.at("witness").get<Witness>();
  r.stage = j.value("stage", std::string{});
  if (j.contains("notes")) r.notes = j.at("notes").get<std::vector<std::string>>();
  if (j.contains("sub_reports")) r.sub_reports = j.at("sub_reports").get<std::vector<CertReport>>();
}

}  // namespace qsep
