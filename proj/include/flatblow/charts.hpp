#pragma once

// Weighted blowups and their directional charts.
//
// A blowup replaces each blown variable v by r^{w_v} * vbar; a directional
// chart fixes one barred coordinate to +1 or -1 so the remaining barred
// coordinates and r become local coordinates. Charts are plain data, so
// chart changes are always computed through the ambient space.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "flatblow/errors.hpp"
#include "flatblow/odecore.hpp"

namespace flatblow {

struct BlowupSpec {
  std::vector<std::string> ambient_vars;
  std::vector<std::pair<std::string, int>> blown_vars;
  std::vector<std::string> untouched_vars;

  BlowupSpec() = default;
  BlowupSpec(std::vector<std::string> ambient, std::vector<std::pair<std::string, int>> blown,
             std::vector<std::string> untouched)
      : ambient_vars(std::move(ambient)), blown_vars(std::move(blown)), untouched_vars(std::move(untouched)) {
    validate();
  }

  void validate() const {
    std::set<std::string> seen;
    for (const auto& [name, w] : blown_vars) {
      if (w < 1) throw UsageError("blowup weight of '" + name + "' must be >= 1");
      if (!seen.insert(name).second) throw UsageError("variable '" + name + "' listed twice in blowup");
    }
    for (const auto& name : untouched_vars)
      if (!seen.insert(name).second) throw UsageError("variable '" + name + "' both blown and untouched");
    const std::set<std::string> amb(ambient_vars.begin(), ambient_vars.end());
    if (amb != seen || amb.size() != ambient_vars.size())
      throw UsageError("blown and untouched variables must cover the ambient variables exactly");
  }

  bool is_blown(const std::string& v) const {
    return std::any_of(blown_vars.begin(), blown_vars.end(), [&](const auto& b) { return b.first == v; });
  }
  int weight(const std::string& v) const {
    for (const auto& [name, w] : blown_vars)
      if (name == v) return w;
    throw UsageError("'" + v + "' is not a blown variable");
  }
  int ambient_index(const std::string& v) const {
    const auto it = std::find(ambient_vars.begin(), ambient_vars.end(), v);
    if (it == ambient_vars.end()) throw UsageError("'" + v + "' is not an ambient variable");
    return static_cast<int>(it - ambient_vars.begin());
  }
};

enum class LocalRole { radial, barred, untouched };

/// One chart-local coordinate and the ambient variable it stands for.
struct LocalVar {
  std::string name;
  LocalRole role;
  std::string ambient;  // empty for the radial coordinate
};

inline LocalVar radial(std::string name) { return {std::move(name), LocalRole::radial, ""}; }
inline LocalVar barred(std::string name, std::string ambient) {
  return {std::move(name), LocalRole::barred, std::move(ambient)};
}
inline LocalVar passthrough(std::string name) {
  std::string a = name;
  return {std::move(name), LocalRole::untouched, std::move(a)};
}
inline LocalVar passthrough(std::string name, std::string ambient) {
  return {std::move(name), LocalRole::untouched, std::move(ambient)};
}

class Chart {
 public:
  Chart() = default;
  Chart(std::string name, BlowupSpec spec, std::string fixed_var, int sign, std::vector<LocalVar> local)
      : name_(std::move(name)), spec_(std::move(spec)), fixed_(std::move(fixed_var)), sign_(sign),
        local_(std::move(local)) {
    if (sign_ != 1 && sign_ != -1) throw UsageError("chart sign must be +1 or -1");
    if (!spec_.is_blown(fixed_)) throw UsageError("fixed variable '" + fixed_ + "' is not blown");
    int radials = 0;
    std::set<std::string> covered;
    for (std::size_t i = 0; i < local_.size(); ++i) {
      const auto& lv = local_[i];
      if (lv.role == LocalRole::radial) {
        ++radials;
        radial_index_ = static_cast<int>(i);
        continue;
      }
      if (lv.ambient == fixed_) throw UsageError("fixed variable cannot be a local coordinate");
      const bool blown = spec_.is_blown(lv.ambient);
      if ((lv.role == LocalRole::barred) != blown)
        throw UsageError("local '" + lv.name + "' has a role inconsistent with the blowup");
      if (!covered.insert(lv.ambient).second) throw UsageError("ambient '" + lv.ambient + "' covered twice");
    }
    if (radials != 1) throw UsageError("a chart needs exactly one radial coordinate");
    if (covered.size() + 1 != spec_.ambient_vars.size())
      throw UsageError("chart '" + name_ + "' does not cover every ambient variable");
    for (const auto& v : spec_.ambient_vars)
      if (v != fixed_ && !covered.count(v)) throw UsageError("chart misses ambient '" + v + "'");
  }

  const std::string& name() const { return name_; }
  const BlowupSpec& spec() const { return spec_; }
  const std::string& fixed_var() const { return fixed_; }
  int sign() const { return sign_; }
  const std::vector<LocalVar>& local_vars() const { return local_; }
  std::vector<std::string> local_names() const {
    std::vector<std::string> out;
    for (const auto& lv : local_) out.push_back(lv.name);
    return out;
  }
  int radial_index() const { return radial_index_; }
  int dim() const { return static_cast<int>(local_.size()); }
  int local_index(const std::string& name) const {
    for (std::size_t i = 0; i < local_.size(); ++i)
      if (local_[i].name == name) return static_cast<int>(i);
    throw UsageError("chart '" + name_ + "' has no coordinate '" + name + "'");
  }

  State to_ambient(const State& p) const {
    check_dim(p, dim(), "local");
    const double r = p[radial_index_];
    if (r < 0.0) throw NotInChart("negative radial coordinate in chart '" + name_ + "'");
    State a(static_cast<Eigen::Index>(spec_.ambient_vars.size()));
    a[spec_.ambient_index(fixed_)] = sign_ * ipow(r, spec_.weight(fixed_));
    for (std::size_t i = 0; i < local_.size(); ++i) {
      const auto& lv = local_[i];
      if (lv.role == LocalRole::radial) continue;
      const int k = spec_.ambient_index(lv.ambient);
      a[k] = lv.role == LocalRole::barred ? ipow(r, spec_.weight(lv.ambient)) * p[static_cast<Eigen::Index>(i)]
                                          : p[static_cast<Eigen::Index>(i)];
    }
    return a;
  }

  State to_chart(const State& a) const {
    check_dim(a, static_cast<int>(spec_.ambient_vars.size()), "ambient");
    const double v = sign_ * a[spec_.ambient_index(fixed_)];
    if (!(v > 0.0))
      throw NotInChart("point not in chart '" + name_ + "': " + fixed_ + " must be " +
                       (sign_ > 0 ? "positive" : "negative"));
    const double r = iroot(v, spec_.weight(fixed_));
    State p(dim());
    for (std::size_t i = 0; i < local_.size(); ++i) {
      const auto& lv = local_[i];
      const auto ii = static_cast<Eigen::Index>(i);
      if (lv.role == LocalRole::radial) {
        p[ii] = r;
      } else {
        const double x = a[spec_.ambient_index(lv.ambient)];
        p[ii] = lv.role == LocalRole::barred ? x / ipow(r, spec_.weight(lv.ambient)) : x;
      }
    }
    return p;
  }

  /// Image of a chart-local tangent vector v at p under the blow-down map.
  State pushforward(const State& p, const State& v) const {
    check_dim(p, dim(), "local");
    check_dim(v, dim(), "tangent");
    const double r = p[radial_index_];
    const double rdot = v[radial_index_];
    State out(static_cast<Eigen::Index>(spec_.ambient_vars.size()));
    const int wf = spec_.weight(fixed_);
    out[spec_.ambient_index(fixed_)] = sign_ * wf * ipow(r, wf - 1) * rdot;
    for (std::size_t i = 0; i < local_.size(); ++i) {
      const auto& lv = local_[i];
      const auto ii = static_cast<Eigen::Index>(i);
      if (lv.role == LocalRole::radial) continue;
      const int k = spec_.ambient_index(lv.ambient);
      if (lv.role == LocalRole::untouched) {
        out[k] = v[ii];
      } else {
        const int w = spec_.weight(lv.ambient);
        out[k] = w * ipow(r, w - 1) * rdot * p[ii] + ipow(r, w) * v[ii];
      }
    }
    return out;
  }

 private:
  static double ipow(double r, int w) {
    double out = 1.0;
    for (int i = 0; i < w; ++i) out *= r;
    return out;
  }
  static double iroot(double v, int w) {
    if (w == 1) return v;
    if (w == 2) return std::sqrt(v);
    if (w == 3) return std::cbrt(v);
    return std::pow(v, 1.0 / w);
  }
  static void check_dim(const State& s, int n, const char* what) {
    if (s.size() != n)
      throw UsageError(std::string(what) + " point has dimension " + std::to_string(s.size()) + ", expected " +
                       std::to_string(n));
  }

  std::string name_;
  BlowupSpec spec_;
  std::string fixed_;
  int sign_ = 1;
  std::vector<LocalVar> local_;
  int radial_index_ = -1;
};

/// A chart-local vector field obtained from an ambient field by pull-back,
/// an optional time rescaling, and division by r^divisor_power.
struct DesingularizedField {
  Chart chart;
  OdeSystem rhs;
  int divisor_power = 1;
  ScalarFn time_factor;  // evaluated at the blow-down image; empty means 1
};

inline State chart_to_ambient(const Chart& chart, const State& p) { return chart.to_ambient(p); }
inline State ambient_to_chart(const Chart& chart, const State& p) { return chart.to_chart(p); }

inline State transition(const Chart& from, const Chart& to, const State& p) {
  if (from.spec().ambient_vars != to.spec().ambient_vars)
    throw UsageError("charts '" + from.name() + "' and '" + to.name() + "' belong to different blowups");
  return to.to_chart(from.to_ambient(p));
}

/// Worst relative discrepancy between the ambient field and the pushed-forward
/// chart field, r^k * time_factor * D(blow-down) * local_rhs, over `samples`.
inline double desingularization_check(const DesingularizedField& field, const OdeSystem& ambient,
                                      const std::vector<State>& samples) {
  if (field.rhs.dim() != field.chart.dim())
    throw UsageError("desingularized field dimension does not match chart '" + field.chart.name() + "'");
  double worst = 0.0;
  for (const auto& p : samples) {
    const double r = p[field.chart.radial_index()];
    if (!(r > 0.0)) throw DomainError("desingularization_check needs samples with r > 0");
    if (!field.rhs.admissible(p)) throw DomainError("sample outside the chart field's domain");
    const State a = field.chart.to_ambient(p);
    if (!ambient.admissible(a)) throw DomainError("sample blows down outside the ambient domain");
    State push = field.chart.pushforward(p, field.rhs(p)) * std::pow(r, field.divisor_power);
    if (field.time_factor) push *= field.time_factor(a);
    const State ref = ambient(a);
    const double scale = std::max(ref.lpNorm<Eigen::Infinity>(), push.lpNorm<Eigen::Infinity>());
    if (scale == 0.0) continue;
    worst = std::max(worst, (ref - push).lpNorm<Eigen::Infinity>() / scale);
  }
  return worst;
}

}  // namespace flatblow
