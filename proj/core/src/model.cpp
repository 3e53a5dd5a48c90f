#include "osn/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace osn {

namespace {

double gmax(double v) { return v > 0.0 ? 1.0 : 0.0; }
double gmin(double v) { return v <= 0.0 ? 1.0 : 0.0; }

template <class Fn>
GridFunction map_pointwise(std::span<const double> p, Fn fn) {
  GridFunction out(p.size());
  std::transform(p.begin(), p.end(), out.begin(), fn);
  return out;
}

}  // namespace

ControlBound::ControlBound(double value) {
  if (!(value > 0.0)) {
    throw std::invalid_argument("control bound must be positive");
  }
  if (std::isinf(value)) {
    return;
  }
  value_ = value;
  bounded_ = true;
}

std::string ControlBound::str() const {
  if (!bounded_) {
    return "inf";
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value_);
  return std::string(buf, res.ptr);
}

ControlBound ControlBound::parse(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "inf" || lower == "infinity" || lower == "+inf") {
    return unbounded();
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid control bound '" + text + "'");
  }
  if (used != text.size()) {
    throw std::invalid_argument("invalid control bound '" + text + "'");
  }
  return ControlBound(v);
}

NonlinearReaction NonlinearReaction::zero() {
  return {"zero", [](double) { return 0.0; }, [](double) { return 0.0; },
          [](double) { return 0.0; }};
}

NonlinearReaction NonlinearReaction::linear_plus_exp() {
  return {"y+exp(y)", [](double y) { return y + std::exp(y); },
          [](double y) { return 1.0 + std::exp(y); }, [](double y) { return std::exp(y); }};
}

void ProblemSpec::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("domain extents must be positive");
  }
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (!(q > 0.0)) throw std::invalid_argument("Robin parameter q must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (!(b >= 0.0)) throw std::invalid_argument("b must be nonnegative");
  if (!(c >= 0.0)) throw std::invalid_argument("c must be nonnegative");
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid needs at least one interior node");
  const auto n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  if (f.size() != n) throw std::invalid_argument("f has wrong size");
  if (y_d.size() != n) throw std::invalid_argument("y_d has wrong size");
  if (b > 0.0 && (!reaction.eval || !reaction.d1 || !reaction.d2)) {
    throw std::invalid_argument("reaction term is incomplete");
  }
}

ControlLaw::ControlLaw(double nu, double beta, ControlBound ubar)
    : nu_(nu), beta_(beta), ubar_(ubar) {
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
}

double mu(const ControlLaw& law, double p) {
  const double nu = law.nu();
  const double beta = law.beta();
  // soft-thresholding terms
  const double soft = std::max(0.0, (-beta - p) / nu) + std::min(0.0, (beta - p) / nu);
  if (!law.ubar().bounded()) {
    return soft;
  }
  // The two clamping terms subtract max(0, soft - ubar) and min(0, soft + ubar),
  // i.e. they clamp soft to [-ubar, ubar]. Clamping directly keeps |u| <= ubar
  // exact in floating point.
  const double ubar = law.ubar().value();
  return std::clamp(soft, -ubar, ubar);
}

GridFunction mu(const ControlLaw& law, std::span<const double> p) {
  return map_pointwise(p, [&](double v) { return mu(law, v); });
}

double mu_projection_reference(const ControlLaw& law, double p) {
  if (law.beta() != 0.0) {
    throw std::invalid_argument("projection formula requires beta == 0");
  }
  const double u = -p / law.nu();
  if (!law.ubar().bounded()) {
    return u;
  }
  return std::clamp(u, -law.ubar().value(), law.ubar().value());
}

GridFunction mu_projection_reference(const ControlLaw& law, std::span<const double> p) {
  if (law.beta() != 0.0) {
    throw std::invalid_argument("projection formula requires beta == 0");
  }
  return map_pointwise(p, [&](double v) { return mu_projection_reference(law, v); });
}

double dmu_multiplier(const ControlLaw& law, double p) {
  const double nu = law.nu();
  const double beta = law.beta();
  double s = -gmax(-beta - p) - gmin(beta - p);
  if (law.ubar().bounded()) {
    const double nu_ubar = nu * law.ubar().value();
    s += gmax(-p - beta - nu_ubar) + gmin(-p + beta + nu_ubar);
  }
  return s / nu;
}

GridFunction dmu_multiplier(const ControlLaw& law, std::span<const double> p) {
  return map_pointwise(p, [&](double v) { return dmu_multiplier(law, v); });
}

}  // namespace osn
