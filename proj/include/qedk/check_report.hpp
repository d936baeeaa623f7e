#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "qedk/medium.hpp"

namespace qedk {

struct CheckSample {
  double t = 0.0;
  double value = 0.0;
  double target = 0.0;
  double residual = 0.0;
};

// Machine-readable outcome of one consistency check. `params` carries
// check-specific inputs (and, where relevant, pole lists as arrays of
// {re, im, multiplicity}).
struct CheckReport {
  std::string check;
  std::string medium;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::size_t grid_n = 0;
  double grid_omega_max = 0.0;
  std::vector<CheckSample> samples;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["check"] = check;
    j["medium"] = medium;
    j["params"] = params;
    j["grid"] = {{"n", grid_n}, {"omega_max", grid_omega_max}};
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : samples) {
      nlohmann::ordered_json e;
      e["t"] = s.t;
      e["value"] = s.value;
      e["target"] = s.target;
      e["residual"] = s.residual;
      arr.push_back(std::move(e));
    }
    j["samples"] = std::move(arr);
    j["max_residual"] = max_residual;
    j["tolerance"] = tolerance;
    j["pass"] = pass;
    return j;
  }
};

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string kernel_label(const SusceptibilityKernel& k) {
  if (std::holds_alternative<ZeroKernel>(k)) return "zero";
  if (const auto* b = std::get_if<BoxKernel>(&k))
    return "box(chi0=" + format_g17(b->chi0) + ", delta=" + format_g17(b->delta) + ")";
  if (const auto* s = std::get_if<StepKernel>(&k))
    return "step(beta=" + format_g17(s->beta) + ")";
  if (const auto* l = std::get_if<LorentzKernel>(&k))
    return "lorentz(omega0=" + format_g17(l->omega0) + ", gamma=" + format_g17(l->gamma) +
           ", omega_p=" + format_g17(l->omega_p) + ")";
  const auto& t = std::get<TabulatedKernel>(k);
  return "tabulated(n=" + std::to_string(t.samples.size()) +
         ", dt=" + format_g17(t.dt) + ")";
}

inline std::string medium_label(const MediumModel& m) {
  return "chi_e=" + kernel_label(m.chi_e) + "; chi_m=" + kernel_label(m.chi_m);
}

// add a pole list to a params object in the {re, im, multiplicity} form
inline nlohmann::ordered_json poles_to_json(const std::vector<RootCluster>& poles) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& p : poles) {
    nlohmann::ordered_json e;
    e["re"] = p.location.real();
    e["im"] = p.location.imag();
    e["multiplicity"] = p.multiplicity;
    arr.push_back(std::move(e));
  }
  return arr;
}

} // namespace qedk
