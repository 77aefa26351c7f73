#pragma once
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgesim {

// First-order RC thermal element: steady state t_ambient + r_th * power,
// exponential approach with time constant tau_th.
struct DeviceThermal {
  double r_th = 0.5;     // deg C per watt
  double tau_th = 60.0;  // seconds
  double t_ambient = 25.0;
};

struct ThermalModel {
  std::map<std::string, DeviceThermal> devices;
  DeviceThermal fallback;  // used for devices without an explicit entry

  const DeviceThermal& get(const std::string& id) const {
    auto it = devices.find(id);
    return it != devices.end() ? it->second : fallback;
  }
};

inline std::vector<std::string> validate_thermal(const ThermalModel& m) {
  std::vector<std::string> out;
  auto check = [&](const std::string& name, const DeviceThermal& d) {
    if (!(d.r_th > 0)) out.push_back(name + ": r_th must be > 0");
    if (!(d.tau_th > 0)) out.push_back(name + ": tau_th must be > 0");
  };
  check("fallback", m.fallback);
  for (const auto& [id, d] : m.devices) check(id, d);
  return out;
}

inline double step_temperature(const ThermalModel& model, const std::string& id, double t_now,
                               double power, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("step_temperature: dt must be > 0");
  const DeviceThermal& d = model.get(id);
  const double t_ss = d.t_ambient + d.r_th * power;
  return t_ss + (t_now - t_ss) * std::exp(-dt / d.tau_th);
}

}  // namespace edgesim
