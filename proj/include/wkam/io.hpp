#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wkam/errors.hpp"
#include "wkam/grid.hpp"
#include "wkam/rates.hpp"

namespace wkam {

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes `text` to `path`, creating parent directories.
inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

/// `index,x[,y],value`, 17 significant digits.
inline std::string value_function_csv(const ValueFunction& u) {
  std::string s = u.grid.dim() == 1 ? "index,x,value\n" : "index,x,y,value\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto c = u.grid.coords(i);
    s += std::to_string(i) + "," + fmt17(c[0]) + ",";
    if (u.grid.dim() == 2) s += fmt17(c[1]) + ",";
    s += fmt17(u[i]) + "\n";
  }
  return s;
}

inline std::string errors_csv(const std::vector<SeriesPoint>& series) {
  std::string s = "n,error\n";
  for (const auto& p : series) s += std::to_string(p.n) + "," + fmt17(p.error) + "\n";
  return s;
}

/// `y_index,x_index,value` for every pair.
template <class Field>
void write_barrier_csv(const std::filesystem::path& path, const Field& b, std::size_t m) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "y_index,x_index,value\n";
  for (std::size_t y = 0; y < m; ++y)
    for (std::size_t x = 0; x < m; ++x) out << y << ',' << x << ',' << fmt17(b(y, x)) << '\n';
}

inline std::string report_text(const ConvergenceReport& r) {
  auto opt = [](bool has, double v) { return has ? fmt17(v) : std::string("na"); };
  std::string s;
  s += "system = " + r.system + "\n";
  s += "operator = " + r.op + "\n";
  s += "rho_meas = " + opt(r.exp_fit.has_value(), r.exp_fit ? r.exp_fit->rho : 0) + "\n";
  s += "p_meas = " + opt(r.pow_fit.has_value(), r.pow_fit ? r.pow_fit->p : 0) + "\n";
  s += "r2_exp = " + opt(r.exp_fit.has_value(), r.exp_fit ? r.exp_fit->r2 : 0) + "\n";
  s += "r2_pow = " + opt(r.pow_fit.has_value(), r.pow_fit ? r.pow_fit->r2 : 0) + "\n";
  s += "floor = " + fmt17(r.floor) + "\n";
  s += "window = " +
       (r.window_hi >= r.window_lo ? std::to_string(r.window_lo) + ".." + std::to_string(r.window_hi)
                                   : std::string("none")) +
       "\n";
  s += "fit_points = " + std::to_string(r.fit_points) + "\n";
  s += "n_per_axis = " + std::to_string(r.n_per_axis) + "\n";
  s += "steps_per_period = " + std::to_string(r.steps_per_period) + "\n";
  s += "c_est = " + fmt17(r.c_est) + "\n";
  s += "ubar_iterations = " + std::to_string(r.ubar_iterations) + "\n";
  if (r.probe) {
    s += "probe_node = " + std::to_string(*r.probe) + "\n";
    s += "ubar_probe = " + fmt17(r.ubar_probe) + "\n";
  }
  s += "mu = " + fmt17(r.mu) + "\n";
  s += "rho_over_mu = " + opt(r.exp_fit && r.mu > 0, r.exp_fit && r.mu > 0 ? r.exp_fit->rho / r.mu : 0) + "\n";
  if (!r.fit_note.empty()) s += "note = " + r.fit_note + "\n";
  return s;
}

}  // namespace wkam
