// SPDX-License-Identifier: MIT
//
// k-fields on a rectangular (u, v) grid, stored with u fastest. Periodic
// grids cover [0, L)² with spacing L/n; Dirichlet grids cover [0, L]² with
// spacing L/(n − 1) and hold their boundary nodes fixed.
#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slag/error.hpp"
#include "slag/kfield/closed_form.hpp"
#include "slag/kfield/system.hpp"

namespace slag {

enum class Boundary { periodic, dirichlet };

inline const char* to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "dirichlet"; }

inline Boundary parse_boundary(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "dirichlet") return Boundary::dirichlet;
  throw Error(ErrorCode::Configuration, "unknown boundary condition '" + s + "'");
}

struct KFields {
  SystemId system = SystemId::cpk2;
  Boundary bc = Boundary::periodic;
  int nu = 0, nv = 0;
  double hu = 0.0, hv = 0.0;
  std::array<std::vector<double>, 4> k;

  std::size_t nodes() const { return static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nu + i; }
  double u(int i) const { return i * hu; }
  double v(int j) const { return j * hv; }
  double& at(int m, int i, int j) { return k[m][index(i, j)]; }
  double at(int m, int i, int j) const { return k[m][index(i, j)]; }

  bool on_boundary(int i, int j) const {
    return bc == Boundary::dirichlet && (i == 0 || j == 0 || i == nu - 1 || j == nv - 1);
  }

  // Neighbour index with periodic wrap; Dirichlet callers stay in range.
  int wrap_u(int i) const { return (i % nu + nu) % nu; }
  int wrap_v(int j) const { return (j % nv + nv) % nv; }
};

/// Grid of zeros on the unit square (or side `length`).
inline KFields make_fields(SystemId sys, int nu, int nv, Boundary bc, double length = 1.0) {
  if (nu < 0 || nv < 0) throw Error(ErrorCode::Configuration, "grid sizes must be non-negative");
  if (!(length > 0.0)) throw Error(ErrorCode::Configuration, "grid side must be positive");
  KFields f;
  f.system = sys;
  f.bc = bc;
  f.nu = nu;
  f.nv = nv;
  const int du = std::max(1, bc == Boundary::periodic ? nu : nu - 1);
  const int dv = std::max(1, bc == Boundary::periodic ? nv : nv - 1);
  f.hu = length / du;
  f.hv = length / dv;
  for (auto& c : f.k) c.assign(f.nodes(), 0.0);
  return f;
}

/// Fills every node from fn(u, v) -> array of four values.
template <typename F>
void fill(KFields& f, F&& fn) {
  for (int j = 0; j < f.nv; ++j)
    for (int i = 0; i < f.nu; ++i) {
      const std::array<double, 4> val = fn(f.u(i), f.v(j));
      for (int m = 0; m < 4; ++m) f.at(m, i, j) = field_count(f.system) == 2 && m >= 2 ? 0.0 : val[m];
    }
}

/// Central-difference jet at an interior (or any periodic) node: first
/// derivatives and the three second derivatives, all second order.
inline KJet fd_jet(const KFields& f, int i, int j) {
  if (f.bc == Boundary::dirichlet && f.on_boundary(i, j))
    throw Error(ErrorCode::InsufficientStencil, "finite-difference jet requested on a Dirichlet boundary node");
  const int e = f.wrap_u(i + 1), w = f.wrap_u(i - 1), n = f.wrap_v(j + 1), s = f.wrap_v(j - 1);
  KJet out;
  for (int m = 0; m < 4; ++m) {
    const double c = f.at(m, i, j);
    out.k[m] = c;
    out.ku[m] = (f.at(m, e, j) - f.at(m, w, j)) / (2.0 * f.hu);
    out.kv[m] = (f.at(m, i, n) - f.at(m, i, s)) / (2.0 * f.hv);
    out.kuu[m] = (f.at(m, e, j) - 2.0 * c + f.at(m, w, j)) / (f.hu * f.hu);
    out.kvv[m] = (f.at(m, i, n) - 2.0 * c + f.at(m, i, s)) / (f.hv * f.hv);
    out.kuv[m] = (f.at(m, e, n) - f.at(m, e, s) - f.at(m, w, n) + f.at(m, w, s)) / (4.0 * f.hu * f.hv);
  }
  return out;
}

// ---- serialization ---------------------------------------------------------

inline std::string fields_csv(const KFields& f) {
  std::ostringstream os;
  os.precision(17);
  os << "u,v,k1,k2,k3,k4\n";
  for (int j = 0; j < f.nv; ++j)
    for (int i = 0; i < f.nu; ++i) {
      os << f.u(i) << ',' << f.v(j);
      for (int m = 0; m < 4; ++m) os << ',' << f.at(m, i, j);
      os << '\n';
    }
  return os.str();
}

inline nlohmann::json fields_metadata(const KFields& f) {
  return {{"system", to_string(f.system)},
          {"bc", to_string(f.bc)},
          {"grid", {f.nu, f.nv}},
          {"spacing", {f.hu, f.hv}},
          {"layout", "row-major, u fastest"}};
}

/// Reads the CSV written by fields_csv. Grid shape and spacing are recovered
/// from the distinct u and v values; `bc` is not recorded in the CSV.
inline KFields read_fields_csv(std::istream& in, SystemId sys, Boundary bc) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("u,v,k1,k2,k3,k4", 0) != 0)
    throw Error(ErrorCode::Configuration, "k-field CSV must start with header u,v,k1,k2,k3,k4");
  std::vector<std::array<double, 6>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 6> r{};
    std::istringstream ls(line);
    std::string cell;
    for (int c = 0; c < 6; ++c) {
      if (!std::getline(ls, cell, ',')) throw Error(ErrorCode::Configuration, "k-field CSV row has fewer than 6 columns");
      r[c] = std::stod(cell);
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw Error(ErrorCode::Configuration, "k-field CSV has no rows");
  int nu = 0;
  while (nu < static_cast<int>(rows.size()) && rows[nu][1] == rows[0][1]) ++nu;
  if (rows.size() % nu != 0) throw Error(ErrorCode::Configuration, "k-field CSV is not a full rectangular grid");
  const int nv = static_cast<int>(rows.size() / nu);
  KFields f = make_fields(sys, nu, nv, bc);
  if (nu > 1) f.hu = rows[1][0] - rows[0][0];
  if (nv > 1) f.hv = rows[nu][1] - rows[0][1];
  if (nu == 1) f.hu = f.hv;
  if (nv == 1) f.hv = f.hu;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int m = 0; m < 4; ++m) f.k[m][r] = rows[r][2 + m];
  return f;
}

inline KFields load_fields(const std::string& path, SystemId sys, Boundary bc) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Configuration, "cannot open k-field file '" + path + "'");
  return read_fields_csv(in, sys, bc);
}

}  // namespace slag
