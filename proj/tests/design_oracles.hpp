#pragma once

// Exhaustive grid oracle for two-antenna, single-user designs. Beamformer
// and artificial noise are both rank one:
//   w = sqrt(p) (cos phi, sin phi e^{j psi}),  R_N = (P0 - p) u u^H,
// with u parameterized the same way. For fixed directions every constraint
// is affine in p and the eavesdropper SINR is increasing in p, so the best
// p is the smallest feasible one and only the four angles are gridded.
// The exhaustive grid is followed by a few zoom rounds around the best cell,
// since at high SNR the optimum sits in a narrow valley next to the null of
// the eavesdropper steering vector.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "secbeam/scenario.hpp"

namespace secbeam::testing {

struct GridOracle {
  double sinr_eve = std::numeric_limits<double>::infinity();
  double p = 0.0;
  bool feasible = false;
};

namespace detail {

struct OracleData {
  double p0, s2, g, gamma_b, gamma_s;
  ComplexVector v, a0;
  std::vector<ComplexVector> side;
};

struct Dir {
  double user, eve;
  std::vector<double> side;
};

inline Dir make_dir(const OracleData& d, double phi, double psi) {
  ComplexVector x(2);
  x << std::cos(phi), std::sin(phi) * std::polar(1.0, psi);
  Dir e{std::norm(d.v.dot(x)), std::norm(d.a0.dot(x)), {}};
  for (const auto& a : d.side) e.side.push_back(std::norm(a.dot(x)));
  return e;
}

inline GridOracle evaluate(const OracleData& d, const Dir& w, const Dir& u) {
  // user: p (|v w|^2 + gb |v u|^2) >= gb (P0 |v u|^2 + s2)
  double lo = d.gamma_b * (d.p0 * u.user + d.s2) / (w.user + d.gamma_b * u.user);
  double hi = d.p0;
  if (!(lo <= hi)) return {};
  // sidelobe m: p (w0 - wm - u0 + um) >= gamma_s - P0 (u0 - um)
  for (std::size_t m = 0; m < d.side.size(); ++m) {
    const double slope = w.eve - w.side[m] - u.eve + u.side[m];
    const double rhs = d.gamma_s - d.p0 * (u.eve - u.side[m]);
    if (slope > 0.0) lo = std::max(lo, rhs / slope);
    else if (slope < 0.0) hi = std::min(hi, rhs / slope);
    else if (rhs > 0.0) return {};
  }
  if (lo > hi) return {};
  const double p = std::max(lo, 0.0);
  return {d.g * p * w.eve / (d.g * (d.p0 - p) * u.eve + d.s2), p, true};
}

}  // namespace detail

/// `sidelobe` lists Omega; pass an empty list for the precise design with no
/// beampattern matching. `points` is the grid size per angle; `zoom_rounds`
/// refinements each shrink the box around the incumbent by 10x.
inline GridOracle two_antenna_oracle(const Scenario& scn, double gamma_b, const std::vector<double>& sidelobe,
                                     double gamma_s, int points, int zoom_rounds = 4) {
  detail::OracleData d{scn.power_budget, scn.noise_power, scn.target.gain_power(), gamma_b, gamma_s,
                       scn.user_direction(0), steering_vector(scn.geometry, scn.target.theta0), {}};
  for (double th : sidelobe) d.side.push_back(steering_vector(scn.geometry, th));

  const double pi = 3.14159265358979323846;
  const double phi_step = 0.5 * pi / (points - 1);
  const double psi_step = 2.0 * pi / points;
  std::vector<detail::Dir> dirs;
  std::vector<std::pair<double, double>> angles;
  for (int i = 0; i < points; ++i) {
    for (int j = 0; j < points; ++j) {
      dirs.push_back(detail::make_dir(d, phi_step * i, psi_step * j));
      angles.emplace_back(phi_step * i, psi_step * j);
    }
  }

  GridOracle best;
  std::size_t bw = 0, bu = 0;
  for (std::size_t w = 0; w < dirs.size(); ++w) {
    for (std::size_t u = 0; u < dirs.size(); ++u) {
      const auto r = detail::evaluate(d, dirs[w], dirs[u]);
      if (r.feasible && r.sinr_eve < best.sinr_eve) {
        best = r;
        bw = w;
        bu = u;
      }
    }
  }
  if (!best.feasible) return best;

  double c[4] = {angles[bw].first, angles[bw].second, angles[bu].first, angles[bu].second};
  double half[4] = {phi_step, psi_step, phi_step, psi_step};
  const int m = 10;
  for (int round = 0; round < zoom_rounds; ++round) {
    double next[4] = {c[0], c[1], c[2], c[3]};
    std::vector<detail::Dir> wd, ud;
    std::vector<std::pair<double, double>> wa, ua;
    for (int i = -m; i <= m; ++i) {
      for (int j = -m; j <= m; ++j) {
        const double phw = std::clamp(c[0] + half[0] * i / m, 0.0, 0.5 * pi);
        const double psw = c[1] + half[1] * j / m;
        wd.push_back(detail::make_dir(d, phw, psw));
        wa.emplace_back(phw, psw);
        const double phu = std::clamp(c[2] + half[2] * i / m, 0.0, 0.5 * pi);
        const double psu = c[3] + half[3] * j / m;
        ud.push_back(detail::make_dir(d, phu, psu));
        ua.emplace_back(phu, psu);
      }
    }
    for (std::size_t w = 0; w < wd.size(); ++w) {
      for (std::size_t u = 0; u < ud.size(); ++u) {
        const auto r = detail::evaluate(d, wd[w], ud[u]);
        if (r.feasible && r.sinr_eve < best.sinr_eve) {
          best = r;
          next[0] = wa[w].first;
          next[1] = wa[w].second;
          next[2] = ua[u].first;
          next[3] = ua[u].second;
        }
      }
    }
    for (int k = 0; k < 4; ++k) {
      c[k] = next[k];
      half[k] /= m;
    }
  }
  return best;
}

// User SINR target halfway (in linear terms) between what a beam nulling the
// eavesdropper can reach and what matched filtering reaches, so that the
// eavesdropper cannot be silenced for free.
inline double contested_gamma_b(const Scenario& s) {
  const ComplexVector a0 = steering_vector(s.geometry, s.target.theta0);
  ComplexVector perp(2);
  perp << -std::conj(a0(1)), std::conj(a0(0));
  perp.normalize();
  const ComplexVector v = s.user_direction(0);
  const double null_snr = s.power_budget * std::norm(v.dot(perp)) / s.noise_power;
  const double full_snr = s.power_budget * v.squaredNorm() / s.noise_power;
  return 0.5 * (null_snr + full_snr);
}

}  // namespace secbeam::testing
