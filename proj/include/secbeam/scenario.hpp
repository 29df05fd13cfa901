#pragma once

// System model of the DFRC base station: ULA steering vectors, Rayleigh
// channels, transmit covariance, user/eavesdropper SINR and secrecy rate.

#include <cstdint>
#include <vector>

#include "secbeam/linalg.hpp"

namespace secbeam {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }
inline double db2lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin2db(double lin) { return 10.0 * std::log10(lin); }

/// Uniform linear array; spacing is in wavelengths.
struct UlaGeometry {
  Index n_antennas = 2;
  double spacing = 0.5;

  void validate() const;
};

/// Single point target, which is also the potential eavesdropper. Angles in
/// radians; the target lies somewhere in [theta0 - delta_theta, theta0 + delta_theta].
struct TargetModel {
  double theta0 = 0.0;
  double delta_theta = 0.0;
  Complex gain{1.0, 0.0};

  double gain_power() const { return std::norm(gain); }
  void validate() const;
};

struct Scenario {
  UlaGeometry geometry;
  ComplexMatrix channel;  // K x N, row i is h_i^T
  double noise_power = 1.0;
  TargetModel target;
  double power_budget = 1.0;
  Index frame_length = 30;

  Index n_users() const { return channel.rows(); }
  Index n_antennas() const { return geometry.n_antennas; }

  /// Vector v with v^H W v = h_i^T W h_i^*; the conjugation lives here only.
  ComplexVector user_direction(Index i) const;

  void validate() const;
};

/// Sorted angles in radians.
struct AngularGrid {
  std::vector<double> angles;
  double resolution = 0.0;

  /// Inclusive uniform grid from lo to hi (radians) with the given step.
  static AngularGrid uniform(double lo, double hi, double step);
  /// 1-degree grid over [-90, 90] degrees (181 points).
  static AngularGrid default_grid();

  Index size() const { return static_cast<Index>(angles.size()); }
  void validate() const;
};

/// a(theta), element n equal to exp(j 2 pi n spacing sin(theta)).
ComplexVector steering_vector(const UlaGeometry& geom, double theta);

/// K x N i.i.d. CN(0, 1) entries, deterministic in the seed.
ComplexMatrix sample_channel(Index k, Index n, std::uint64_t seed);

/// R_X = sum_i W_i + R_N.
HermitianMatrix transmit_covariance(const std::vector<HermitianMatrix>& beams,
                                    const HermitianMatrix& noise_cov);

/// SINR of user i (0-based).
double sinr_user(const Scenario& scn, Index i, const std::vector<HermitianMatrix>& beams,
                 const HermitianMatrix& noise_cov);

std::vector<double> sinr_users(const Scenario& scn, const std::vector<HermitianMatrix>& beams,
                               const HermitianMatrix& noise_cov);

/// Eavesdropper SINR when the target sits at angle theta.
double sinr_eve(const Scenario& scn, double theta, const std::vector<HermitianMatrix>& beams,
                const HermitianMatrix& noise_cov);

/// 0.5 * max(0, min_i log2(1 + SINR_i) - log2(1 + SINR_E)).
double secrecy_rate_from_sinr(const std::vector<double>& user_sinr, double eve_sinr);

/// Secrecy rate with the eavesdropper at theta0.
double secrecy_rate(const Scenario& scn, const std::vector<HermitianMatrix>& beams,
                    const HermitianMatrix& noise_cov);

/// X = W S + N for explicit beamformers (columns of `beamformers`), unit-power
/// CN symbols and artificial noise drawn from CN(0, R_N).
ComplexMatrix synthesize_waveform(const ComplexMatrix& beamformers,
                                  const HermitianMatrix& noise_cov, Index frame_length,
                                  std::uint64_t seed);

/// Same, starting from covariances that must be rank one (relative defect
/// <= rank1_tol); throws std::invalid_argument otherwise.
ComplexMatrix synthesize_waveform(const std::vector<HermitianMatrix>& beams,
                                  const HermitianMatrix& noise_cov, Index frame_length,
                                  std::uint64_t seed, double rank1_tol = 1e-6);

/// (1/L) X X^H
HermitianMatrix sample_covariance(const ComplexMatrix& x);

}  // namespace secbeam
