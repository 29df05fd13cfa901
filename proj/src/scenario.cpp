#include "secbeam/scenario.hpp"

#include <limits>
#include <random>
#include <stdexcept>

namespace secbeam {

void UlaGeometry::validate() const {
  if (n_antennas < 2) throw std::invalid_argument("UlaGeometry: need at least 2 antennas");
  if (!(spacing > 0.0)) throw std::invalid_argument("UlaGeometry: spacing must be positive");
}

void TargetModel::validate() const {
  constexpr double half_pi = kPi / 2;
  constexpr double slack = 1e-12;
  if (!(theta0 > -half_pi && theta0 < half_pi)) {
    throw std::invalid_argument("TargetModel: theta0 outside (-90, 90) degrees");
  }
  if (!(delta_theta >= 0.0)) throw std::invalid_argument("TargetModel: negative delta_theta");
  if (theta0 - delta_theta < -half_pi - slack || theta0 + delta_theta > half_pi + slack) {
    throw std::invalid_argument("TargetModel: uncertainty interval leaves [-90, 90] degrees");
  }
  if (!(std::abs(gain) > 0.0)) throw std::invalid_argument("TargetModel: zero target gain");
}

ComplexVector Scenario::user_direction(Index i) const {
  if (i < 0 || i >= n_users()) throw std::out_of_range("Scenario: user index out of range");
  // h_i^T W h_i^* == v^H W v with v = conj(h_i), h_i being row i of H.
  return channel.row(i).transpose().conjugate();
}

void Scenario::validate() const {
  geometry.validate();
  target.validate();
  if (channel.rows() < 1) throw std::invalid_argument("Scenario: no users");
  if (channel.cols() != geometry.n_antennas) {
    throw DimensionError("Scenario: channel has " + std::to_string(channel.cols()) +
                         " columns for " + std::to_string(geometry.n_antennas) + " antennas");
  }
  if (!channel.allFinite()) throw std::invalid_argument("Scenario: non-finite channel");
  if (!(noise_power > 0.0)) throw std::invalid_argument("Scenario: noise power must be positive");
  if (!(power_budget > 0.0)) throw std::invalid_argument("Scenario: power budget must be positive");
  if (frame_length < 1) throw std::invalid_argument("Scenario: frame length must be >= 1");
}

AngularGrid AngularGrid::uniform(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("AngularGrid: bad range");
  AngularGrid g;
  g.resolution = step;
  const auto count = static_cast<Index>(std::floor((hi - lo) / step + 1e-9)) + 1;
  g.angles.reserve(static_cast<std::size_t>(count));
  for (Index m = 0; m < count; ++m) g.angles.push_back(lo + static_cast<double>(m) * step);
  g.validate();
  return g;
}

AngularGrid AngularGrid::default_grid() {
  return uniform(deg2rad(-90.0), deg2rad(90.0), deg2rad(1.0));
}

void AngularGrid::validate() const {
  constexpr double limit = kPi / 2 + 1e-9;
  for (std::size_t m = 0; m < angles.size(); ++m) {
    if (angles[m] < -limit || angles[m] > limit) {
      throw std::invalid_argument("AngularGrid: angle outside [-90, 90] degrees");
    }
    if (m > 0 && !(angles[m] > angles[m - 1])) {
      throw std::invalid_argument("AngularGrid: angles not strictly increasing");
    }
  }
}

ComplexVector steering_vector(const UlaGeometry& geom, double theta) {
  const Index n = geom.n_antennas;
  ComplexVector a(n);
  const double phase = 2.0 * kPi * geom.spacing * std::sin(theta);
  for (Index k = 0; k < n; ++k) a(k) = std::polar(1.0, phase * static_cast<double>(k));
  return a;
}

ComplexMatrix sample_channel(Index k, Index n, std::uint64_t seed) {
  if (k < 1 || n < 1) throw std::invalid_argument("sample_channel: dimensions must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexMatrix h(k, n);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      h(i, j) = Complex(re, im);
    }
  }
  return h;
}

HermitianMatrix transmit_covariance(const std::vector<HermitianMatrix>& beams,
                                    const HermitianMatrix& noise_cov) {
  HermitianMatrix total = noise_cov;
  for (const auto& w : beams) {
    if (w.dim() != noise_cov.dim()) throw DimensionError("transmit_covariance: dimension mismatch");
    total += w;
  }
  return total;
}

namespace {

void check_dims(const Scenario& scn, const std::vector<HermitianMatrix>& beams,
                const HermitianMatrix& noise_cov) {
  const Index n = scn.n_antennas();
  if (noise_cov.dim() != n) throw DimensionError("R_N dimension does not match the array");
  for (const auto& w : beams) {
    if (w.dim() != n) throw DimensionError("beam covariance dimension does not match the array");
  }
}

}  // namespace

double sinr_user(const Scenario& scn, Index i, const std::vector<HermitianMatrix>& beams,
                 const HermitianMatrix& noise_cov) {
  if (i < 0 || i >= static_cast<Index>(beams.size()) || i >= scn.n_users()) {
    throw std::out_of_range("sinr_user: user index out of range");
  }
  check_dims(scn, beams, noise_cov);
  const ComplexVector v = scn.user_direction(i);
  double interference = quadratic_form(v, noise_cov) + scn.noise_power;
  for (std::size_t k = 0; k < beams.size(); ++k) {
    if (static_cast<Index>(k) != i) interference += quadratic_form(v, beams[k]);
  }
  return quadratic_form(v, beams[static_cast<std::size_t>(i)]) / interference;
}

std::vector<double> sinr_users(const Scenario& scn, const std::vector<HermitianMatrix>& beams,
                               const HermitianMatrix& noise_cov) {
  std::vector<double> out;
  out.reserve(beams.size());
  for (Index i = 0; i < static_cast<Index>(beams.size()); ++i) {
    out.push_back(sinr_user(scn, i, beams, noise_cov));
  }
  return out;
}

double sinr_eve(const Scenario& scn, double theta, const std::vector<HermitianMatrix>& beams,
                const HermitianMatrix& noise_cov) {
  check_dims(scn, beams, noise_cov);
  const ComplexVector a = steering_vector(scn.geometry, theta);
  const double g = scn.target.gain_power();
  double signal = 0.0;
  for (const auto& w : beams) signal += quadratic_form(a, w);
  return g * signal / (g * quadratic_form(a, noise_cov) + scn.noise_power);
}

double secrecy_rate_from_sinr(const std::vector<double>& user_sinr, double eve_sinr) {
  if (user_sinr.empty()) return 0.0;
  double worst = std::numeric_limits<double>::infinity();
  for (double s : user_sinr) worst = std::min(worst, std::log2(1.0 + s));
  return 0.5 * std::max(0.0, worst - std::log2(1.0 + eve_sinr));
}

double secrecy_rate(const Scenario& scn, const std::vector<HermitianMatrix>& beams,
                    const HermitianMatrix& noise_cov) {
  return secrecy_rate_from_sinr(sinr_users(scn, beams, noise_cov),
                                sinr_eve(scn, scn.target.theta0, beams, noise_cov));
}

ComplexMatrix synthesize_waveform(const ComplexMatrix& beamformers,
                                  const HermitianMatrix& noise_cov, Index frame_length,
                                  std::uint64_t seed) {
  if (frame_length < 1) throw std::invalid_argument("synthesize_waveform: frame length must be >= 1");
  if (beamformers.rows() != noise_cov.dim()) {
    throw DimensionError("synthesize_waveform: beamformer/R_N dimension mismatch");
  }
  const Index n = noise_cov.dim();
  const Index k = beamformers.cols();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  auto draw = [&](Index rows, Index cols) {
    ComplexMatrix m(rows, cols);
    for (Index c = 0; c < cols; ++c) {
      for (Index r = 0; r < rows; ++r) {
        const double re = normal(rng);
        m(r, c) = Complex(re, normal(rng));
      }
    }
    return m;
  };
  const ComplexMatrix symbols = draw(k, frame_length);
  const ComplexMatrix white = draw(n, frame_length);
  return beamformers * symbols + psd_sqrt(noise_cov) * white;
}

ComplexMatrix synthesize_waveform(const std::vector<HermitianMatrix>& beams,
                                  const HermitianMatrix& noise_cov, Index frame_length,
                                  std::uint64_t seed, double rank1_tol) {
  const Index n = noise_cov.dim();
  ComplexMatrix w(n, static_cast<Index>(beams.size()));
  for (std::size_t i = 0; i < beams.size(); ++i) {
    if (beams[i].dim() != n) throw DimensionError("synthesize_waveform: dimension mismatch");
    const double tr = beams[i].trace();
    if (tr <= 0.0) {
      w.col(static_cast<Index>(i)).setZero();
      continue;
    }
    const auto eig = hermitian_eig(beams[i]);
    if (1.0 - eig.values(0) / tr > rank1_tol) {
      throw std::invalid_argument("synthesize_waveform: beam covariance " + std::to_string(i) +
                                  " is not rank one");
    }
    w.col(static_cast<Index>(i)) = std::sqrt(eig.values(0)) * eig.vectors.col(0);
  }
  return synthesize_waveform(w, noise_cov, frame_length, seed);
}

HermitianMatrix sample_covariance(const ComplexMatrix& x) {
  return HermitianMatrix(x * x.adjoint() / static_cast<double>(x.cols()));
}

}  // namespace secbeam
