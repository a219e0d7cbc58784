#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scns/spectral.hpp"

namespace scns {

enum class NoiseFamily { constant, density_saturating, velocity_saturating };

NoiseFamily noise_family_from_string(const std::string& s);
std::string to_string(NoiseFamily f);

// One retained Wiener direction: a trigonometric spatial pattern and the
// vector slot it forces (ignored by the velocity-saturating family, which
// acts on every component).
struct NoiseShape {
  std::array<int, 3> wave{1, 0, 0};
  bool use_sin = false;
  int direction = 0;
};

// Truncated cylindrical Wiener process W = sum_{k<=K} e_k beta_k together
// with the multiplicative coefficient family F_k(rho, u).  The bound
// sequence f_k certifies ||F_k||_inf + ||grad_rho F_k||_inf +
// ||grad_u F_k||_inf <= f_k for every built-in family.
class NoiseModel {
 public:
  NoiseModel() = default;
  static NoiseModel make(int k_modes, double f1, double decay, NoiseFamily family,
                         std::uint64_t seed_root, int dim);

  int k_modes() const { return static_cast<int>(f_.size()); }
  const std::vector<double>& f() const { return f_; }
  const std::vector<NoiseShape>& shapes() const { return shapes_; }
  NoiseFamily family() const { return family_; }
  std::uint64_t seed_root() const { return seed_root_; }

  double sum_f_sq() const;
  // Remainder of sum f_k^2 beyond the truncation for the k^-decay default.
  double tail_bound() const;

  // Deliberate violation of the certificate, for negative-control tests.
  void set_miscale(double s) { miscale_ = s; }
  double miscale() const { return miscale_; }

 private:
  std::vector<double> f_;
  std::vector<NoiseShape> shapes_;
  NoiseFamily family_ = NoiseFamily::constant;
  std::uint64_t seed_root_ = 0;
  double decay_ = 1.0;
  double f1_ = 0.0;
  double miscale_ = 1.0;
};

struct WienerIncrement {
  std::uint64_t step = 0;
  std::vector<double> db;  // N(0, dt) per retained mode
};

// Counter-based sampling: the increment is a pure function of
// (seed_root, path_id, step, mode).
WienerIncrement sample_increment(const NoiseModel& model, std::uint64_t path_id,
                                 std::uint64_t step, double dt);

// Spatial coefficient fields F_k(rho,u) (d components each).
std::vector<SpectralField> evaluate_coefficients(const NoiseModel& model,
                                                 const SpectralField& rho,
                                                 const SpectralField& u);

// G_k = rho F_k(rho, u); zero wherever rho vanishes.
std::vector<SpectralField> evaluate_noise(const NoiseModel& model,
                                          const SpectralField& rho,
                                          const SpectralField& u);

// (1/2) rho sum_k |F_k|^2 pointwise; the Ito correction density.
SpectralField noise_energy_density(const NoiseModel& model, const SpectralField& rho,
                                   const SpectralField& u);

struct CertificateReport {
  double max_ratio = 0.0;  // observed (||F||+||dF/drho||+||dF/du||)/f_k
  bool pass = false;
};
CertificateReport lipschitz_certificate(const NoiseModel& model,
                                        const std::vector<std::pair<SpectralField,
                                                                    SpectralField>>& states);

}  // namespace scns
