#include "omcspin/siv_model.hpp"

#include <cmath>
#include <numbers>

#include "omcspin/errors.hpp"

namespace omcspin::siv {

void SivParameters::validate() const {
  require_finite(lambda_so_gs, "lambda_so_gs");
  require_finite(lambda_so_es, "lambda_so_es");
  require_finite(d, "d");
  require_finite(f, "f");
  require_finite(gyro, "gyro");
  if (!(lambda_so_gs > 0.0)) throw InvalidInputError("lambda_so_gs must be positive");
  if (!(gyro > 0.0)) throw InvalidInputError("gyro must be positive");
}

void MagneticField::validate() const {
  require_finite(magnitude, "field magnitude");
  require_finite(theta, "field theta");
  require_finite(phi, "field phi");
  if (magnitude < 0.0) throw InvalidInputError("field magnitude must be non-negative");
  if (theta < 0.0 || theta > 180.0) throw InvalidInputError("field theta must lie in [0, 180] degrees");
}

double MagneticField::perpendicular() const {
  return magnitude * std::sin(theta * std::numbers::pi / 180.0);
}

double StrainProjection::magnitude() const { return std::hypot(beta, gamma_strain); }

StrainProjection strain_projection(const StrainTensor& s, const SivParameters& params) {
  for (double v : {s.eps_xx, s.eps_yy, s.eps_zz, s.eps_xy, s.eps_xz, s.eps_yz}) require_finite(v, "strain component");
  require_finite(params.d, "d");
  require_finite(params.f, "f");
  return {params.d * (s.eps_xx - s.eps_yy) + params.f * s.eps_xz,
          -2.0 * params.d * s.eps_xy + params.f * s.eps_yz};
}

double orbital_splitting(const StrainProjection& projection, double lambda_so) {
  require_finite(projection.beta, "beta");
  require_finite(projection.gamma_strain, "gamma_strain");
  require_finite(lambda_so, "lambda_so");
  if (!(lambda_so > 0.0)) throw DomainError("spin-orbit splitting must be positive");
  const double t = 2.0 * projection.magnitude();
  return std::hypot(lambda_so, t);
}

FineStructure fine_structure(const StrainProjection& ground, const StrainProjection& excited,
                             const SivParameters& params) {
  return {orbital_splitting(ground, params.lambda_so_gs), orbital_splitting(excited, params.lambda_so_es)};
}

double transverse_strain_from_splitting(double delta, double lambda_so) {
  require_finite(delta, "orbital splitting");
  require_finite(lambda_so, "lambda_so");
  if (!(lambda_so > 0.0)) throw DomainError("spin-orbit splitting must be positive");
  if (delta < lambda_so) throw DomainError("orbital splitting is smaller than the spin-orbit splitting");
  return std::sqrt((delta - lambda_so) * (delta + lambda_so));
}

FourLineSpectrum four_lines(double nu0, double omega_s, double omega_s_excited) {
  require_finite(nu0, "nu0");
  require_finite(omega_s, "omega_s");
  require_finite(omega_s_excited, "omega_s_excited");
  if (omega_s < 0.0 || omega_s_excited < 0.0) throw InvalidInputError("Zeeman splittings must be non-negative");
  // Ground levels: down at 0, up at +omega_s. Excited: down' at nu0, up' at nu0 + omega_s'.
  return {nu0, nu0 + omega_s_excited - omega_s, nu0 + omega_s_excited, nu0 - omega_s};
}

std::pair<double, double> estimate_spin_splitting(const FourLineSpectrum& lines) {
  return {lines.f_du - lines.f_uu, lines.f_dd - lines.f_ud};
}

double spin_transition_frequency(const MagneticField& field, double conversion) {
  field.validate();
  require_finite(conversion, "conversion constant");
  if (!(conversion > 0.0)) throw InvalidInputError("conversion constant must be positive");
  return conversion * field.magnitude;
}

}  // namespace omcspin::siv
