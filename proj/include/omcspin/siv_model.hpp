#pragma once

#include <utility>

namespace omcspin::siv {

/// Material parameters of the SiV ground and excited manifolds. Frequencies
/// in GHz; `gyro` is the spin gyromagnetic ratio in GHz/kG.
struct SivParameters {
  double lambda_so_gs = 46.0;
  double lambda_so_es = 255.0;
  double d = 0.0;  // GHz per unit strain
  double f = 0.0;  // GHz per unit strain
  double gyro = 2.8;

  void validate() const;
};

/// Field magnitude in kG; angles in degrees relative to the SiV symmetry
/// axis. `phi` is carried along but unused by any formula.
struct MagneticField {
  double magnitude = 0.0;
  double theta = 0.0;
  double phi = 0.0;

  void validate() const;
  double perpendicular() const;  // kG
};

/// Symmetric strain tensor in the SiV frame (dimensionless).
struct StrainTensor {
  double eps_xx = 0.0;
  double eps_yy = 0.0;
  double eps_zz = 0.0;
  double eps_xy = 0.0;
  double eps_xz = 0.0;
  double eps_yz = 0.0;
};

/// Transverse strain components in GHz.
struct StrainProjection {
  double beta = 0.0;
  double gamma_strain = 0.0;

  double magnitude() const;  // sqrt(beta^2 + gamma^2)
};

struct FineStructure {
  double delta_gs = 0.0;
  double delta_es = 0.0;
};

/// Absolute line positions in GHz; first arrow is the ground, second the
/// excited spin state.
struct FourLineSpectrum {
  double f_dd = 0.0;
  double f_uu = 0.0;
  double f_du = 0.0;
  double f_ud = 0.0;
};

// beta = d (exx - eyy) + f exz, gamma = -2 d exy + f eyz
StrainProjection strain_projection(const StrainTensor& strain, const SivParameters& params);

// sqrt(lambda^2 + 4 (beta^2 + gamma^2)), GHz.
double orbital_splitting(const StrainProjection& projection, double lambda_so);

FineStructure fine_structure(const StrainProjection& ground, const StrainProjection& excited,
                             const SivParameters& params);

/// Total transverse-strain splitting 2 sqrt(beta^2 + gamma^2) implied by a
/// measured orbital splitting. Throws DomainError if delta < lambda_so.
double transverse_strain_from_splitting(double delta, double lambda_so);

/// Spin-selective optical lines for a lower-line frequency `nu0` and ground
/// (excited) Zeeman splittings omega_s (omega_s_excited), all GHz.
FourLineSpectrum four_lines(double nu0, double omega_s, double omega_s_excited);

/// The two independent estimators (f_du - f_uu, f_dd - f_ud) of omega_s.
std::pair<double, double> estimate_spin_splitting(const FourLineSpectrum& lines);

/// omega_s = conversion * |B|; conversion in GHz/kG.
double spin_transition_frequency(const MagneticField& field, double conversion);

}  // namespace omcspin::siv
