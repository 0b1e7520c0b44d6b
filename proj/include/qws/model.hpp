// SPDX-License-Identifier: Apache-2.0
#pragma once

// Channel parameters, potentials and the reduced one-dimensional radial
// equation
//
//     y'' + Q(r) y = mu r^{(q-1)/2} \int U(r,r') y(r') r'^{(q-1)/2} dr',
//     Q(r) = k^2 - (lambda^2 - 1/4)/r^2 - mu V(r),
//
// in reduced units (hbar^2/2m = 1). The radial function of the q-dimensional
// problem is psi(r) = r^{-(q-1)/2} y(r) and lambda = l + (q-2)/2.

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace qws {

  using cplx = std::complex<double>;

  cplx lambda_of(cplx q, cplx l);
  double lambda_of(double q, double l);

  // lambda^2 - 1/4, even in lambda.
  cplx centrifugal_coefficient(cplx lambda);
  double centrifugal_coefficient(double lambda);

  struct ChannelParams {
    cplx q;
    cplx l;
    cplx lambda;

    static ChannelParams make(cplx q, cplx l);
    static ChannelParams make(double q, double l) { return make(cplx(q), cplx(l)); }

    bool is_real() const noexcept;
    // Real lambda; throws InvalidArgument if q or l carries an imaginary part.
    double real_lambda() const;
  };

  std::vector<cplx> reduce_wavefunction(std::span<const double> r,
                                        std::span<const cplx> psi, cplx q);
  std::vector<cplx> unreduce_wavefunction(std::span<const double> r,
                                          std::span<const cplx> y, cplx q);

  // E > 0: k = sqrt(E); E <= 0: k holds kappa = sqrt(-E).
  struct EnergyValue {
    double E = 0.0;
    double k = 0.0;

    static EnergyValue from_energy(double E);
    static EnergyValue from_wavenumber(double k);
    bool bound_side() const noexcept { return E <= 0.0; }
  };

  // Local part V(r). The cutoff r0 lives in PotentialModel; a LocalPotential
  // describes the shape on (0, r0). "depth" is positive for attractive wells.
  class LocalPotential {
  public:
    enum class Family { None, SquareWell, Exponential, Gaussian, Tabulated };

    static LocalPotential none();
    static LocalPotential square_well(double depth);
    static LocalPotential exponential(double depth, double range);
    static LocalPotential gaussian(double depth, double range);
    // Linear interpolation, constant extrapolation below the first node.
    static LocalPotential tabulated(std::vector<double> r, std::vector<double> v);
    static LocalPotential from_csv(const std::string& path);

    Family family() const noexcept { return m_family; }
    double depth() const noexcept { return m_depth; }
    double range() const noexcept { return m_range; }
    const std::vector<double>& table_r() const noexcept { return m_table_r; }
    const std::vector<double>& table_v() const noexcept { return m_table_v; }

    double operator()(double r) const;
    // Leading small-r behaviour V ~ v_m1/r + v_0.
    double coeff_inverse_r() const noexcept { return 0.0; }
    double coeff_constant() const;
    double sup_norm(double r0) const;
    std::vector<double> kinks() const;

  private:
    Family m_family = Family::None;
    double m_depth = 0.0;
    double m_range = 1.0;
    std::vector<double> m_table_r;
    std::vector<double> m_table_v;
  };

  // Radial profile g_i of one separable kernel term, zero outside [lo, hi].
  class KernelProfile {
  public:
    enum class Kind { GaussianBump, PolynomialBump };

    // exp(-((r-center)/width)^2) on [lo, hi].
    static KernelProfile gaussian_bump(double center, double width, double lo, double hi);
    // (r-lo)^a (hi-r)^b normalized to unit peak.
    static KernelProfile polynomial_bump(double a, double b, double lo, double hi);

    Kind kind() const noexcept { return m_kind; }
    double lo() const noexcept { return m_lo; }
    double hi() const noexcept { return m_hi; }
    double center() const noexcept { return m_center; }
    double width() const noexcept { return m_width; }
    double exponent_a() const noexcept { return m_a; }
    double exponent_b() const noexcept { return m_b; }

    double operator()(double r) const;

  private:
    Kind m_kind = Kind::GaussianBump;
    double m_center = 0.0, m_width = 1.0;
    double m_a = 1.0, m_b = 1.0;
    double m_lo = 0.0, m_hi = 1.0;
    double m_scale = 1.0;
  };

  // V(r) with cutoff r0 plus the rank-n separable kernel
  //   U(r,r') = sum_ij C_ij g_i(r) g_j(r').
  class PotentialModel {
  public:
    PotentialModel() = default;
    explicit PotentialModel(double r0, LocalPotential local = LocalPotential::none());

    // Diagonal coupling C = diag(strengths).
    PotentialModel with_kernel(std::vector<KernelProfile> profiles,
                               std::vector<double> strengths) const;
    // Full symmetric coupling matrix, row-major n x n.
    PotentialModel with_kernel_matrix(std::vector<KernelProfile> profiles,
                                      std::vector<double> coupling) const;
    // Skips the symmetry requirement. Only meant for negative-control tests of
    // the Green identity.
    PotentialModel with_unsymmetrized_kernel_for_testing(std::vector<KernelProfile> profiles,
                                                         std::vector<double> coupling) const;

    double r0() const noexcept { return m_r0; }
    const LocalPotential& local() const noexcept { return m_local; }
    std::size_t rank() const noexcept { return m_profiles.size(); }
    const std::vector<KernelProfile>& profiles() const noexcept { return m_profiles; }
    double coupling(std::size_t i, std::size_t j) const { return m_coupling[i * rank() + j]; }
    const std::vector<double>& coupling_matrix() const noexcept { return m_coupling; }
    bool kernel_symmetric() const noexcept;
    bool has_kernel() const noexcept;

    double V(double r) const;
    double g(std::size_t i, double r) const;
    double U(double r, double rp) const;

    // Points in (0, r0] where V or some g_i is not smooth; always contains r0.
    std::vector<double> breakpoints() const;
    double local_sup_norm() const;
    double kernel_sup_norm() const;

  private:
    PotentialModel attach(std::vector<KernelProfile> profiles,
                          std::vector<double> coupling, bool require_symmetric) const;

    double m_r0 = 1.0;
    LocalPotential m_local;
    std::vector<KernelProfile> m_profiles;
    std::vector<double> m_coupling;
  };

  // The reduced equation at fixed (lambda, k^2, mu). Even in lambda.
  class EffectiveEquation {
  public:
    EffectiveEquation(ChannelParams channel, PotentialModel potential, cplx k2, double mu);

    const ChannelParams& channel() const noexcept { return m_channel; }
    const PotentialModel& potential() const noexcept { return m_potential; }
    cplx lambda() const noexcept { return m_channel.lambda; }
    cplx k2() const noexcept { return m_k2; }
    double mu() const noexcept { return m_mu; }
    double r0() const noexcept { return m_potential.r0(); }
    cplx centrifugal() const noexcept { return m_centrifugal; }

    // Q(r) = k^2 - (lambda^2-1/4)/r^2 - mu V(r).
    cplx Q(double r) const;
    // Free-region coefficient, valid for complex r off the real axis.
    cplx Q_free(cplx r) const;

    // Kernel terms present with nonzero mu.
    bool has_kernel_source() const noexcept;
    // r^{(q-1)/2}, the weight carried by the kernel integrals.
    double kernel_weight(double r) const;
    double kernel_weight_exponent() const;

    // Same equation with lambda replaced (used for the -lambda branch) or a
    // different k^2.
    EffectiveEquation with_lambda(cplx lambda) const;
    EffectiveEquation with_k2(cplx k2) const;

  private:
    ChannelParams m_channel;
    PotentialModel m_potential;
    cplx m_k2;
    double m_mu;
    cplx m_centrifugal;
  };

  EffectiveEquation effective_equation(const ChannelParams& channel,
                                       const PotentialModel& potential,
                                       const EnergyValue& energy, double mu);
  EffectiveEquation effective_equation(const ChannelParams& channel,
                                       const PotentialModel& potential,
                                       cplx k2, double mu);

}
