// SPDX-License-Identifier: Apache-2.0
#include "qws/model.hpp"
#include "qws/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qws {

  const char* to_string(ErrorCategory c) noexcept
  {
    switch (c) {
    case ErrorCategory::InvalidArgument: return "invalid-argument";
    case ErrorCategory::Range: return "range";
    case ErrorCategory::Numeric: return "numeric";
    case ErrorCategory::DegenerateCoupling: return "degenerate-coupling";
    case ErrorCategory::NodeAtCutoff: return "node-at-r0";
    case ErrorCategory::NearThreshold: return "near-threshold";
    case ErrorCategory::AmbiguousCrossing: return "ambiguous-crossing";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Io: return "io";
    }
    return "unknown";
  }

  cplx lambda_of(cplx q, cplx l) { return l + 0.5 * (q - 2.0); }
  double lambda_of(double q, double l) { return l + 0.5 * (q - 2.0); }

  cplx centrifugal_coefficient(cplx lambda) { return lambda * lambda - 0.25; }
  double centrifugal_coefficient(double lambda) { return lambda * lambda - 0.25; }

  ChannelParams ChannelParams::make(cplx q, cplx l)
  {
    return ChannelParams{q, l, lambda_of(q, l)};
  }

  bool ChannelParams::is_real() const noexcept
  {
    return q.imag() == 0.0 && l.imag() == 0.0 && lambda.imag() == 0.0;
  }

  double ChannelParams::real_lambda() const
  {
    if (!is_real())
      fail(ErrorCategory::InvalidArgument, "channel has complex q, l or lambda");
    return lambda.real();
  }

  namespace {
    // pow for the common integer and half-integer exponents
    double pow_fast(double x, double p)
    {
      const double twice = 2.0 * p;
      if (twice == std::floor(twice) && std::abs(twice) <= 32.0) {
        int n = static_cast<int>(std::abs(twice));
        double v = (n & 1) ? std::sqrt(x) : 1.0;
        for (n >>= 1; n > 0; --n)
          v *= x;
        return twice < 0 ? 1.0 / v : v;
      }
      return std::pow(x, p);
    }

    void check_grid(std::span<const double> r, std::size_t n)
    {
      if (r.size() != n)
        fail(ErrorCategory::InvalidArgument, "grid and value arrays differ in length");
      for (double x : r)
        if (!(x > 0.0))
          fail(ErrorCategory::InvalidArgument, "reduction requires a strictly positive grid");
    }
  }

  std::vector<cplx> reduce_wavefunction(std::span<const double> r,
                                        std::span<const cplx> psi, cplx q)
  {
    check_grid(r, psi.size());
    const cplx p = 0.5 * (q - 1.0);
    std::vector<cplx> y(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i)
      y[i] = std::pow(cplx(r[i]), p) * psi[i];
    return y;
  }

  std::vector<cplx> unreduce_wavefunction(std::span<const double> r,
                                          std::span<const cplx> y, cplx q)
  {
    check_grid(r, y.size());
    const cplx p = -0.5 * (q - 1.0);
    std::vector<cplx> psi(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
      psi[i] = std::pow(cplx(r[i]), p) * y[i];
    return psi;
  }

  EnergyValue EnergyValue::from_energy(double E)
  {
    return EnergyValue{E, std::sqrt(std::abs(E))};
  }

  EnergyValue EnergyValue::from_wavenumber(double k)
  {
    if (!(k >= 0.0))
      fail(ErrorCategory::InvalidArgument, "wavenumber must be nonnegative");
    return EnergyValue{k * k, k};
  }

  //////////////////////////////////////////////////////////////////////////////
  // LocalPotential

  LocalPotential LocalPotential::none() { return LocalPotential{}; }

  LocalPotential LocalPotential::square_well(double depth)
  {
    LocalPotential p;
    p.m_family = Family::SquareWell;
    p.m_depth = depth;
    return p;
  }

  LocalPotential LocalPotential::exponential(double depth, double range)
  {
    if (!(range > 0.0))
      fail(ErrorCategory::InvalidArgument, "exponential potential needs range > 0");
    LocalPotential p;
    p.m_family = Family::Exponential;
    p.m_depth = depth;
    p.m_range = range;
    return p;
  }

  LocalPotential LocalPotential::gaussian(double depth, double range)
  {
    if (!(range > 0.0))
      fail(ErrorCategory::InvalidArgument, "gaussian potential needs range > 0");
    LocalPotential p;
    p.m_family = Family::Gaussian;
    p.m_depth = depth;
    p.m_range = range;
    return p;
  }

  LocalPotential LocalPotential::tabulated(std::vector<double> r, std::vector<double> v)
  {
    if (r.size() != v.size() || r.size() < 2)
      fail(ErrorCategory::InvalidArgument, "tabulated potential needs >= 2 (r, V) pairs");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!std::isfinite(r[i]) || !std::isfinite(v[i]))
        fail(ErrorCategory::InvalidArgument, "tabulated potential contains non-finite values");
      if (r[i] < 0.0 || (i > 0 && !(r[i] > r[i - 1])))
        fail(ErrorCategory::InvalidArgument, "tabulated r values must be nonnegative and strictly increasing");
    }
    LocalPotential p;
    p.m_family = Family::Tabulated;
    p.m_table_r = std::move(r);
    p.m_table_v = std::move(v);
    return p;
  }

  LocalPotential LocalPotential::from_csv(const std::string& path)
  {
    std::ifstream in(path);
    if (!in)
      fail(ErrorCategory::Io, "cannot open potential table '" + path + "'");
    std::vector<double> r, v;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#')
        continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ss(line);
      double a, b;
      if (!(ss >> a >> b)) {
        // Allow a single textual header line.
        if (r.empty() && lineno == 1)
          continue;
        fail(ErrorCategory::Config, path + ":" + std::to_string(lineno) + ": expected two numeric columns");
      }
      r.push_back(a);
      v.push_back(b);
    }
    return tabulated(std::move(r), std::move(v));
  }

  double LocalPotential::operator()(double r) const
  {
    switch (m_family) {
    case Family::None: return 0.0;
    case Family::SquareWell: return -m_depth;
    case Family::Exponential: return -m_depth * std::exp(-r / m_range);
    case Family::Gaussian: {
      const double x = r / m_range;
      return -m_depth * std::exp(-x * x);
    }
    case Family::Tabulated: {
      if (r <= m_table_r.front())
        return m_table_v.front();
      if (r >= m_table_r.back())
        return m_table_v.back();
      auto it = std::upper_bound(m_table_r.begin(), m_table_r.end(), r);
      const std::size_t i = static_cast<std::size_t>(it - m_table_r.begin());
      const double t = (r - m_table_r[i - 1]) / (m_table_r[i] - m_table_r[i - 1]);
      return m_table_v[i - 1] + t * (m_table_v[i] - m_table_v[i - 1]);
    }
    }
    return 0.0;
  }

  double LocalPotential::coeff_constant() const
  {
    if (m_family == Family::Tabulated)
      return m_table_v.front();
    return (*this)(0.0);
  }

  double LocalPotential::sup_norm(double r0) const
  {
    switch (m_family) {
    case Family::None: return 0.0;
    case Family::SquareWell:
    case Family::Exponential:
    case Family::Gaussian: return std::abs(m_depth);
    case Family::Tabulated: {
      double m = 0.0;
      for (std::size_t i = 0; i < m_table_r.size(); ++i)
        if (m_table_r[i] < r0 || i == 0)
          m = std::max(m, std::abs(m_table_v[i]));
      return std::max(m, std::abs((*this)(r0)));
    }
    }
    return 0.0;
  }

  std::vector<double> LocalPotential::kinks() const
  {
    if (m_family == Family::Tabulated)
      return m_table_r;
    return {};
  }

  //////////////////////////////////////////////////////////////////////////////
  // KernelProfile

  KernelProfile KernelProfile::gaussian_bump(double center, double width, double lo, double hi)
  {
    if (!(width > 0.0) || !(lo >= 0.0) || !(hi > lo))
      fail(ErrorCategory::InvalidArgument, "gaussian bump needs width > 0 and 0 <= lo < hi");
    KernelProfile g;
    g.m_kind = Kind::GaussianBump;
    g.m_center = center;
    g.m_width = width;
    g.m_lo = lo;
    g.m_hi = hi;
    return g;
  }

  KernelProfile KernelProfile::polynomial_bump(double a, double b, double lo, double hi)
  {
    if (!(a >= 0.0) || !(b >= 0.0) || !(lo >= 0.0) || !(hi > lo))
      fail(ErrorCategory::InvalidArgument, "polynomial bump needs a, b >= 0 and 0 <= lo < hi");
    KernelProfile g;
    g.m_kind = Kind::PolynomialBump;
    g.m_a = a;
    g.m_b = b;
    g.m_lo = lo;
    g.m_hi = hi;
    const double L = hi - lo;
    const double t = (a + b > 0.0) ? a / (a + b) : 0.5;
    const double peak = std::pow(t * L, a) * std::pow((1.0 - t) * L, b);
    g.m_scale = peak > 0.0 ? 1.0 / peak : 1.0;
    return g;
  }

  double KernelProfile::operator()(double r) const
  {
    if (r < m_lo || r > m_hi)
      return 0.0;
    if (m_kind == Kind::GaussianBump) {
      const double x = (r - m_center) / m_width;
      return std::exp(-x * x);
    }
    return m_scale * pow_fast(r - m_lo, m_a) * pow_fast(m_hi - r, m_b);
  }

  //////////////////////////////////////////////////////////////////////////////
  // PotentialModel

  PotentialModel::PotentialModel(double r0, LocalPotential local)
    : m_r0(r0), m_local(std::move(local))
  {
    if (!(r0 > 0.0) || !std::isfinite(r0))
      fail(ErrorCategory::InvalidArgument, "cutoff radius r0 must be positive");
  }

  PotentialModel PotentialModel::attach(std::vector<KernelProfile> profiles,
                                        std::vector<double> coupling,
                                        bool require_symmetric) const
  {
    const std::size_t n = profiles.size();
    if (coupling.size() != n * n)
      fail(ErrorCategory::InvalidArgument, "coupling matrix must be rank x rank");
    for (const auto& g : profiles)
      if (g.hi() > m_r0 * (1.0 + 1e-14))
        fail(ErrorCategory::InvalidArgument,
             "kernel profile support exceeds r0 (U(r,r') must vanish for r >= r0)");
    for (double c : coupling)
      if (!std::isfinite(c))
        fail(ErrorCategory::InvalidArgument, "coupling matrix contains non-finite entries");
    if (require_symmetric) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (coupling[i * n + j] != coupling[j * n + i])
            fail(ErrorCategory::InvalidArgument, "kernel coupling matrix must be symmetric");
    }
    PotentialModel m = *this;
    m.m_profiles = std::move(profiles);
    m.m_coupling = std::move(coupling);
    return m;
  }

  PotentialModel PotentialModel::with_kernel(std::vector<KernelProfile> profiles,
                                             std::vector<double> strengths) const
  {
    const std::size_t n = profiles.size();
    if (strengths.size() != n)
      fail(ErrorCategory::InvalidArgument, "one strength per kernel profile required");
    std::vector<double> c(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      c[i * n + i] = strengths[i];
    return attach(std::move(profiles), std::move(c), true);
  }

  PotentialModel PotentialModel::with_kernel_matrix(std::vector<KernelProfile> profiles,
                                                    std::vector<double> coupling) const
  {
    return attach(std::move(profiles), std::move(coupling), true);
  }

  PotentialModel PotentialModel::with_unsymmetrized_kernel_for_testing(
    std::vector<KernelProfile> profiles, std::vector<double> coupling) const
  {
    return attach(std::move(profiles), std::move(coupling), false);
  }

  bool PotentialModel::kernel_symmetric() const noexcept
  {
    const std::size_t n = rank();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (m_coupling[i * n + j] != m_coupling[j * n + i])
          return false;
    return true;
  }

  bool PotentialModel::has_kernel() const noexcept
  {
    return std::any_of(m_coupling.begin(), m_coupling.end(), [](double c) { return c != 0.0; });
  }

  double PotentialModel::V(double r) const
  {
    return r < m_r0 ? m_local(r) : 0.0;
  }

  double PotentialModel::g(std::size_t i, double r) const
  {
    return r < m_r0 ? m_profiles[i](r) : 0.0;
  }

  double PotentialModel::U(double r, double rp) const
  {
    double u = 0.0;
    const std::size_t n = rank();
    for (std::size_t i = 0; i < n; ++i) {
      const double gi = g(i, r);
      if (gi == 0.0)
        continue;
      for (std::size_t j = 0; j < n; ++j)
        u += m_coupling[i * n + j] * gi * g(j, rp);
    }
    return u;
  }

  std::vector<double> PotentialModel::breakpoints() const
  {
    std::vector<double> b;
    for (double x : m_local.kinks())
      if (x > 0.0 && x < m_r0)
        b.push_back(x);
    for (const auto& g : m_profiles) {
      if (g.lo() > 0.0 && g.lo() < m_r0)
        b.push_back(g.lo());
      if (g.hi() > 0.0 && g.hi() < m_r0)
        b.push_back(g.hi());
    }
    b.push_back(m_r0);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
  }

  double PotentialModel::local_sup_norm() const { return m_local.sup_norm(m_r0); }

  double PotentialModel::kernel_sup_norm() const
  {
    // |U(r,r')| <= sum_ij |C_ij| since every profile peaks at or below 1.
    double s = 0.0;
    for (double c : m_coupling)
      s += std::abs(c);
    return s;
  }

  //////////////////////////////////////////////////////////////////////////////
  // EffectiveEquation

  EffectiveEquation::EffectiveEquation(ChannelParams channel, PotentialModel potential,
                                       cplx k2, double mu)
    : m_channel(channel), m_potential(std::move(potential)), m_k2(k2), m_mu(mu),
      m_centrifugal(centrifugal_coefficient(channel.lambda))
  {
    if (!std::isfinite(mu))
      fail(ErrorCategory::InvalidArgument, "coupling scale mu must be finite");
    if (has_kernel_source()) {
      if (m_channel.q.imag() != 0.0)
        fail(ErrorCategory::InvalidArgument,
             "complex q makes the kernel weight r^{(q-1)/2} multivalued; not supported");
      if (m_channel.lambda == cplx(0.0))
        fail(ErrorCategory::InvalidArgument,
             "lambda = 0 (half-bound regime) is not supported with a non-local kernel");
    }
  }

  cplx EffectiveEquation::Q(double r) const
  {
    return m_k2 - m_centrifugal / (r * r) - m_mu * m_potential.V(r);
  }

  cplx EffectiveEquation::Q_free(cplx r) const
  {
    return m_k2 - m_centrifugal / (r * r);
  }

  bool EffectiveEquation::has_kernel_source() const noexcept
  {
    return m_mu != 0.0 && m_potential.has_kernel();
  }

  double EffectiveEquation::kernel_weight_exponent() const
  {
    return 0.5 * (m_channel.q.real() - 1.0);
  }

  double EffectiveEquation::kernel_weight(double r) const
  {
    return pow_fast(r, kernel_weight_exponent());
  }

  EffectiveEquation EffectiveEquation::with_lambda(cplx lambda) const
  {
    ChannelParams c = m_channel;
    c.lambda = lambda;
    return EffectiveEquation(c, m_potential, m_k2, m_mu);
  }

  EffectiveEquation EffectiveEquation::with_k2(cplx k2) const
  {
    return EffectiveEquation(m_channel, m_potential, k2, m_mu);
  }

  EffectiveEquation effective_equation(const ChannelParams& channel,
                                       const PotentialModel& potential,
                                       const EnergyValue& energy, double mu)
  {
    return EffectiveEquation(channel, potential, cplx(energy.E), mu);
  }

  EffectiveEquation effective_equation(const ChannelParams& channel,
                                       const PotentialModel& potential,
                                       cplx k2, double mu)
  {
    return EffectiveEquation(channel, potential, k2, mu);
  }

}
