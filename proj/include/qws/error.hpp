// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace qws {

  // Categories map one-to-one onto the status codes of the C API.
  enum class ErrorCategory {
    InvalidArgument,    // precondition violated by the caller
    Range,              // input outside the supported numerical envelope
    Numeric,            // integrator or iteration failed to converge
    DegenerateCoupling, // det(Id - mu*M) vanishes for the separable kernel
    NodeAtCutoff,       // y(r0) = 0, logarithmic derivative undefined
    NearThreshold,      // low-k formula denominator vanishes
    AmbiguousCrossing,  // grazing contact of A(0,mu) with rho
    Config,             // configuration parse or validation failure
    Io,
  };

  const char* to_string(ErrorCategory c) noexcept;

  class Error : public std::runtime_error {
  public:
    Error(ErrorCategory c, const std::string& what)
      : std::runtime_error(what), m_category(c) {}
    ErrorCategory category() const noexcept { return m_category; }
  private:
    ErrorCategory m_category;
  };

  [[noreturn]] inline void fail(ErrorCategory c, const std::string& msg)
  {
    throw Error(c, msg);
  }

}
