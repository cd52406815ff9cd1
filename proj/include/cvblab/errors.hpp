#pragma once

#include <stdexcept>
#include <string>

namespace cvb {

// Base of every error the library raises. `kind()` is the stable
// machine-readable tag the CLI puts into its error JSON.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    virtual const char *kind() const noexcept { return "error"; }
};

class ConfigError : public Error {
  public:
    using Error::Error;
    const char *kind() const noexcept override { return "config"; }
};

class CapacityError : public Error {
  public:
    using Error::Error;
    const char *kind() const noexcept override { return "capacity"; }
};

class ContractViolation : public Error {
  public:
    using Error::Error;
    const char *kind() const noexcept override { return "contract"; }
};

class GeometryError : public Error {
  public:
    using Error::Error;
    const char *kind() const noexcept override { return "singular_geometry"; }
};

class CharacterizationError : public Error {
  public:
    using Error::Error;
    const char *kind() const noexcept override { return "characterization"; }
};

class DecompositionError : public Error {
  public:
    using Error::Error;
    const char *kind() const noexcept override { return "decomposition"; }
};

class ExtrapolationError : public Error {
  public:
    using Error::Error;
    const char *kind() const noexcept override { return "extrapolation_domain"; }
};

class FitError : public Error {
  public:
    using Error::Error;
    const char *kind() const noexcept override { return "fit"; }
};

// Too few shots survived post-selection to form an estimate.
class StarvationError : public Error {
  public:
    StarvationError(const std::string &what, double acceptance)
        : Error(what), acceptance_(acceptance) {}
    const char *kind() const noexcept override { return "starvation"; }
    double acceptance() const noexcept { return acceptance_; }

  private:
    double acceptance_;
};

}  // namespace cvb
