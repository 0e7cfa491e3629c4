#pragma once

#include <stdexcept>
#include <string>

namespace rcxr {

enum class ErrorKind {
  Parse,           // malformed input text
  Structure,       // well-formed input violating an ordering/shape rule
  Range,           // argument outside the tabulated / supported range
  DataGap,         // interpolation bracket touches a sentinel row
  Domain,          // argument outside the mathematical domain
  Coverage,        // depth grid does not cover the structure
  Sampling,        // grid spacing violates Nyquist for the requested Q
  Singularity,     // Q = 0 requested
  Schema,          // configuration key missing or of the wrong type
  TableMissing,    // scattering-factor file not found
  Io,              // file could not be written
  NoLayerDetected, // no oscillation above the detection floor
  InvalidCutoff,   // low-pass cutoff incompatible with the layer depth
  Alignment,       // two signals do not share a grid
  FitFailed,       // least squares did not converge from any start
  OutOfBand,       // value outside the achievable simulated band
  EdgeStraddle,    // energies do not straddle the absorption edge
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rcxr
