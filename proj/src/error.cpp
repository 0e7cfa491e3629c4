#include "rcxr/error.hpp"

namespace rcxr {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Structure: return "structure error";
    case ErrorKind::Range: return "range error";
    case ErrorKind::DataGap: return "data-gap error";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Coverage: return "coverage error";
    case ErrorKind::Sampling: return "sampling error";
    case ErrorKind::Singularity: return "singularity error";
    case ErrorKind::Schema: return "schema error";
    case ErrorKind::TableMissing: return "table missing";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::NoLayerDetected: return "no layer detected";
    case ErrorKind::InvalidCutoff: return "invalid cutoff";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::FitFailed: return "fit failed";
    case ErrorKind::OutOfBand: return "out of range";
    case ErrorKind::EdgeStraddle: return "energies do not straddle edge";
  }
  return "error";
}

}  // namespace rcxr
