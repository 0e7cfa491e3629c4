#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcxr/error.hpp"

namespace rcxr {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,       // unexpected failure, fit non-convergence
  kExitInput = 2,          // parse, schema, precondition, singularity
  kExitIo = 3,             // table missing, unwritable output
  kExitNoLayer = 4,        // no delta-layer signal above the detection floor
  kExitEdge = 5,           // energies do not straddle the absorption edge
  kExitOutOfBand = 6,      // measured contrast outside the simulated band
};

int exit_code(ErrorKind kind);

/// Runs one command line (args excludes the program name). Diagnostics go to err,
/// results without --output to out.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One synthetic corpus member.
struct SynthSample {
  std::string name;
  double depth_nm = 0.0;     // delta layer depth, or buried-oxide centre for the control
  double fwhm_nm = 0.0;      // 0 for the control
  double n2d_per_nm2 = 0.0;  // 0 for the control
  bool buried_oxide = false;
};

std::vector<SynthSample> default_synth_samples();

/// Writes the corpus (curve pairs, truth files, manifest); returns the written file names.
std::vector<std::string> write_synth_suite(const std::filesystem::path& dir, std::uint64_t seed,
                                           const std::string& tables_dir_flag);

}  // namespace rcxr
