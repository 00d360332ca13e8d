// Configured experiments shared by the command line tool and the Python module.
#pragma once

#include <string>
#include <vector>

#include "rts/io.hpp"

namespace rts {

struct NamedField {
  std::string name;
  FiberField field;
  int render_mode = 0;  // mode shown by a render of this output
  bool primary = false;  // the recovered source itself (rendered on request)
};

struct ReconstructionRun {
  BoundaryFan data;                // exact data of the configured source
  std::vector<NamedField> fields;  // recovered quantities
  Json results;                    // case, backend, error norms, lsq report
};

/// Exact data of the configured source for reconstruct.case, then the matching
/// pipeline with the configured backend; errors are relative L2(M, dA_g).
ReconstructionRun run_reconstruction(const RunConfig& cfg, const SpeedField& speed);

}  // namespace rts
