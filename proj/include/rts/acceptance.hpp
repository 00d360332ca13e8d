// Acceptance criteria 1-13 as runnable checks with pinned tolerances.
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace rts {

/// Full runs every criterion at its pinned resolution; Quick shrinks the
/// expensive ones (9: n = 48 / 96; 7, 8: fewer trials) and keeps every tolerance.
enum class Profile { Quick, Full };

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct AcceptanceOptions {
  Profile profile = Profile::Full;
  std::vector<int> only;  // empty -> all
  std::function<void(const CriterionResult&)> on_result;  // called as each finishes
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

/// "PASS  9 roundtrips: ... [12.3 s]"
std::string format_result(const CriterionResult& r);

}  // namespace rts
