#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace iptr {

/// One recorded iteration or event.
struct TraceRow {
  long t = 0;
  std::string algo;
  double phi = 0.0;
  double f = 0.0;
  double step_norm = 0.0;
  double potential_delta = 0.0;
  /// Coordinates of x̄ refreshed this iteration.
  long q_t = 0;
  bool rebuilt = false;
  /// "step", "terminal", "budget", "ncf-found", "ncf-none", "curvature-step", "curvature-reject".
  std::string event = "step";
  /// Rayleigh estimate for NCF rows.
  std::optional<double> rayleigh;
  std::optional<double> kkt1_resid;
  std::optional<double> mineig;
  int64_t wall_ns = 0;
};

using IterTrace = std::vector<TraceRow>;

/// Column order of the CSV trace.
inline constexpr const char* kTraceHeader =
    "t,algo,phi,f,step_norm,potential_delta,q_t,rebuilt,ncf_event,kkt1_resid,mineig,wall_ns";

/**
 * Writes a header row and one row per entry. Reals use 17 significant digits and the
 * C locale; absent optionals are empty fields.
 */
void write_trace_csv(std::ostream& out, const IterTrace& trace);

}  // namespace iptr
