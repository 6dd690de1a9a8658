#include "iptr/trace.hpp"

#include <cstdio>

namespace iptr {

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_real(const std::optional<double>& v) { return v ? real(*v) : std::string(); }

std::string ncf_field(const TraceRow& row) {
  if (row.event == "step") return "";
  if (row.rayleigh) return row.event + ":" + real(*row.rayleigh);
  return row.event;
}

}  // namespace

void write_trace_csv(std::ostream& out, const IterTrace& trace) {
  out << kTraceHeader << "\n";
  for (const TraceRow& r : trace) {
    out << r.t << ',' << r.algo << ',' << real(r.phi) << ',' << real(r.f) << ','
        << real(r.step_norm) << ',' << real(r.potential_delta) << ',' << r.q_t << ','
        << (r.rebuilt ? 1 : 0) << ',' << ncf_field(r) << ',' << opt_real(r.kkt1_resid) << ','
        << opt_real(r.mineig) << ',' << r.wall_ns << "\n";
  }
}

}  // namespace iptr
