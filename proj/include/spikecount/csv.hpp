// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>

namespace spikecount {

inline constexpr const char* kToolName = "spikecount";
inline constexpr const char* kToolVersion = "1.0.0";

// 17 significant digits: enough to round-trip any double, few enough to stay
// stable across runs.
inline std::string fmt_sig(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt_hash(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Provenance comment every emitted CSV starts with.
inline void write_csv_preamble(std::ostream& out, std::uint64_t config_hash) {
  out << "# " << kToolName << " v" << kToolVersion << " config-hash=" << fmt_hash(config_hash)
      << "\n";
}

}  // namespace spikecount
