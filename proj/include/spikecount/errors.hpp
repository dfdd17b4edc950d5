// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace spikecount {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input text that does not match the accepted entry / config grammar.
struct ParseError : Error {
  using Error::Error;
};

// Arguments outside a routine's stated domain (eps > T^M, T/eps <= e, ...).
struct DomainError : Error {
  using Error::Error;
};

// Structurally invalid data (ragged matrix, empty block list, bad grid spec).
struct ValidationError : Error {
  using Error::Error;
};

// A strict comparison still overlaps at the precision cap.  For exact
// operands this is raised only when the two sides are genuinely equal and
// the caller asked for a strict order anyway.
struct UndecidableComparison : Error {
  using Error::Error;
};

// Lattice point enumeration would visit more nodes than the configured cap.
struct EnumerationBudgetExceeded : Error {
  using Error::Error;
};

// A reciprocal sum hit a q with some distance-to-nearest-integer equal to
// zero, i.e. the form is rationally dependent at that q.
struct SingularTerm : Error {
  explicit SingularTerm(const std::string& msg, long long q_witness = 0)
      : Error(msg), q(q_witness) {}
  long long q;
};

}  // namespace spikecount
