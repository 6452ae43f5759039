#pragma once

#include <stdexcept>

namespace doselim {

// Exit state with zero surviving amplitude; the conditional state is undefined.
struct DegenerateStateError : std::domain_error {
  using std::domain_error::domain_error;
};

// Tau schedule that deposits no amplitude in the sample channel (zero dose).
struct DegenerateScheduleError : std::domain_error {
  using std::domain_error::domain_error;
};

// Requested quantity diverges at the given parameter (e.g. xi_ql at eta = 1).
struct DivergentLimitError : std::domain_error {
  using std::domain_error::domain_error;
};

// Target value outside the reachable range of the inverted function.
struct UnattainableError : std::domain_error {
  using std::domain_error::domain_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace doselim
