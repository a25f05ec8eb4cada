#pragma once

#include <stdexcept>
#include <string>

namespace hk {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input outside the documented domain of an operation.
struct invalid_input : error {
  using error::error;
};

// Closed-form constants left the domain where the formula is defined.
struct constants_out_of_range : error {
  using error::error;
};

struct unsupported : error {
  using error::error;
};

struct not_converged : error {
  not_converged(const std::string& what, double residual)
      : error(what), residual(residual) {}
  double residual;
};

struct stability_error : error {
  stability_error(const std::string& what, double limit)
      : error(what), limit(limit) {}
  double limit;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw invalid_input(msg);
}

}  // namespace hk
