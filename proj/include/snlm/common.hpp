#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace snlm {

using WordId = std::int32_t;
using ClassId = std::int32_t;

// Raised for bad input data, malformed files and violated preconditions on
// user-supplied values. The CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Multiply-accumulate instrumentation. Counts are split so that projection
// cost and output-layer cost can be compared separately.
struct MacCounter {
  std::uint64_t projection = 0;
  std::uint64_t output = 0;

  std::uint64_t total() const { return projection + output; }
  void reset() { projection = output = 0; }
};

}  // namespace snlm
