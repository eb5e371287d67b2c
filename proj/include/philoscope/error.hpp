#pragma once

#include <stdexcept>
#include <string>

namespace philoscope {

// Raised for bad input: malformed files, violated preconditions, failed
// joins. The CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace philoscope
