// Copyright 2026 wsep contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef WSEP_COMMON_HPP_
#define WSEP_COMMON_HPP_

#include <sstream>
#include <stdexcept>
#include <string>

namespace wsep {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration is inconsistent or invalid (exit code 2 in the CLI).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A required upstream artifact is missing (exit code 3 in the CLI).
class MissingArtifactError : public Error {
 public:
  explicit MissingArtifactError(const std::string& msg) : Error(msg) {}
};

#define WSEP_CHECK(cond, msg)                                      \
  do {                                                             \
    if (!(cond)) {                                                 \
      std::ostringstream oss__;                                    \
      oss__ << msg;                                                \
      throw ::wsep::Error(oss__.str());                            \
    }                                                              \
  } while (0)

}  // namespace wsep

#endif  // WSEP_COMMON_HPP_
