// Copyright 2026 The pihlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PIHLAB_ERROR_HPP_
#define PIHLAB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pihlab {

enum class ErrorKind {
  kUsage,        // caller violated a precondition
  kNumeric,      // non-finite value or diverged computation
  kInvalidGain,  // non-positive admittance parameter
  kIo,           // file could not be read or written
};

// All library failures are reported through this exception. The C API maps
// the kind onto its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_usage(const std::string& what) {
  throw Error(ErrorKind::kUsage, what);
}
[[noreturn]] inline void throw_numeric(const std::string& what) {
  throw Error(ErrorKind::kNumeric, what);
}
[[noreturn]] inline void throw_io(const std::string& what) {
  throw Error(ErrorKind::kIo, what);
}

}  // namespace pihlab

#endif  // PIHLAB_ERROR_HPP_
