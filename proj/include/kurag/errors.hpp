// Copyright 2026 The kurag Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kurag {

// Root of every error thrown by the library. Callers that only need to
// distinguish "our failure" from "anything else" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  DimensionError(std::size_t expected, std::size_t actual)
      : Error("dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

// Corrupt or truncated persisted data. `offset` is the byte position at
// which decoding gave up.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// A chunk or KU reference that does not resolve.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

enum class TransportFailure { kTimeout, kConnection, kHttpStatus, kMalformed };

inline const char* to_string(TransportFailure f) {
  switch (f) {
    case TransportFailure::kTimeout: return "timeout";
    case TransportFailure::kConnection: return "connection";
    case TransportFailure::kHttpStatus: return "http_status";
    case TransportFailure::kMalformed: return "malformed_response";
  }
  return "unknown";
}

class TransportError : public Error {
 public:
  TransportError(TransportFailure kind, const std::string& what, int status = 0)
      : Error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        status_(status) {}

  TransportFailure kind() const noexcept { return kind_; }
  int status() const noexcept { return status_; }

 private:
  TransportFailure kind_;
  int status_;
};

enum class ErrorKind {
  kValidation,
  kPrecondition,
  kNotFound,
  kConflict,
  kDimension,
  kFormat,
  kIntegrity,
  kTransport,
  kInternal,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kNotFound: return "not_found";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIntegrity: return "integrity";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kInternal: return "internal";
  }
  return "internal";
}

inline ErrorKind classify(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return ErrorKind::kValidation;
  if (dynamic_cast<const PreconditionError*>(&e)) return ErrorKind::kPrecondition;
  if (dynamic_cast<const NotFoundError*>(&e)) return ErrorKind::kNotFound;
  if (dynamic_cast<const ConflictError*>(&e)) return ErrorKind::kConflict;
  if (dynamic_cast<const DimensionError*>(&e)) return ErrorKind::kDimension;
  if (dynamic_cast<const FormatError*>(&e)) return ErrorKind::kFormat;
  if (dynamic_cast<const IntegrityError*>(&e)) return ErrorKind::kIntegrity;
  if (dynamic_cast<const TransportError*>(&e)) return ErrorKind::kTransport;
  return ErrorKind::kInternal;
}

}  // namespace kurag
