#pragma once

#include <stdexcept>
#include <string>

namespace nights {

/// Base of every engine error. Callers that only care about "did it work"
/// catch this; the service maps concrete subclasses to ApiError codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WrongPhase : public Error {
 public:
  using Error::Error;
};

/// Session busy with another in-flight operation.
class Busy : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class EmptyText : public ValidationError {
 public:
  EmptyText() : ValidationError("player text is empty") {}
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class UnknownCard : public Error {
 public:
  explicit UnknownCard(const std::string& id) : Error("unknown card: " + id) {}
};

class AlreadyPlayed : public Error {
 public:
  explicit AlreadyPlayed(const std::string& id) : Error("card already played: " + id) {}
};

class CapacityError : public Error {
 public:
  CapacityError() : Error("four weapon cards already held") {}
};

class StorageError : public Error {
 public:
  using Error::Error;
};

/// Backend output could not be turned into a valid structured reply.
class ContractError : public Error {
 public:
  using Error::Error;
};

enum class BackendFailure { transport, timeout, http_status, quota, protocol, script_exhausted };

const char* to_string(BackendFailure kind);

class BackendError : public Error {
 public:
  BackendError(BackendFailure kind, const std::string& detail)
      : Error(std::string("backend error (") + to_string(kind) + "): " + detail), kind_(kind) {}

  BackendFailure kind() const noexcept { return kind_; }

 private:
  BackendFailure kind_;
};

}  // namespace nights
