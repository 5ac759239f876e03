#pragma once

#include <stdexcept>
#include <string>

namespace dimseed {

/// Base for every error raised by the library. Callers that only need a
/// message can catch this; the subclasses exist so tests and the CLI can
/// branch on the failure mode.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonPositiveDims : public Error {
 public:
  using Error::Error;
};

class InvalidValue : public Error {
 public:
  using Error::Error;
};

class InvalidYearRange : public Error {
 public:
  using Error::Error;
};

class MissingTruth : public Error {
 public:
  using Error::Error;
};

class UnknownType : public Error {
 public:
  using Error::Error;
};

class EmptyPredictionSet : public Error {
 public:
  using Error::Error;
};

class NoDonorPredictions : public Error {
 public:
  using Error::Error;
};

class MissingLabel : public Error {
 public:
  explicit MissingLabel(std::string track_id)
      : Error("no ground-truth label for track '" + track_id + "'"), track_id_(std::move(track_id)) {}
  const std::string& track_id() const noexcept { return track_id_; }

 private:
  std::string track_id_;
};

class EmptySet : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dimseed
