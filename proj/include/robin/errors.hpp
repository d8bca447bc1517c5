#pragma once

#include <stdexcept>
#include <string>

namespace robin {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// geometry

class ClosureError : public Error {
 public:
  ClosureError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class SelfIntersectionError : public Error {
 public:
  using Error::Error;
};

class DegenerateCurve : public Error {
 public:
  using Error::Error;
};

class WidthExceedsCritical : public Error {
 public:
  using Error::Error;
};

// linear algebra

class SingularShift : public Error {
 public:
  SingularShift(const std::string& what, double shift) : Error(what), shift_(shift) {}
  double shift() const noexcept { return shift_; }

 private:
  double shift_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::string log) : Error(what), log_(std::move(log)) {}
  const std::string& log() const noexcept { return log_; }

 private:
  std::string log_;
};

// discretizations

class MeshTooCoarse : public Error {
 public:
  using Error::Error;
};

class JacobianNonPositive : public Error {
 public:
  using Error::Error;
};

// transplantation

class CurvatureCapViolated : public Error {
 public:
  using Error::Error;
};

class OrthogonalityTooWeak : public Error {
 public:
  using Error::Error;
};

// harness

class SecondBoundStateAbsent : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path) : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace robin
