#pragma once

#include <stdexcept>
#include <string>

namespace cglb {

// Base for every failure raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

class NoRealSolution : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "NoRealSolution"; }
};

class OutOfRange : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "OutOfRange"; }
};

class EmptySampleSet : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "EmptySampleSet"; }
};

// Raised when a norm crosses the blow-up threshold or the advective CFL
// limit is exceeded. Carries the simulation time of the failure.
class StepUnstable : public Error {
public:
  StepUnstable(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }
  const char* kind() const noexcept override { return "StepUnstable"; }

private:
  double time_;
};

// The polar chart P = r e^{i theta} is not usable: |P| came too close to 0.
class AmplitudeVanishes : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "AmplitudeVanishes"; }
};

class ChartBreakdown : public Error {
public:
  ChartBreakdown(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }
  const char* kind() const noexcept override { return "ChartBreakdown"; }

private:
  double time_;
};

class ConfigError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "ConfigError"; }
};

}  // namespace cglb
