/* Failure modes shared across the library. */

#pragma once

#include <stdexcept>
#include <string>

namespace fhn {

struct SingularEnclosure : std::runtime_error {
  explicit SingularEnclosure(const std::string& what = "every pivot candidate contains zero")
      : std::runtime_error(what) {}
};

struct NoEnclosure : std::runtime_error {
  explicit NoEnclosure(const std::string& what = "rough enclosure did not validate; halve the step")
      : std::runtime_error(what) {}
};

struct NoCrossing : std::runtime_error {
  explicit NoCrossing(const std::string& what = "trajectory did not reach the section within limits")
      : std::runtime_error(what) {}
};

struct TransversalityUnverified : std::runtime_error {
  explicit TransversalityUnverified(const std::string& what = "sign of <n,F> not constant on the crossing set")
      : std::runtime_error(what) {}
};

struct EnclosureBlowup : std::runtime_error {
  explicit EnclosureBlowup(const std::string& what = "enclosure width exceeded the configured limit")
      : std::runtime_error(what) {}
};

struct MapFailure : std::runtime_error {
  explicit MapFailure(const std::string& what) : std::runtime_error(what) {}
};

struct NewtonDiverged : std::runtime_error {
  explicit NewtonDiverged(const std::string& what = "nonrigorous Newton residual grew") : std::runtime_error(what) {}
};

struct NoSignChange : std::runtime_error {
  explicit NoSignChange(const std::string& what = "shooting bracket has no sign change") : std::runtime_error(what) {}
};

struct StepUnderflow : std::runtime_error {
  explicit StepUnderflow(const std::string& what = "adaptive step shrank below the allowed minimum")
      : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fhn
