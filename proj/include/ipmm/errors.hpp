#ifndef IPMM_ERRORS_HPP
#define IPMM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ipmm {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/* Collinear / coincident / empty inputs where a construction needs otherwise. */
struct DegenerateInputError : Error {
  using Error::Error;
};

/* A vertex move whose displacement reaches the local motion bound. */
struct MoveTooFarError : Error {
  using Error::Error;
};

/* An interface operation that would disturb a domain-boundary vertex or push
 * an interface vertex outside the meshed domain. */
struct BoundaryConflictError : Error {
  using Error::Error;
};

/* Mesh topology or bookkeeping broke an invariant (bad id, duplicate point,
 * inconsistent stencil). */
struct MeshError : Error {
  using Error::Error;
};

/* Interface ring invariant violations (ring too small, not closed, ...). */
struct InterfaceError : Error {
  using Error::Error;
};

/* Could not create, write, or read an output artifact. */
struct IoError : Error {
  using Error::Error;
};

/* A benchmark-run invariant failed one of the requested runtime checks. */
struct ValidationError : Error {
  using Error::Error;
};

}  // namespace ipmm

#endif
