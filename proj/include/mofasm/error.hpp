// Error type shared by all mofasm modules.

#ifndef MOFASM_ERROR_HPP_
#define MOFASM_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mofasm {

enum class ErrorKind {
  InvalidLattice,
  InvalidAngleTriple,
  DegenerateLattice,
  SingularLattice,
  NiggliNonConvergence,
  UnknownElement,
  InvalidPartition,
  CountMismatch,
  LengthMismatch,
  EmptySequence,
  EmptyBlockList,
  SpeciesMismatch,
  Template,
  Schema,
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
private:
  ErrorKind kind_;
};

} // namespace mofasm

#endif
