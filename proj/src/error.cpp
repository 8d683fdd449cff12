#include "mofasm/error.hpp"

namespace mofasm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidLattice: return "invalid-lattice";
    case ErrorKind::InvalidAngleTriple: return "invalid-angle-triple";
    case ErrorKind::DegenerateLattice: return "degenerate-lattice";
    case ErrorKind::SingularLattice: return "singular-lattice";
    case ErrorKind::NiggliNonConvergence: return "niggli-non-convergence";
    case ErrorKind::UnknownElement: return "unknown-element";
    case ErrorKind::InvalidPartition: return "invalid-partition";
    case ErrorKind::CountMismatch: return "count-mismatch";
    case ErrorKind::LengthMismatch: return "length-mismatch";
    case ErrorKind::EmptySequence: return "empty-sequence";
    case ErrorKind::EmptyBlockList: return "empty-block-list";
    case ErrorKind::SpeciesMismatch: return "species-mismatch";
    case ErrorKind::Template: return "template-error";
    case ErrorKind::Schema: return "schema-violation";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

} // namespace mofasm
