#ifndef MOFASM_EXEC_HPP_
#define MOFASM_EXEC_HPP_

namespace mofasm {

/// Selects the serial reference or the OpenMP path of a kernel.
enum class Exec { Serial, Parallel };

} // namespace mofasm

#endif
