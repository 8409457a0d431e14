#ifndef GIBBS_EXEC_HPP
#define GIBBS_EXEC_HPP

namespace gibbs {

/// Selects between the serial reference kernel and the OpenMP kernel.
/// Both produce bit-identical results; the serial path is kept for testing
/// and benchmarking.
enum class Exec { Serial, Parallel };

} // namespace gibbs

#endif
