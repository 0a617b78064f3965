#ifndef FLEETAGG_CLI_HPP
#define FLEETAGG_CLI_HPP

#include <iosfwd>

namespace fleetagg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point for the fleetagg command: synth | fit | evaluate.
/// Returns 0 on success, 2 on usage errors, 1 on runtime errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fleetagg::cli

#endif  // FLEETAGG_CLI_HPP
