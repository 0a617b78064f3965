#ifndef FLEETAGG_MODEL_IO_HPP
#define FLEETAGG_MODEL_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fleetagg/copula.hpp"

namespace fleetagg {

inline constexpr int kModelFormatVersion = 1;

/// Line-oriented text format. Reals are written in shortest round-trip
/// form, so write followed by read reproduces every stored value exactly.
///
///   fleetagg-copula-model
///   format_version 1
///   clamp_eps <real>
///   t_used <int>
///   clamp_rate <real>
///   psd_repair_applied <0|1>
///   min_eigenvalue_before_repair <real>
///   jitter_used <real>
///   n_sites <N>
///   site <id>                 (N lines, in model order)
///   z_mean <N reals>
///   sigma                     (then N rows of N reals, row-major)
void write_model(std::ostream& out, const CopulaModel& model);
void write_model(const std::filesystem::path& path, const CopulaModel& model);

/// The Cholesky factor is recomputed from the stored sigma.
CopulaModel read_model(std::istream& in);
CopulaModel read_model(const std::filesystem::path& path);

/// Shortest decimal string that parses back to the same double.
std::string format_real(double value);

}  // namespace fleetagg

#endif  // FLEETAGG_MODEL_IO_HPP
