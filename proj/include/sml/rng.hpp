#pragma once

#include <cstdint>
#include <vector>

namespace sml {

/// Deterministic RNG used for every randomized batch in the project.
/// Distribution code is hand-rolled (xoshiro-style core + Box-Muller) so that
/// identical seeds give identical streams on any platform; std:: distributions
/// are implementation-defined and would break the byte-identical-output
/// contract of the CLI.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);
  double normal();                        // standard normal, Box-Muller

 private:
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Coefficients of a truncated cosine/Fourier series with decaying amplitudes,
/// the building block for "random smooth" functions on a meridian.
/// mode k carries weight amp / (1 + k)^2.
std::vector<double> random_series_coeffs(Rng& rng, int kmax, double amp);

}  // namespace sml
