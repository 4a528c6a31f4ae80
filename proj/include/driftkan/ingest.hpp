#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "driftkan/types.hpp"

namespace driftkan {

// Co-evolving series: one row per time step, one column per channel.
struct SeriesMatrix {
  Matrix values;
  std::vector<std::string> channel_names;

  std::size_t length() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t channels() const { return static_cast<std::size_t>(values.cols()); }
};

enum class GeneratorFamily { SinusoidMixture, LinearRecurrence };

// x[c](t) = sum_k amplitude[k] * coupling(c, k) * sin(2*pi*frequency[k]*t + phase(c, k))
struct SinusoidParams {
  std::vector<double> frequencies;  // cycles per step
  std::vector<double> amplitudes;
  Matrix coupling;  // N x K, entries in [-1, 1]
  Matrix phases;    // N x K
};

// K latent damped oscillators s_t = 2 r cos(omega) s_{t-1} - r^2 s_{t-2} + innovation * eta,
// mixed into channels by `mixing`.
struct RecurrenceParams {
  std::vector<double> radii;
  std::vector<double> angular_frequencies;
  Matrix mixing;  // N x K
  double innovation = 0.1;
};

struct RegimeSpec {
  GeneratorFamily family = GeneratorFamily::SinusoidMixture;
  std::size_t duration = 0;
  // Regimes sharing an id share parameters (recurring concept). -1 means "position in list".
  int id = -1;
  // Number of mixture components / latent oscillators when parameters are drawn.
  std::size_t components = 2;
  // When > 0, drawn sinusoid frequencies are whole multiples of 1/period, so the
  // regime repeats exactly every `period` steps. 0 draws frequencies continuously.
  std::size_t period = 0;
  std::optional<SinusoidParams> sinusoid;
  std::optional<RecurrenceParams> recurrence;
};

struct SyntheticSpec {
  std::size_t length = 0;
  std::size_t channels = 0;
  std::vector<RegimeSpec> regimes;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct GroundTruth {
  std::vector<std::size_t> boundaries;  // time steps where a new regime starts
  std::vector<int> labels;              // regime id per time step
};

SeriesMatrix load_csv(const std::string& path, bool has_header,
                      std::optional<std::size_t> timestamp_column = std::nullopt);

// Writes values with `significant_digits` digits; header row when with_header.
void save_csv(const std::string& path, const SeriesMatrix& series, bool with_header = true,
              int significant_digits = 12);

// Parameters drawn for a regime id when the spec leaves them out.
SinusoidParams draw_sinusoid_params(std::uint64_t seed, int regime_id, std::size_t channels,
                                    std::size_t components, std::size_t period = 0);
RecurrenceParams draw_recurrence_params(std::uint64_t seed, int regime_id, std::size_t channels,
                                        std::size_t components);

void validate(const SyntheticSpec& spec);

std::pair<SeriesMatrix, GroundTruth> generate_synthetic(const SyntheticSpec& spec);

// Series for contiguous patches drawn from `concepts` disjoint random linear subspaces
// of the given dimension: the idealised block-diagonal fixture.
struct SubspaceFixture {
  Matrix patches;           // n x D
  std::vector<int> labels;  // concept per patch
};
SubspaceFixture generate_subspace_patches(std::size_t patches_per_concept, std::size_t concepts,
                                          std::size_t patch_dim, std::size_t subspace_dim,
                                          std::uint64_t seed);

}  // namespace driftkan
