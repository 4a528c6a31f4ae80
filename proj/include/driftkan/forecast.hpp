#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "driftkan/patching.hpp"
#include "driftkan/types.hpp"

namespace driftkan {

// Order-1 transition frequencies over a concept label sequence.
struct ConceptTransitionModel {
  int k = 0;                       // labels live in [0, k)
  Matrix counts;                   // k x k, counts(a, b) = #adjacent (a, b)
  Matrix probabilities;            // row-normalised counts; zero rows stay zero
  Vector frequencies;              // global label frequencies
  std::vector<bool> observed;      // label appeared in the sequence
};

enum class StatsPolicy { LastOfConcept, LastOverall };

struct ValueForecast {
  Vector prediction;   // length D, normalised space
  Matrix denormalized; // w x N, original units
  std::vector<std::pair<std::size_t, double>> weights;  // (0-based patch index, alpha)
};

ConceptTransitionModel fit_concept_transitions(const std::vector<int>& labels);

int predict_next_concept(const ConceptTransitionModel& model, int current, double noise_sigma = 0.0,
                         std::uint64_t seed = 0);

ValueForecast predict_next_patch(const PatchSet& history, const std::vector<int>& patch_labels, int target_concept,
                                 double gamma = 0.9, StatsPolicy policy = StatsPolicy::LastOfConcept);

struct ForecastOptions {
  double gamma = 0.9;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  StatsPolicy policy = StatsPolicy::LastOfConcept;
};

struct ForecastBundle {
  PatchSet history;               // normalised patches
  std::vector<int> patch_labels;  // concept per history patch
  ConceptTransitionModel transitions;
  int current_concept = 0;
};

struct HorizonForecast {
  std::vector<int> concepts;
  std::vector<ValueForecast> steps;
};

HorizonForecast forecast_horizon(const ForecastBundle& bundle, std::size_t horizon, const ForecastOptions& options = {});

// Collapses runs of equal labels: [0,0,1,1,0] -> [0,1,0].
std::vector<int> run_labels(const std::vector<int>& patch_labels);

}  // namespace driftkan
