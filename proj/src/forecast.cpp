#include "driftkan/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftkan/error.hpp"
#include "driftkan/rng.hpp"

namespace driftkan {

ConceptTransitionModel fit_concept_transitions(const std::vector<int>& labels) {
  if (labels.empty()) throw Error(ErrorCode::EmptySequence, "concept history is empty");
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw Error(ErrorCode::UnknownLabel, "negative label " + std::to_string(l));
    k = std::max(k, l + 1);
  }
  ConceptTransitionModel m;
  m.k = k;
  m.counts = Matrix::Zero(k, k);
  m.frequencies = Vector::Zero(k);
  m.observed.assign(static_cast<std::size_t>(k), false);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    m.frequencies(labels[i]) += 1.0;
    m.observed[static_cast<std::size_t>(labels[i])] = true;
    if (i + 1 < labels.size()) m.counts(labels[i], labels[i + 1]) += 1.0;
  }
  m.frequencies /= static_cast<double>(labels.size());
  m.probabilities = Matrix::Zero(k, k);
  for (int a = 0; a < k; ++a) {
    const double row = m.counts.row(a).sum();
    if (row > 0.0) m.probabilities.row(a) = m.counts.row(a) / row;
  }
  return m;
}

int predict_next_concept(const ConceptTransitionModel& model, int current, double noise_sigma, std::uint64_t seed) {
  if (current < 0 || current >= model.k || !model.observed[static_cast<std::size_t>(current)])
    throw Error(ErrorCode::UnknownLabel, "concept " + std::to_string(current) + " not in history");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise_sigma must be nonnegative");
  Vector scores = model.counts.row(current).sum() > 0.0 ? Vector(model.probabilities.row(current).transpose())
                                                         : model.frequencies;
  if (noise_sigma > 0.0) {
    Rng rng(seed);
    for (Eigen::Index i = 0; i < scores.size(); ++i) scores(i) += noise_sigma * rng.normal();
  }
  int best = -1;
  for (int c = 0; c < model.k; ++c) {
    if (!model.observed[static_cast<std::size_t>(c)]) continue;
    if (best < 0 || scores(c) > scores(best)) best = c;
  }
  return best;
}

ValueForecast predict_next_patch(const PatchSet& history, const std::vector<int>& patch_labels, int target_concept,
                                 double gamma, StatsPolicy policy) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorCode::InvalidConfig, "gamma must lie in (0, 1]");
  if (patch_labels.size() != history.n) throw Error(ErrorCode::LengthMismatch, "one label per history patch required");

  ValueForecast out;
  double weight = 1.0;
  double total = 0.0;
  for (std::size_t i = history.n; i-- > 0;) {
    if (patch_labels[i] != target_concept) continue;
    out.weights.emplace_back(i, weight);
    total += weight;
    weight *= gamma;
  }
  if (out.weights.empty())
    throw Error(ErrorCode::NoHistoryForConcept, "no historical patch for concept " + std::to_string(target_concept));

  out.prediction = Vector::Zero(static_cast<Eigen::Index>(history.dim));
  // Oldest first, so the sum runs in chronological order.
  for (auto it = out.weights.rbegin(); it != out.weights.rend(); ++it) {
    it->second /= total;
    out.prediction += it->second * history.data.row(static_cast<Eigen::Index>(it->first)).transpose();
  }
  std::reverse(out.weights.begin(), out.weights.end());

  const std::size_t stats_index = policy == StatsPolicy::LastOfConcept ? out.weights.back().first : history.n - 1;
  const Patch normalized = Patch::unflatten(out.prediction, history.w, history.channels, history.n + 1);
  if (history.stats.size() == history.n && history.normalized)
    out.denormalized = denormalize_patch(normalized, history.stats[stats_index]).data;
  else
    out.denormalized = normalized.data;
  return out;
}

HorizonForecast forecast_horizon(const ForecastBundle& bundle, std::size_t horizon, const ForecastOptions& options) {
  if (horizon < 1) throw Error(ErrorCode::InvalidConfig, "horizon must be >= 1");
  PatchSet history = bundle.history;
  std::vector<int> labels = bundle.patch_labels;
  int current = bundle.current_concept;
  HorizonForecast out;
  for (std::size_t step = 0; step < horizon; ++step) {
    const int next = predict_next_concept(bundle.transitions, current, options.noise_sigma,
                                          derive_seed(options.seed, step));
    ValueForecast f = predict_next_patch(history, labels, next, options.gamma, options.policy);

    // The prediction becomes pseudo-history carrying the stats it was denormalised with.
    const std::size_t stats_index =
        options.policy == StatsPolicy::LastOfConcept ? f.weights.back().first : history.n - 1;
    history.data.conservativeResize(history.data.rows() + 1, Eigen::NoChange);
    history.data.row(history.data.rows() - 1) = f.prediction.transpose();
    if (history.stats.size() == history.n) history.stats.push_back(history.stats[stats_index]);
    ++history.n;
    labels.push_back(next);

    out.concepts.push_back(next);
    out.steps.push_back(std::move(f));
    current = next;
  }
  return out;
}

std::vector<int> run_labels(const std::vector<int>& patch_labels) {
  std::vector<int> runs;
  for (int l : patch_labels)
    if (runs.empty() || runs.back() != l) runs.push_back(l);
  return runs;
}

}  // namespace driftkan
