#ifndef SEMCERT_SMOOTHING_HPP
#define SEMCERT_SMOOTHING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "semcert/classifiers.hpp"
#include "semcert/radii.hpp"
#include "semcert/rng.hpp"
#include "semcert/statfn.hpp"
#include "semcert/transforms.hpp"

namespace semcert {

// Everything needed to evaluate the smoothed classifier E[h(phi(x, eps))].
// The classifier is borrowed and must outlive the query.
struct SmoothedQuery {
  const BaseClassifier* classifier = nullptr;
  TransformSpec transform;
  DistributionSpec noise;
  ConfidenceParams conf;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // workers for sample_counts; results do not depend on it

  // Throws ArgumentError when the classifier is missing or noise.dim does not match
  // the transform's parameter dimension for this image shape.
  void validate(const Shape& image_shape) const;
};

using CountVector = std::vector<std::uint64_t>;

// Random streams used by the protocol, kept disjoint so selection and estimation
// samples are independent.
inline constexpr std::uint64_t kSelectionStream = 0;
inline constexpr std::uint64_t kEstimationStream = 1;
inline constexpr std::uint64_t kPredictionStream = 2;

// Writes noise draw number `draw` into `out` (size noise.dim).
void sample_noise(const DistributionSpec& noise, const CounterRng& rng, std::uint64_t draw,
                  std::span<double> out);

// Tallies h(phi(x, eps_t)) for draws t = first_draw .. first_draw + n - 1.
CountVector sample_counts(const SmoothedQuery& q, const ImageTensor& x, std::uint64_t n,
                          std::uint64_t stream = kPredictionStream, std::uint64_t first_draw = 0);

// Index of the largest count, ties to the smallest label.
Label top_class(const CountVector& counts);

// nullopt means abstain.
std::optional<Label> predict(const SmoothedQuery& q, const ImageTensor& x);

struct CertifyOutcome {
  bool abstain = true;
  Label label = 0;
  double p_a_lower = 0.0;
  std::uint64_t hits = 0;          // estimation samples that returned `label`
  std::uint64_t samples_used = 0;  // selection plus estimation samples
};

// Selection with n0 samples, then a one-sided Clopper-Pearson bound from n fresh
// samples. Abstains when the bound is <= 1/2.
CertifyOutcome certify(const SmoothedQuery& q, const ImageTensor& x);

// The radius expressed in the units a target is measured in: sigma * value for an
// isotropic gaussian, `value` for every other family.
double comparable_radius(const RadiusResult& r);

struct ProgressiveOutcome {
  bool certified = false;
  bool abstain = false;  // the estimate never exceeded 1/2
  Label label = 0;
  double p_a_lower = 0.0;
  RadiusResult radius;
  double radius_value = 0.0;  // comparable_radius(radius)
  double per_check_alpha = 0.0;
  std::uint64_t checks = 0;
  std::uint64_t hits = 0;
  std::uint64_t estimation_samples = 0;
  std::uint64_t samples_used = 0;
};

// Draws estimation samples in batches and stops as soon as the certified radius from
// the cumulative counts exceeds target_radius. Each check runs at alpha / ceil(n / batch)
// so the overall error stays below alpha.
ProgressiveOutcome progressive_certify(const SmoothedQuery& q, const ImageTensor& x,
                                       double target_radius, std::uint64_t batch);

}  // namespace semcert

#endif  // SEMCERT_SMOOTHING_HPP
