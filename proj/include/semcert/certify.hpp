#ifndef SEMCERT_CERTIFY_HPP
#define SEMCERT_CERTIFY_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semcert/aliasing.hpp"
#include "semcert/classifiers.hpp"
#include "semcert/radii.hpp"
#include "semcert/smoothing.hpp"
#include "semcert/transforms.hpp"

namespace semcert {

// The set of transform parameters a certificate has to cover.
//   blur       [0, hi]                          squared kernel radius
//   disk       integer displacements with dx^2 + dy^2 <= radius^2
//   rectangle  [k_lo, k_hi] x [b_lo, b_hi]      log-contrast and brightness
//   interval   [lo, hi]                         rotation angle (radians) or scale factor
struct ParameterSet {
  enum class Kind { blur, disk, rectangle, interval };
  Kind kind = Kind::interval;
  double lo = 0.0;
  double hi = 0.0;
  double radius = 0.0;
  double k_lo = 0.0, k_hi = 0.0, b_lo = 0.0, b_hi = 0.0;

  static ParameterSet blur(double alpha_max) { return {Kind::blur, 0.0, alpha_max}; }
  static ParameterSet disk(double rho) { return {Kind::disk, 0.0, 0.0, rho}; }
  static ParameterSet rectangle(double k_lo, double k_hi, double b_lo, double b_hi) {
    return {Kind::rectangle, 0.0, 0.0, 0.0, k_lo, k_hi, b_lo, b_hi};
  }
  static ParameterSet interval(double lo, double hi) { return {Kind::interval, lo, hi}; }

  // Throws ArgumentError for an empty or non-finite region.
  void validate() const;
  // Human-readable form such as "blur[0,9]" used in reports.
  std::string describe() const;
};

// Integer displacements (dx, dy) with dx^2 + dy^2 <= rho^2, ordered by dx then dy.
std::vector<std::array<long long, 2>> disk_displacements(double rho);

enum class Verdict { certified, abstain, not_certified };
std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

struct CertificationResult {
  Verdict verdict = Verdict::abstain;
  Label predicted_class = 0;
  double p_a_lower = 0.0;
  RadiusResult radius;
  double radius_value = 0.0;  // comparable_radius(radius); smallest anchor radius for rotation/scaling
  std::optional<AliasingBound> aliasing;
  std::uint64_t samples_used = 0;
  double elapsed = 0.0;  // seconds

  // Brightness/contrast audit trail: worst shifted confidence and worst corner value.
  double shifted_p_a = 0.0;
  double worst_lhs = 0.0;
  // Rotation/scaling: number of anchors and the union-bound error over all of them.
  std::size_t anchors = 0;
  double joint_error = 0.0;
  // Translation enumeration: first displacement whose label differs.
  std::optional<std::array<long long, 2>> witness;
  // Whether the transform is reversible; only then does the certificate carry over to
  // the pre-image of a transformed input.
  bool reversible = false;
};

// Blur (exponential, uniform with lower bound >= 0, or folded gaussian noise) or
// reflect translation (isotropic gaussian noise over two dimensions). Runs certify,
// turns p_a_lower into a radius, and certifies iff the predicted class is `label` and
// the region lies strictly inside the certified set. Throws ConfigError for any other
// transform, noise family or region kind.
CertificationResult certify_resolvable(const ImageTensor& x, Label label, const SmoothedQuery& q,
                                       const ParameterSet& region);

// Brightness/contrast rectangle with gaussian (sigma, tau) noise. The confidence is
// shifted by the worst log-contrast endpoint and every rectangle corner must satisfy
// the strict ellipse condition.
CertificationResult certify_bc_rectangle(const ImageTensor& x, Label label, const SmoothedQuery& q,
                                         const ParameterSet& rect);

// Rotation or scaling. q.noise is isotropic gaussian over all K*W*H pixels and is
// applied additively to each anchor image. The anchors come from `grid` over
// region [lo, hi] (grid.a, grid.b and grid.kind are overwritten). Every anchor must
// certify `label` with a radius above sqrt(M). Anchors are processed in order and the
// first failing anchor decides the verdict (abstain or not_certified).
CertificationResult certify_diff_resolvable(const ImageTensor& x, Label label, const SmoothedQuery& q,
                                            const ParameterSet& interval, IntervalGrid grid,
                                            std::uint64_t batch = 400);

// Exact check of black-padded translation: h must return `label` for every integer
// displacement of the disk. Displacements that push the whole frame out of view all
// give the same black image, which is classified once.
CertificationResult certify_translation_enum(const ImageTensor& x, Label label, const BaseClassifier& h,
                                             const ParameterSet& region);

// Recomputes a certified verdict from the stored numbers: p_a_lower > 1/2, the
// radius against the region, and sqrt(M) against the anchor radius. Returns true when
// the stored verdict is consistent with them.
bool audit_certificate(const CertificationResult& r, TransformKind kind, const ParameterSet& region);

// Everything needed to certify a dataset with one pipeline.
struct PipelineConfig {
  TransformKind transform = TransformKind::gaussian_blur;
  DistributionSpec noise;
  ConfidenceParams conf;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // sampling workers inside one sample
  IntervalGrid grid;     // rotation and scaling only
  std::uint64_t batch = 400;
};

// Dispatches to the matching pipeline for one sample. The smoothing seed is derived
// from cfg.seed and `index` so results do not depend on evaluation order.
CertificationResult certify_sample(const BaseClassifier& h, const PipelineConfig& cfg, const ImageTensor& x,
                                   Label label, const ParameterSet& region, std::size_t index);

// Smoothed prediction used for clean accuracy: the base classifier itself for black
// translation, additive pixel noise for rotation and scaling, the pipeline's own
// smoothing otherwise. nullopt means abstain.
std::optional<Label> smoothed_prediction(const BaseClassifier& h, const PipelineConfig& cfg, const ImageTensor& x,
                                         std::size_t index);

struct LabeledImage {
  ImageTensor image;
  Label label;
};

struct AccuracyRow {
  std::string region;
  std::size_t total = 0;
  std::size_t certified_correct = 0;
  double robust_accuracy = 0.0;
};

struct AccuracyReport {
  std::size_t total = 0;
  std::size_t clean_correct = 0;
  double clean_accuracy = 0.0;
  std::vector<AccuracyRow> rows;
  std::vector<std::optional<Label>> predictions;         // per sample
  std::vector<std::vector<CertificationResult>> results;  // [region][sample]
};

// Clean accuracy of the smoothed predictor plus, for every region, the fraction of
// samples certified with their true label. Samples are spread over `workers` threads
// and merged by index. Throws ArgumentError for an empty dataset.
AccuracyReport robust_accuracy_report(const std::vector<LabeledImage>& data, const BaseClassifier& h,
                                      const PipelineConfig& cfg, const std::vector<ParameterSet>& regions,
                                      unsigned workers = 1);

}  // namespace semcert

#endif  // SEMCERT_CERTIFY_HPP
