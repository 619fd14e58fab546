#include "semcert/certify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "semcert/errors.hpp"
#include "semcert/rng.hpp"

namespace semcert {

void ParameterSet::validate() const {
  auto finite = [](std::initializer_list<double> v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
  };
  switch (kind) {
    case Kind::blur:
      if (lo != 0.0 || !finite({hi}) || !(hi >= 0.0)) throw ArgumentError("blur region must be [0, alpha_max]");
      return;
    case Kind::disk:
      if (!finite({radius}) || !(radius >= 0.0)) throw ArgumentError("disk radius must be finite and >= 0");
      return;
    case Kind::rectangle:
      if (!finite({k_lo, k_hi, b_lo, b_hi}) || !(k_lo <= k_hi) || !(b_lo <= b_hi)) {
        throw ArgumentError("rectangle needs k_lo <= k_hi and b_lo <= b_hi");
      }
      return;
    case Kind::interval:
      if (!finite({lo, hi}) || !(lo < hi)) throw ArgumentError("interval needs lo < hi");
      return;
  }
}

std::string ParameterSet::describe() const {
  std::ostringstream s;
  s.precision(6);
  switch (kind) {
    case Kind::blur:
      s << "blur[0," << hi << "]";
      break;
    case Kind::disk:
      s << "disk[" << radius << "]";
      break;
    case Kind::rectangle:
      s << "rect[" << k_lo << "," << k_hi << "]x[" << b_lo << "," << b_hi << "]";
      break;
    case Kind::interval:
      s << "interval[" << lo << "," << hi << "]";
      break;
  }
  return s.str();
}

std::vector<std::array<long long, 2>> disk_displacements(double rho) {
  if (!std::isfinite(rho) || rho < 0.0) throw ArgumentError("disk radius must be finite and >= 0");
  const auto r = static_cast<long long>(std::floor(rho));
  std::vector<std::array<long long, 2>> out;
  for (long long dx = -r; dx <= r; ++dx) {
    for (long long dy = -r; dy <= r; ++dy) {
      if (std::sqrt(static_cast<double>(dx * dx + dy * dy)) <= rho) out.push_back({dx, dy});
    }
  }
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::certified:
      return "certified";
    case Verdict::abstain:
      return "abstain";
    case Verdict::not_certified:
      return "not_certified";
  }
  return "?";
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "certified") return Verdict::certified;
  if (s == "abstain") return Verdict::abstain;
  if (s == "not_certified") return Verdict::not_certified;
  throw ParseError("unknown verdict '" + std::string(s) + "'", 0);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string pairing(const SmoothedQuery& q) {
  return std::string(to_string(q.transform.kind)) + " with " + std::string(to_string(q.noise.family)) + " noise";
}

void check_blur_noise(const SmoothedQuery& q) {
  const auto& n = q.noise;
  const bool ok = n.dim == 1 && (n.family == NoiseFamily::exponential || n.family == NoiseFamily::folded_gaussian ||
                                 (n.family == NoiseFamily::uniform && n.params.size() == 2 && n.params[0] >= 0.0));
  if (!ok) {
    throw ConfigError("blur needs one-dimensional noise on [0, inf): exponential, folded gaussian or uniform "
                      "with a non-negative lower bound; got " + pairing(q));
  }
}

// The worst shifted confidence over [k_lo, k_hi]: the shift only degrades as |k| grows.
double worst_shift(double p_a, const ParameterSet& rect) {
  return std::min(bc_confidence_shift(p_a, rect.k_lo), bc_confidence_shift(p_a, rect.k_hi));
}

// Both terms of the ellipse condition are convex in each variable, so the largest
// left-hand side over the rectangle sits on a corner.
double worst_corner_lhs(const ParameterSet& rect, double sigma, double tau) {
  double worst = 0.0;
  for (double k : {rect.k_lo, rect.k_hi}) {
    for (double b : {rect.b_lo, rect.b_hi}) worst = std::max(worst, bc_condition_lhs(k, b, sigma, tau));
  }
  return worst;
}

double bc_rhs(double shifted_p_a) {
  const auto c = ConfidencePair::two_class(shifted_p_a);
  return 0.5 * (std_normal_quantile(c.p_a) - std_normal_quantile(c.p_b));
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return CounterRng(seed, tag).bits(index, 0);
}

constexpr std::uint64_t kAnchorSeedTag = 0xA4C4;
constexpr std::uint64_t kSampleSeedTag = 0x5A3D;

SmoothedQuery pixel_query(const SmoothedQuery& q) {
  SmoothedQuery a = q;
  a.transform = TransformSpec::of(TransformKind::additive);
  return a;
}

}  // namespace

CertificationResult certify_resolvable(const ImageTensor& x, Label label, const SmoothedQuery& q,
                                       const ParameterSet& region) {
  const auto start = Clock::now();
  region.validate();
  switch (q.transform.kind) {
    case TransformKind::gaussian_blur:
      check_blur_noise(q);
      if (region.kind != ParameterSet::Kind::blur) throw ConfigError("blur certification needs a blur region");
      break;
    case TransformKind::translation_reflect:
      if (q.noise.family != NoiseFamily::gaussian || q.noise.dim != 2 || !q.noise.isotropic()) {
        throw ConfigError("reflect translation needs isotropic two-dimensional gaussian noise; got " + pairing(q));
      }
      if (region.kind != ParameterSet::Kind::disk) throw ConfigError("translation certification needs a disk region");
      break;
    default:
      throw ConfigError("certify_resolvable does not handle " + std::string(to_string(q.transform.kind)));
  }

  const auto outcome = certify(q, x);
  CertificationResult out;
  out.predicted_class = outcome.label;
  out.p_a_lower = outcome.p_a_lower;
  out.samples_used = outcome.samples_used;
  out.reversible = q.transform.reversible();
  out.radius.noise = q.noise;
  if (outcome.abstain) {
    out.verdict = Verdict::abstain;
  } else {
    out.radius = closed_form_radius(q.noise, ConfidencePair::two_class(outcome.p_a_lower));
    out.radius_value = comparable_radius(out.radius);
    bool inside;
    if (region.kind == ParameterSet::Kind::blur) {
      const double corner[] = {region.hi};
      inside = out.radius.admits(corner);
    } else {
      inside = region.radius < out.radius_value;
    }
    out.verdict = outcome.label == label && inside ? Verdict::certified : Verdict::not_certified;
  }
  out.elapsed = seconds_since(start);
  return out;
}

CertificationResult certify_bc_rectangle(const ImageTensor& x, Label label, const SmoothedQuery& q,
                                         const ParameterSet& rect) {
  const auto start = Clock::now();
  rect.validate();
  if (q.transform.kind != TransformKind::brightness_contrast) {
    throw ConfigError("certify_bc_rectangle needs the brightness_contrast transform");
  }
  if (q.noise.family != NoiseFamily::gaussian || q.noise.dim != 2) {
    throw ConfigError("brightness/contrast needs two-dimensional gaussian noise; got " + pairing(q));
  }
  if (rect.kind != ParameterSet::Kind::rectangle) throw ConfigError("brightness/contrast needs a rectangle region");

  const auto outcome = certify(q, x);
  CertificationResult out;
  out.predicted_class = outcome.label;
  out.p_a_lower = outcome.p_a_lower;
  out.samples_used = outcome.samples_used;
  out.reversible = q.transform.reversible();
  out.radius.noise = q.noise;
  if (outcome.abstain) {
    out.verdict = Verdict::abstain;
  } else {
    out.radius = closed_form_radius(q.noise, ConfidencePair::two_class(outcome.p_a_lower));
    out.radius_value = out.radius.value;
    out.shifted_p_a = worst_shift(outcome.p_a_lower, rect);
    out.worst_lhs = worst_corner_lhs(rect, q.noise.params[0], q.noise.params[1]);
    const bool inside = out.shifted_p_a > 0.5 && out.worst_lhs < bc_rhs(out.shifted_p_a);
    out.verdict = outcome.label == label && inside ? Verdict::certified : Verdict::not_certified;
  }
  out.elapsed = seconds_since(start);
  return out;
}

CertificationResult certify_diff_resolvable(const ImageTensor& x, Label label, const SmoothedQuery& q,
                                            const ParameterSet& interval, IntervalGrid grid, std::uint64_t batch) {
  const auto start = Clock::now();
  interval.validate();
  if (interval.kind != ParameterSet::Kind::interval) throw ConfigError("rotation/scaling needs an interval region");
  if (q.transform.kind == TransformKind::rotation) {
    grid.kind = GeometricKind::rotation;
  } else if (q.transform.kind == TransformKind::scaling) {
    grid.kind = GeometricKind::scaling;
  } else {
    throw ConfigError("certify_diff_resolvable handles rotation and scaling only");
  }
  if (q.noise.family != NoiseFamily::gaussian || !q.noise.isotropic() || q.noise.dim != x.size()) {
    throw ConfigError("rotation/scaling needs isotropic gaussian pixel noise of dimension " +
                      std::to_string(x.size()) + "; got " + pairing(q) + " of dimension " +
                      std::to_string(q.noise.dim));
  }
  grid.a = interval.lo;
  grid.b = interval.hi;
  grid.validate();

  CertificationResult out;
  out.reversible = q.transform.reversible();
  out.aliasing = aliasing_bound(x, grid, q.threads);
  const double target = out.aliasing->sqrt_m;
  const auto anchors = grid.anchors();
  out.anchors = anchors.size();
  out.joint_error = std::min(1.0, static_cast<double>(anchors.size()) * q.conf.alpha);
  out.radius.noise = q.noise;
  out.radius_value = INFINITY;
  out.p_a_lower = 1.0;
  out.verdict = Verdict::certified;

  SmoothedQuery aq = pixel_query(q);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    aq.seed = derived_seed(q.seed, kAnchorSeedTag, i);
    const ImageTensor img = grid.kind == GeometricKind::rotation ? rotate(x, anchors[i]) : scale(x, anchors[i]);
    const auto p = progressive_certify(aq, img, target, batch);
    out.samples_used += p.samples_used;
    if (i == 0 || p.label != label) out.predicted_class = p.label;
    if (p.p_a_lower < out.p_a_lower) {
      out.p_a_lower = p.p_a_lower;
      out.radius = p.radius;
      out.radius_value = p.radius_value;
    }
    if (p.abstain) {
      out.verdict = Verdict::abstain;
      break;
    }
    if (!p.certified || p.label != label) {
      out.verdict = Verdict::not_certified;
      break;
    }
  }
  out.elapsed = seconds_since(start);
  return out;
}

CertificationResult certify_translation_enum(const ImageTensor& x, Label label, const BaseClassifier& h,
                                             const ParameterSet& region) {
  const auto start = Clock::now();
  region.validate();
  if (region.kind != ParameterSet::Kind::disk) throw ConfigError("translation enumeration needs a disk region");

  CertificationResult out;
  out.reversible = TransformSpec::of(TransformKind::translation_black).reversible();
  out.p_a_lower = 1.0;
  out.predicted_class = h.classify(x);

  const auto w = static_cast<long long>(x.width());
  const auto hgt = static_cast<long long>(x.height());
  const auto r = static_cast<long long>(std::floor(region.radius));
  const long long ri = std::min(r, w - 1);
  const long long rj = std::min(r, hgt - 1);
  for (long long dx = -ri; dx <= ri && !out.witness; ++dx) {
    for (long long dy = -rj; dy <= rj; ++dy) {
      if (!(std::sqrt(static_cast<double>(dx * dx + dy * dy)) <= region.radius)) continue;
      ++out.samples_used;
      const Label got = h.classify(translate(x, static_cast<double>(dx), static_cast<double>(dy), Padding::black));
      if (got != label) {
        out.witness = std::array<long long, 2>{dx, dy};
        break;
      }
    }
  }
  if (!out.witness && r >= std::min(w, hgt)) {
    ++out.samples_used;
    const std::vector<double> zeros(x.size(), 0.0);
    if (h.classify(ImageTensor(x.shape(), zeros)) != label) {
      out.witness = w <= hgt ? std::array<long long, 2>{w, 0} : std::array<long long, 2>{0, hgt};
    }
  }
  out.verdict = out.witness ? Verdict::not_certified : Verdict::certified;
  out.elapsed = seconds_since(start);
  return out;
}

bool audit_certificate(const CertificationResult& r, TransformKind kind, const ParameterSet& region) {
  if (r.verdict == Verdict::not_certified) return true;
  if (kind == TransformKind::translation_black) return (r.verdict == Verdict::certified) == !r.witness.has_value();
  if (r.verdict == Verdict::abstain) return !(r.p_a_lower > 0.5);
  if (!(r.p_a_lower > 0.5)) return false;

  const auto radius = closed_form_radius(r.radius.noise, ConfidencePair::two_class(r.p_a_lower));
  switch (kind) {
    case TransformKind::gaussian_blur: {
      const double corner[] = {region.hi};
      return radius.admits(corner);
    }
    case TransformKind::translation_reflect:
      return region.radius < comparable_radius(radius);
    case TransformKind::brightness_contrast: {
      const double shifted = worst_shift(r.p_a_lower, region);
      const double lhs = worst_corner_lhs(region, r.radius.noise.params[0], r.radius.noise.params[1]);
      return shifted == r.shifted_p_a && lhs == r.worst_lhs && shifted > 0.5 && lhs < bc_rhs(shifted);
    }
    case TransformKind::rotation:
    case TransformKind::scaling:
      return r.aliasing.has_value() && comparable_radius(radius) == r.radius_value &&
             r.aliasing->sqrt_m < r.radius_value;
    default:
      return false;
  }
}

CertificationResult certify_sample(const BaseClassifier& h, const PipelineConfig& cfg, const ImageTensor& x,
                                   Label label, const ParameterSet& region, std::size_t index) {
  SmoothedQuery q{&h, TransformSpec::of(cfg.transform), cfg.noise, cfg.conf,
                  derived_seed(cfg.seed, kSampleSeedTag, index), cfg.threads};
  switch (cfg.transform) {
    case TransformKind::gaussian_blur:
    case TransformKind::translation_reflect:
      return certify_resolvable(x, label, q, region);
    case TransformKind::brightness_contrast:
      return certify_bc_rectangle(x, label, q, region);
    case TransformKind::rotation:
    case TransformKind::scaling:
      return certify_diff_resolvable(x, label, q, region, cfg.grid, cfg.batch);
    case TransformKind::translation_black:
      return certify_translation_enum(x, label, h, region);
    case TransformKind::additive:
      break;
  }
  throw ConfigError("no certification pipeline for the additive transform");
}

std::optional<Label> smoothed_prediction(const BaseClassifier& h, const PipelineConfig& cfg, const ImageTensor& x,
                                         std::size_t index) {
  if (cfg.transform == TransformKind::translation_black) return h.classify(x);
  SmoothedQuery q{&h, TransformSpec::of(cfg.transform), cfg.noise, cfg.conf,
                  derived_seed(cfg.seed, kSampleSeedTag, index), cfg.threads};
  if (cfg.transform == TransformKind::rotation || cfg.transform == TransformKind::scaling) q = pixel_query(q);
  return predict(q, x);
}

AccuracyReport robust_accuracy_report(const std::vector<LabeledImage>& data, const BaseClassifier& h,
                                      const PipelineConfig& cfg, const std::vector<ParameterSet>& regions,
                                      unsigned workers) {
  if (data.empty()) throw ArgumentError("robust_accuracy_report needs a non-empty dataset");
  for (const auto& r : regions) r.validate();

  AccuracyReport rep;
  rep.total = data.size();
  rep.predictions.resize(data.size());
  rep.results.assign(regions.size(), std::vector<CertificationResult>(data.size()));

  auto work = [&](std::size_t i) {
    rep.predictions[i] = smoothed_prediction(h, cfg, data[i].image, i);
    for (std::size_t r = 0; r < regions.size(); ++r) {
      rep.results[r][i] = certify_sample(h, cfg, data[i].image, data[i].label, regions[r], i);
    }
  };
  const std::size_t pool_size = std::clamp<std::size_t>(workers, 1, data.size());
  if (pool_size == 1) {
    for (std::size_t i = 0; i < data.size(); ++i) work(i);
  } else {
    std::vector<std::exception_ptr> errors(pool_size);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < pool_size; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < data.size(); i += pool_size) work(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (std::size_t i = 0; i < data.size(); ++i) {
    if (rep.predictions[i] == data[i].label) ++rep.clean_correct;
  }
  rep.clean_accuracy = static_cast<double>(rep.clean_correct) / static_cast<double>(rep.total);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    AccuracyRow row;
    row.region = regions[r].describe();
    row.total = data.size();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& res = rep.results[r][i];
      if (res.verdict == Verdict::certified && res.predicted_class == data[i].label) ++row.certified_correct;
    }
    row.robust_accuracy = static_cast<double>(row.certified_correct) / static_cast<double>(row.total);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace semcert
