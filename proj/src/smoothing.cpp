#include "semcert/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "semcert/errors.hpp"

namespace semcert {

void SmoothedQuery::validate(const Shape& image_shape) const {
  if (classifier == nullptr) throw ArgumentError("smoothed query has no classifier");
  noise.validate();
  conf.validate();
  if (noise.dim != transform.param_dim(image_shape)) {
    throw ArgumentError("noise dimension " + std::to_string(noise.dim) + " does not match the " +
                        std::string(to_string(transform.kind)) + " parameter dimension " +
                        std::to_string(transform.param_dim(image_shape)));
  }
}

void sample_noise(const DistributionSpec& noise, const CounterRng& rng, std::uint64_t draw,
                  std::span<double> out) {
  const auto& p = noise.params;
  for (std::size_t c = 0; c < out.size(); ++c) {
    switch (noise.family) {
      case NoiseFamily::gaussian:
        out[c] = p[c] * rng.normal(draw, c);
        break;
      case NoiseFamily::exponential:
        out[c] = -std::log(rng.uniform(draw, c)) / p[0];
        break;
      case NoiseFamily::uniform:
        out[c] = p[0] + (p[1] - p[0]) * rng.uniform(draw, c);
        break;
      case NoiseFamily::laplace: {
        const double u = rng.uniform(draw, c) - 0.5;
        out[c] = -p[0] * std::copysign(std::log1p(-2.0 * std::abs(u)), u);
        break;
      }
      case NoiseFamily::folded_gaussian:
        out[c] = p[0] * std::abs(rng.normal(draw, c));
        break;
    }
  }
}

namespace {

void tally_range(const SmoothedQuery& q, const ImageTensor& x, const CounterRng& rng,
                 std::uint64_t begin, std::uint64_t end, CountVector& counts) {
  std::vector<double> eps(q.noise.dim);
  const std::size_t classes = counts.size();
  for (std::uint64_t t = begin; t < end; ++t) {
    sample_noise(q.noise, rng, t, eps);
    const Label label = q.classifier->classify(apply_transform(q.transform, x, eps));
    if (label >= classes) throw ArgumentError("classifier returned an out-of-range label");
    ++counts[label];
  }
}

}  // namespace

CountVector sample_counts(const SmoothedQuery& q, const ImageTensor& x, std::uint64_t n,
                          std::uint64_t stream, std::uint64_t first_draw) {
  if (n == 0) throw ArgumentError("sample_counts needs at least one sample");
  q.validate(x.shape());
  const CounterRng rng(q.seed, stream);
  const std::size_t classes = q.classifier->num_classes();

  const std::uint64_t workers = std::clamp<std::uint64_t>(q.threads, 1, n);
  if (workers == 1) {
    CountVector counts(classes, 0);
    tally_range(q, x, rng, first_draw, first_draw + n, counts);
    return counts;
  }

  // Each worker owns a contiguous block of draw indices; integer sums make the
  // reduction order irrelevant.
  std::vector<CountVector> partial(workers, CountVector(classes, 0));
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = first_draw + n * w / workers;
    const std::uint64_t end = first_draw + n * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        tally_range(q, x, rng, begin, end, partial[w]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  CountVector counts(classes, 0);
  for (const auto& p : partial) {
    for (std::size_t c = 0; c < classes; ++c) counts[c] += p[c];
  }
  return counts;
}

Label top_class(const CountVector& counts) {
  if (counts.empty()) throw ArgumentError("empty count vector");
  return static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::optional<Label> predict(const SmoothedQuery& q, const ImageTensor& x) {
  const auto counts = sample_counts(q, x, q.conf.n0_samples, kPredictionStream);
  const Label top = top_class(counts);
  std::uint64_t runner_up = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (c != top) runner_up = std::max(runner_up, counts[c]);
  }
  if (binom_two_sided_p(counts[top], counts[top] + runner_up) <= q.conf.alpha) return top;
  return std::nullopt;
}

CertifyOutcome certify(const SmoothedQuery& q, const ImageTensor& x) {
  const auto selection = sample_counts(q, x, q.conf.n0_samples, kSelectionStream);
  const Label guess = top_class(selection);
  const auto estimation = sample_counts(q, x, q.conf.n_samples, kEstimationStream);

  CertifyOutcome out;
  out.label = guess;
  out.hits = estimation[guess];
  out.samples_used = q.conf.n0_samples + q.conf.n_samples;
  out.p_a_lower = clopper_pearson_lower(out.hits, q.conf.n_samples, q.conf.alpha);
  out.abstain = !(out.p_a_lower > 0.5);
  return out;
}

double comparable_radius(const RadiusResult& r) {
  if (r.kind == RadiusKind::l2_weighted && r.noise.isotropic()) return r.isotropic_l2();
  return r.value;
}

ProgressiveOutcome progressive_certify(const SmoothedQuery& q, const ImageTensor& x,
                                       double target_radius, std::uint64_t batch) {
  if (batch == 0) throw ArgumentError("batch size must be positive");
  if (!(target_radius >= 0.0)) throw ArgumentError("target radius must be non-negative");
  q.validate(x.shape());

  const std::uint64_t total = q.conf.n_samples;
  const std::uint64_t max_checks = (total + batch - 1) / batch;

  ProgressiveOutcome out;
  out.per_check_alpha = q.conf.alpha / static_cast<double>(max_checks);
  const auto selection = sample_counts(q, x, q.conf.n0_samples, kSelectionStream);
  out.label = top_class(selection);
  out.samples_used = q.conf.n0_samples;

  while (out.estimation_samples < total) {
    const std::uint64_t step = std::min(batch, total - out.estimation_samples);
    const auto counts = sample_counts(q, x, step, kEstimationStream, out.estimation_samples);
    out.hits += counts[out.label];
    out.estimation_samples += step;
    out.samples_used += step;
    ++out.checks;

    out.p_a_lower = clopper_pearson_lower(out.hits, out.estimation_samples, out.per_check_alpha);
    if (out.p_a_lower > 0.5) {
      out.radius = closed_form_radius(q.noise, ConfidencePair::two_class(out.p_a_lower));
      out.radius_value = comparable_radius(out.radius);
      if (out.radius_value > target_radius) {
        out.certified = true;
        return out;
      }
    } else {
      out.radius = RadiusResult{};
      out.radius.noise = q.noise;
      out.radius_value = 0.0;
    }
  }
  out.abstain = !(out.p_a_lower > 0.5);
  return out;
}

}  // namespace semcert
