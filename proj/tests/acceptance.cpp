// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero if any
// criterion fails. Every check compares library output against an oracle computed here
// by independent means.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "aliasing_oracle.hpp"
#include "semcert/aliasing.hpp"
#include "semcert/certify.hpp"
#include "semcert/classifiers.hpp"
#include "semcert/cli.hpp"
#include "semcert/io.hpp"
#include "semcert/radii.hpp"
#include "semcert/smoothing.hpp"
#include "semcert/statfn.hpp"
#include "semcert/transforms.hpp"
#include "test_support.hpp"

using namespace semcert;
using semcert::testing::random_image;

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

struct Outcome {
  bool pass = true;
  std::string detail;
};

ConfidenceParams params(std::uint64_t n, std::uint64_t n0 = 100, double alpha = 0.001) {
  ConfidenceParams c;
  c.alpha = alpha;
  c.n_samples = n;
  c.n0_samples = n0;
  return c;
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// ---------------------------------------------------------------------------------
// 1. radius golden suite

Big big_quantile(const Big& p) { return -boost::multiprecision::sqrt(Big(2)) * boost::math::erfc_inv(2 * p); }

Outcome radius_golden() {
  Outcome o;
  const Big pi = boost::math::constants::pi<Big>();
  const double laplace_b = 1.0 / std::numbers::sqrt2;
  const double folded_sigma = std::sqrt(std::numbers::pi / (std::numbers::pi - 2.0));
  double worst = 0.0;
  for (const char* pa_text : {"0.6", "0.75", "0.9", "0.99"}) {
    const Big pa(pa_text);
    const Big pb = 1 - pa;
    const double pad = static_cast<double>(pa), pbd = 1.0 - pad;
    const ConfidencePair conf{pad, pbd};
    const Big ref_gauss = (big_quantile(pa) - big_quantile(pb)) / 2;
    const Big ref_exp = -log(1 - pa + pb);
    const Big ref_laplace = -log(2 - 2 * pa) / sqrt(Big(2));
    const Big ref_uniform = 2 * sqrt(Big(3)) * (pa - Big("0.5"));
    const Big ref_folded = sqrt(pi / (pi - 2)) * (big_quantile((1 + pa) / 2) - big_quantile(Big("0.75")));
    const std::array<std::pair<double, Big>, 5> rows{{
        {closed_form_radius(DistributionSpec::gaussian({1.0}), conf).isotropic_l2(), ref_gauss},
        {closed_form_radius(DistributionSpec::exponential(1.0), conf).value, ref_exp},
        {closed_form_radius(DistributionSpec::laplace(laplace_b), conf).value, ref_laplace},
        {closed_form_radius(DistributionSpec::uniform(-std::sqrt(3.0), std::sqrt(3.0)), conf).value, ref_uniform},
        {closed_form_radius(DistributionSpec::folded_gaussian(folded_sigma), conf).value, ref_folded},
    }};
    for (const auto& [got, ref] : rows) worst = std::max(worst, std::abs(got - static_cast<double>(ref)));
  }
  const ConfidencePair c9{0.9, 0.1};
  const double g = closed_form_radius(DistributionSpec::gaussian({1.0}), c9).isotropic_l2();
  const double e = closed_form_radius(DistributionSpec::exponential(1.0), c9).value;
  const double u = closed_form_radius(DistributionSpec::uniform(-std::sqrt(3.0), std::sqrt(3.0)), c9).value;
  const double l = closed_form_radius(DistributionSpec::laplace(laplace_b), c9).value;
  const double golden_err = std::max({std::abs(g - 1.2815515655), std::abs(e - 1.6094379124), std::abs(u - 1.3856406461)});
  o.pass = worst <= 1e-9 && golden_err <= 1e-9;
  o.detail = "max |radius - 50-digit formula| = " + fmt(worst, 3) + " over 4 p_A x 5 families; golden G/E/U error " +
             fmt(golden_err, 3) + "; Laplace(0.9) = " + fmt(l, 11) +
             " (formula value; the quoted 1.1380830814 does not match its own formula)";
  return o;
}

// ---------------------------------------------------------------------------------
// 2. dominance of the exponential radius

Outcome dominance() {
  Outcome o;
  const double laplace_b = 1.0 / std::numbers::sqrt2;
  const double folded_sigma = std::sqrt(std::numbers::pi / (std::numbers::pi - 2.0));
  int checks = 0;
  for (double pa : {0.9, 0.99, 0.999}) {
    const ConfidencePair c{pa, 1.0 - pa};
    const double e = closed_form_radius(DistributionSpec::exponential(1.0), c).value;
    const double g = closed_form_radius(DistributionSpec::gaussian({1.0}), c).isotropic_l2();
    const double l = closed_form_radius(DistributionSpec::laplace(laplace_b), c).value;
    const double u = closed_form_radius(DistributionSpec::uniform(-std::sqrt(3.0), std::sqrt(3.0)), c).value;
    const double f = closed_form_radius(DistributionSpec::folded_gaussian(folded_sigma), c).value;
    for (bool ok : {e > g, e > l, e > u, f > g}) {
      ++checks;
      if (!ok) {
        o.pass = false;
        o.detail += "violated at p_A=" + fmt(pa) + "; ";
      }
    }
  }
  o.detail += std::to_string(checks) + " strict inequalities checked";
  return o;
}

// ---------------------------------------------------------------------------------
// 3. aliasing soundness

Outcome aliasing_soundness() {
  Outcome o;
  std::mt19937_64 gen(3003);
  int violations = 0, split_images = 0;
  double worst_ratio = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto x = random_image(gen, {1, 9, 9});
    for (const IntervalGrid grid : {IntervalGrid{-0.05, 0.05, 200, 50, GeometricKind::rotation},
                                    IntervalGrid{0.9, 1.1, 200, 50, GeometricKind::scaling}}) {
      const auto bound = aliasing_bound(x, grid);
      const double brute = oracle::dense_max_min_error(x, grid.kind, grid.anchors(), grid.a, grid.b, 10000);
      if (!(bound.sqrt_m >= brute)) ++violations;
      if (brute > 0) worst_ratio = std::max(worst_ratio, bound.sqrt_m / brute);
      if (grid.kind == GeometricKind::scaling &&
          std::any_of(bound.per_interval.begin(), bound.per_interval.end(),
                      [](const IntervalBound& b) { return b.discontinuity.has_value(); }))
        ++split_images;
    }
  }
  o.pass = violations == 0;
  o.detail = std::to_string(violations) + " violations over 40 bounds; discontinuity split on " +
             std::to_string(split_images) + "/20 scaling images; largest sqrt(M)/dense ratio " + fmt(worst_ratio, 4);
  return o;
}

// ---------------------------------------------------------------------------------
// 4. aliasing refinement

Outcome aliasing_refinement() {
  Outcome o;
  std::mt19937_64 gen(3003);  // the soundness corpus
  double worst_factor = std::numeric_limits<double>::infinity();
  double sum_coarse = 0, sum_fine = 0;
  for (int t = 0; t < 20; ++t) {
    const auto x = random_image(gen, {1, 9, 9});
    for (GeometricKind kind : {GeometricKind::rotation, GeometricKind::scaling}) {
      const double a = kind == GeometricKind::rotation ? -0.05 : 0.9;
      const double b = kind == GeometricKind::rotation ? 0.05 : 1.1;
      const double coarse = aliasing_bound(x, IntervalGrid{a, b, 200, 50, kind}).m_value;
      const double fine = aliasing_bound(x, IntervalGrid{a, b, 2000, 50, kind}).m_value;
      sum_coarse += coarse;
      sum_fine += fine;
      const double factor = fine > 0 ? coarse / fine : std::numeric_limits<double>::infinity();
      worst_factor = std::min(worst_factor, factor);
    }
  }
  o.pass = worst_factor >= 10.0;
  o.detail = "smallest per-image shrink factor N=200 -> 2000 (R=50): " + fmt(worst_factor, 4) + "; corpus mean M " +
             fmt(sum_coarse / 40, 4) + " -> " + fmt(sum_fine / 40, 4);
  return o;
}

// ---------------------------------------------------------------------------------
// 5. statistical engine

Outcome statistical_engine() {
  Outcome o;
  double cp_err = 0.0;
  for (std::uint64_t n : {100ull, 10000ull}) {
    cp_err = std::max(cp_err, std::abs(clopper_pearson_lower(n, n, 0.001) - std::pow(0.001, 1.0 / static_cast<double>(n))));
  }

  std::mt19937_64 gen(5005);
  const Shape shape{1, 4, 4};
  const auto additive = TransformSpec::of(TransformKind::additive);
  const auto bc = TransformSpec::of(TransformKind::brightness_contrast);
  const auto x = random_image(gen, shape);
  const auto centre = random_image(gen, shape);
  const double m = x.mean();
  struct Config {
    SyntheticClassifier classifier;
    TransformSpec transform;
    DistributionSpec noise;
  };
  const std::vector<Config> configs{
      {SyntheticClassifier::mean_threshold(m - 0.02), additive, DistributionSpec::isotropic_gaussian(0.25, 16)},
      {SyntheticClassifier::mean_threshold(m + 0.15), additive, DistributionSpec::isotropic_gaussian(0.5, 16)},
      {SyntheticClassifier::mean_threshold(m), additive,
       DistributionSpec::gaussian({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8})},
      {SyntheticClassifier::mean_threshold(m + 0.05), bc, DistributionSpec::gaussian({0.2, 0.1})},
      {SyntheticClassifier::mean_threshold(m - 0.1), bc, DistributionSpec::gaussian({0.6, 0.3})},
      {SyntheticClassifier::mean_threshold(0.3), TransformSpec::of(TransformKind::translation_reflect),
       DistributionSpec::isotropic_gaussian(2.0, 2)},
      {SyntheticClassifier::l2_ball(centre, 2.0), additive, DistributionSpec::isotropic_gaussian(0.4, 16)},
      {SyntheticClassifier::l2_ball(x, 1.6), additive, DistributionSpec::isotropic_gaussian(0.4, 16)},
      {SyntheticClassifier::constant(1), TransformSpec::of(TransformKind::gaussian_blur), DistributionSpec::exponential(0.5)},
      {SyntheticClassifier::constant(0, 3), bc, DistributionSpec::gaussian({0.3, 0.3})},
  };
  const std::uint64_t n = 100000;
  double worst_z = 0.0;
  int mismatches = 0;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto& cfg = configs[c];
    const auto p = analytic_smoothed_confidence(cfg.classifier, cfg.transform, cfg.noise, x);
    SmoothedQuery q{&cfg.classifier, cfg.transform, cfg.noise, ConfidenceParams{}, 77 + c};
    const auto counts = sample_counts(q, x, n);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double freq = static_cast<double>(counts[k]) / static_cast<double>(n);
      const double se = std::sqrt(p[k] * (1.0 - p[k]) / static_cast<double>(n));
      const double diff = std::abs(freq - p[k]);
      if (se > 0) worst_z = std::max(worst_z, diff / se);
      if (diff > 4.0 * se) ++mismatches;
    }
  }

  const ImageTensor flat({1, 4, 4}, std::vector<double>(16, 0.6));
  const auto h = SyntheticClassifier::mean_threshold(0.5);
  const auto noise = DistributionSpec::isotropic_gaussian(0.4, 16);
  const double p_true = normal_cdf(1.0);  // mean noise has sd 0.4 / 4 = 0.1
  int covered = 0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    SmoothedQuery q{&h, additive, noise, params(500, 50), 1000 + rep};
    const auto out = certify(q, flat);
    if (out.label != 1 || out.p_a_lower <= p_true) ++covered;
  }
  o.pass = cp_err <= 1e-9 && mismatches == 0 && covered >= 199;
  o.detail = "CP all-success error " + fmt(cp_err, 3) + "; MC vs analytic: " + std::to_string(mismatches) +
             " outside 4 SE (largest " + fmt(worst_z, 3) + " SE); coverage " + std::to_string(covered) + "/200";
  return o;
}

// ---------------------------------------------------------------------------------
// 6. brightness/contrast confidence shift

Outcome bc_shift() {
  // The worst event of probability p under N(0, tau^2) for the brightness coordinate
  // is found empirically from draws of the first distribution and its probability is
  // measured with draws of the second one, N(0, e^{-2k} tau^2).
  Outcome o;
  std::mt19937_64 gen(6006);
  const int n = 1000000;
  const double tau = 1.0;
  std::normal_distribution<double> base(0.0, tau);
  std::vector<double> magnitudes(n);
  for (double& v : magnitudes) v = std::abs(base(gen));
  std::sort(magnitudes.begin(), magnitudes.end());
  double worst_z = 0.0;
  int failures = 0;
  for (double p : {0.7, 0.9}) {
    for (double k : {-0.3, -0.1, 0.1, 0.3}) {
      // k < 0 widens the shifted noise: the worst set is a central band. k > 0 narrows it:
      // the worst set is the two tails.
      const double threshold = k < 0 ? magnitudes[static_cast<std::size_t>(p * n)]
                                     : magnitudes[static_cast<std::size_t>((1.0 - p) * n)];
      std::normal_distribution<double> shifted(0.0, std::exp(-k) * tau);
      int hits = 0;
      for (int s = 0; s < n; ++s) {
        const double v = std::abs(shifted(gen));
        hits += k < 0 ? v <= threshold : v > threshold;
      }
      const double freq = static_cast<double>(hits) / n;
      const double got = bc_confidence_shift(p, k);
      // Standard error of the second sample plus the empirical threshold's contribution
      // (delta method through the density ratio at the threshold).
      const double ratio = std::exp(k) * std::exp(-0.5 * threshold * threshold * (std::exp(2 * k) - 1.0));
      const double se = std::sqrt(got * (1 - got) / n + ratio * ratio * p * (1 - p) / n);
      worst_z = std::max(worst_z, std::abs(freq - got) / se);
      if (std::abs(freq - got) > 3 * se) ++failures;
    }
  }
  int exact = 0;
  for (double p : {0.0, 0.3, 0.7, 0.9, 0.999, 1.0}) exact += bc_confidence_shift(p, 0.0) == p;
  o.pass = failures == 0 && exact == 6;
  o.detail = std::to_string(failures) + "/8 outside 3 SE (largest " + fmt(worst_z, 3) + " SE); k = 0 identity " +
             std::to_string(exact) + "/6";
  return o;
}

// ---------------------------------------------------------------------------------
// 7. Lipschitz validity

Outcome lipschitz_validity() {
  Outcome o;
  std::mt19937_64 gen(7007);
  long long pairs = 0, violations = 0;
  double worst = 0.0;
  for (int img = 0; img < 20; ++img) {
    const auto x = random_image(gen, {1, 9, 9});
    std::uniform_real_distribution<double> ua(-0.3, 0.3), us(0.8, 1.2), uw(0.001, 0.03);
    for (int iv = 0; iv < 10; ++iv) {
      const double lo = ua(gen), hi = lo + uw(gen);
      const double lip = rotation_interval_lipschitz(x, lo, hi);
      std::uniform_real_distribution<double> in(lo, hi);
      for (int p = 0; p < 1000; ++p) {
        const double c = in(gen), d = in(gen);
        if (c == d) continue;
        const double slope = std::abs(squared_sampling_error(x, GeometricKind::rotation, lo, c) -
                                      squared_sampling_error(x, GeometricKind::rotation, lo, d)) / std::abs(c - d);
        ++pairs;
        if (lip > 0) worst = std::max(worst, slope / lip);
        if (slope > lip) ++violations;
      }

      const double slo = us(gen), shi = slo + uw(gen);
      const double slip = scaling_interval_lipschitz(x, slo, shi);
      const auto disc = scaling_discontinuities(9, 9, slo, shi);
      std::uniform_real_distribution<double> sin(slo, shi);
      int done = 0;
      while (done < 1000) {
        // g jumps at a discontinuity, so both points must lie on one continuous piece.
        const double c = sin(gen), d = sin(gen);
        if (c == d) continue;
        bool same_piece = true;
        for (double t : disc) same_piece = same_piece && ((c < t) == (d < t));
        if (!same_piece) continue;
        ++done;
        const double slope = std::abs(squared_sampling_error(x, GeometricKind::scaling, shi, c) -
                                      squared_sampling_error(x, GeometricKind::scaling, shi, d)) / std::abs(c - d);
        ++pairs;
        if (slip > 0) worst = std::max(worst, slope / slip);
        if (slope > slip) ++violations;
      }
    }
  }
  o.pass = violations == 0;
  o.detail = std::to_string(violations) + " violations over " + std::to_string(pairs) +
             " pairs; largest slope / L = " + fmt(worst, 4);
  return o;
}

// ---------------------------------------------------------------------------------
// 8. end-to-end empirical soundness

// Two-class linear classifier: class 1 iff w . x + c > 0.
LinearClassifier binary_linear(const Shape& s, const std::vector<double>& w, double c) {
  std::vector<double> weights(2 * s.size(), 0.0);
  std::copy(w.begin(), w.end(), weights.begin() + static_cast<long>(s.size()));
  return LinearClassifier(s, 2, std::move(weights), {0.0, c});
}

double dot(const std::vector<double>& w, const ImageTensor& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x.data()[i];
  return s;
}

double norm(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return std::sqrt(s);
}

// P(sigma^2 * chi'^2_d(lambda) <= r^2) as a Poisson mixture of central chi-squares.
double noncentral_inside(std::size_t d, double dist2, double sigma, double r) {
  const double lambda = dist2 / (sigma * sigma);
  const double q = r * r / (sigma * sigma);
  const double half = lambda / 2.0;
  const long long centre = static_cast<long long>(half);
  const long long span = 12 + static_cast<long long>(12.0 * std::sqrt(half + 1.0));
  double total = 0.0;
  for (long long j = std::max(0LL, centre - span); j <= centre + span; ++j) {
    const double logw = -half + (j == 0 ? 0.0 : j * std::log(half)) - std::lgamma(static_cast<double>(j) + 1.0);
    if (half == 0.0 && j > 0) break;
    total += std::exp(logw) * boost::math::gamma_p(static_cast<double>(d) / 2.0 + j, q / 2.0);
  }
  return total;
}

// Probability of `label` for an additive-noise smoothed classifier at image y.
using AdditiveOracle = std::function<double(const ImageTensor&)>;

struct Tally {
  int certified = 0;
  int flips = 0;
  int attacked_points = 0;
};

std::string tally_text(const std::string& name, const Tally& t) {
  return name + " " + std::to_string(t.certified) + " certified/" + std::to_string(t.flips) + " flips";
}

// Ordered list of (s_start, label) segments of s -> h(blur(x, s)) on [0, s_max].
std::vector<std::pair<double, Label>> blur_segments(const BaseClassifier& h, const ImageTensor& x, double s_max) {
  auto f = [&](double s) { return h.classify(gaussian_blur(x, s)); };
  std::vector<std::pair<double, Label>> segs{{0.0, f(0.0)}};
  double prev = 0.0;
  Label prev_label = segs.front().second;
  for (double s = 0.0; s < s_max;) {
    s = std::min(s_max, s + (s < 20.0 ? 0.005 : 0.02));
    const Label l = f(s);
    if (l != prev_label) {
      double a = prev, b = s;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (a + b);
        (f(mid) == prev_label ? a : b) = mid;
      }
      segs.emplace_back(b, l);
      prev_label = l;
    }
    prev = s;
  }
  return segs;
}

Tally e2e_blur(const std::vector<ImageTensor>& data, const ConfidenceParams& conf) {
  Tally t;
  const double rate = 0.5, region_hi = 2.0;
  const double s_max = region_hi + 30.0 / rate;  // exponential tail beyond is below 1e-13
  const auto noise = DistributionSpec::exponential(rate);
  std::mt19937_64 gen(8101);
  std::uniform_real_distribution<double> us0(1.0, 40.0), uw(-1.0, 1.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data[i];
    for (int variant = 0; variant < 2; ++variant) {
      const double s0 = us0(gen);
      std::unique_ptr<BaseClassifier> h;
      if (variant == 0) {
        h = std::make_unique<SyntheticClassifier>(SyntheticClassifier::mean_threshold(gaussian_blur(x, s0).mean()));
      } else {
        std::vector<double> w(x.size());
        for (double& v : w) v = uw(gen);
        h = std::make_unique<LinearClassifier>(binary_linear(x.shape(), w, -dot(w, gaussian_blur(x, s0))));
      }
      Label label = h->classify(x);
      if (i % 10 == 9) label = 1 - label;
      SmoothedQuery q{h.get(), TransformSpec::of(TransformKind::gaussian_blur), noise, conf, 8100 + 2 * i + variant};
      const auto r = certify_resolvable(x, label, q, ParameterSet::blur(region_hi));
      if (r.verdict != Verdict::certified) continue;
      ++t.certified;
      const auto segs = blur_segments(*h, x, s_max);
      for (int m = 0; m < 1000; ++m) {
        const double beta = region_hi * m / 999.0;
        // P(label) = sum over segments of the exponential mass of [start - beta, end - beta).
        double p = 0.0;
        for (std::size_t s = 0; s < segs.size(); ++s) {
          const double a = std::max(0.0, segs[s].first - beta);
          const double b = s + 1 < segs.size() ? std::max(0.0, segs[s + 1].first - beta) : INFINITY;
          if (segs[s].second == label) p += std::exp(-rate * a) - (std::isinf(b) ? 0.0 : std::exp(-rate * b));
        }
        ++t.attacked_points;
        if (!(p > 0.5 + 1e-9)) ++t.flips;
      }
    }
  }
  return t;
}

Tally e2e_bc(const std::vector<ImageTensor>& data, const ConfidenceParams& conf) {
  Tally t;
  const double sigma = 0.3, tau = 0.3;
  const auto noise = DistributionSpec::gaussian({sigma, tau});
  const ParameterSet rect = ParameterSet::rectangle(-0.1, 0.1, -0.05, 0.05);
  std::mt19937_64 gen(8202);
  std::uniform_real_distribution<double> ud(-0.25, 0.25), uw(-1.0, 1.0);
  // Simpson weights over k' in [-10 sigma, 10 sigma].
  const int nodes = 2001;
  std::vector<double> kk(nodes), wk(nodes);
  const double step = 20.0 * sigma / (nodes - 1);
  for (int i = 0; i < nodes; ++i) {
    kk[i] = -10.0 * sigma + i * step;
    const double simpson = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    wk[i] = simpson * step / 3.0 * std::exp(-0.5 * kk[i] * kk[i] / (sigma * sigma)) / (sigma * std::sqrt(2 * std::numbers::pi));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data[i];
    for (int variant = 0; variant < 2; ++variant) {
      std::unique_ptr<BaseClassifier> h;
      std::function<double(const ImageTensor&)> p_class1;
      if (variant == 0) {
        const double thr = std::clamp(x.mean() + ud(gen), 0.05, 0.95);
        h = std::make_unique<SyntheticClassifier>(SyntheticClassifier::mean_threshold(thr));
        // class 1 iff e^{k'} (m + b') > thr  <=>  b' > thr e^{-k'} - m
        p_class1 = [&, thr](const ImageTensor& y) {
          const double m = y.mean();
          double p = 0.0;
          for (int j = 0; j < nodes; ++j) p += wk[j] * (1.0 - normal_cdf((thr * std::exp(-kk[j]) - m) / tau));
          return p;
        };
      } else {
        std::vector<double> w(x.size());
        for (double& v : w) v = uw(gen);
        double sum_w = 0.0;
        for (double v : w) sum_w += v;
        const double c = -dot(w, x) + ud(gen) * 4.0;
        h = std::make_unique<LinearClassifier>(binary_linear(x.shape(), w, c));
        // w . e^{k'} (y + b') + c > 0  <=>  b' sum_w > -c e^{-k'} - w . y
        p_class1 = [&, w, sum_w, c](const ImageTensor& y) {
          const double a = dot(w, y);
          double p = 0.0;
          for (int j = 0; j < nodes; ++j) p += wk[j] * normal_cdf((a + c * std::exp(-kk[j])) / (std::abs(sum_w) * tau));
          return p;
        };
      }
      Label label = h->classify(x);
      if (i % 10 == 9) label = 1 - label;
      SmoothedQuery q{h.get(), TransformSpec::of(TransformKind::brightness_contrast), noise, conf, 8200 + 2 * i + variant};
      const auto r = certify_bc_rectangle(x, label, q, rect);
      if (r.verdict != Verdict::certified) continue;
      ++t.certified;
      for (int a = 0; a < 32; ++a) {
        for (int b = 0; b < 32; ++b) {
          const double k = rect.k_lo + (rect.k_hi - rect.k_lo) * a / 31.0;
          const double bb = rect.b_lo + (rect.b_hi - rect.b_lo) * b / 31.0;
          const double p1 = p_class1(brightness_contrast(x, k, bb));
          const double p = label == 1 ? p1 : 1.0 - p1;
          ++t.attacked_points;
          if (!(p > 0.5 + 1e-9)) ++t.flips;
        }
      }
    }
  }
  return t;
}

Tally e2e_translation_reflect(const std::vector<ImageTensor>& data, const ConfidenceParams& conf) {
  Tally t;
  const double sigma = 2.0, rho = 1.5;
  const auto noise = DistributionSpec::isotropic_gaussian(sigma, 2);
  std::mt19937_64 gen(8303);
  std::uniform_real_distribution<double> uw(-1.0, 1.0), uq(0.7, 0.95);
  const long long reach = static_cast<long long>(std::ceil(12.0 * sigma));
  std::vector<double> lattice(2 * reach + 1);
  for (long long u = -reach; u <= reach; ++u)
    lattice[u + reach] = normal_cdf((u + 0.5) / sigma) - normal_cdf((u - 0.5) / sigma);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data[i];
    const long long W = static_cast<long long>(x.width()), H = static_cast<long long>(x.height());
    for (int variant = 0; variant < 2; ++variant) {
      std::unique_ptr<BaseClassifier> h;
      std::vector<double> values;
      for (long long u = 0; u < W; ++u)
        for (long long v = 0; v < H; ++v) values.push_back(0.0);
      const double quant = uq(gen);
      if (variant == 0) {
        std::size_t idx = 0;
        for (long long u = 0; u < W; ++u)
          for (long long v = 0; v < H; ++v) values[idx++] = l2_distance(translate(x, u, v, Padding::reflect), x);
        auto sorted = values;
        std::sort(sorted.begin(), sorted.end());
        const double radius = sorted[static_cast<std::size_t>(quant * (sorted.size() - 1))] + 1e-9;
        h = std::make_unique<SyntheticClassifier>(SyntheticClassifier::l2_ball(x, radius));
      } else {
        std::vector<double> w(x.size());
        for (double& v : w) v = uw(gen);
        std::size_t idx = 0;
        for (long long u = 0; u < W; ++u)
          for (long long v = 0; v < H; ++v) values[idx++] = dot(w, translate(x, u, v, Padding::reflect));
        auto sorted = values;
        std::sort(sorted.begin(), sorted.end());
        const double sign = dot(w, x) >= sorted[sorted.size() / 2] ? 1.0 : -1.0;
        const double cut = sign > 0 ? sorted[static_cast<std::size_t>((1 - quant) * (sorted.size() - 1))]
                                    : sorted[static_cast<std::size_t>(quant * (sorted.size() - 1))];
        h = std::make_unique<LinearClassifier>(binary_linear(x.shape(), w, -cut + sign * 1e-9));
      }
      // Labels of every cyclic shift of x.
      std::vector<Label> table(static_cast<std::size_t>(W * H));
      for (long long u = 0; u < W; ++u)
        for (long long v = 0; v < H; ++v) table[u * H + v] = h->classify(translate(x, u, v, Padding::reflect));
      Label label = h->classify(x);
      if (i % 10 == 9) label = 1 - label;
      SmoothedQuery q{h.get(), TransformSpec::of(TransformKind::translation_reflect), noise, conf, 8300 + 2 * i + variant};
      const auto r = certify_resolvable(x, label, q, ParameterSet::disk(rho));
      if (r.verdict != Verdict::certified) continue;
      ++t.certified;
      for (const auto& d : disk_displacements(rho)) {
        double p = 0.0;
        for (long long a = -reach; a <= reach; ++a)
          for (long long b = -reach; b <= reach; ++b) {
            const long long u = (((d[0] + a) % W) + W) % W, v = (((d[1] + b) % H) + H) % H;
            if (table[u * H + v] == label) p += lattice[a + reach] * lattice[b + reach];
          }
        ++t.attacked_points;
        if (!(p > 0.5 + 1e-9)) ++t.flips;
      }
    }
  }
  return t;
}

ImageTensor naive_black_shift(const ImageTensor& x, long long dx, long long dy) {
  const Shape s = x.shape();
  std::vector<double> out(s.size(), 0.0);
  for (long long i = 0; i < static_cast<long long>(s.width); ++i)
    for (long long j = 0; j < static_cast<long long>(s.height); ++j) {
      const long long si = i - dx, sj = j - dy;
      if (si >= 0 && sj >= 0 && si < static_cast<long long>(s.width) && sj < static_cast<long long>(s.height))
        out[s.offset(0, i, j)] = x.at(0, si, sj);
    }
  return ImageTensor(s, out, x.unnormalized());
}

Tally e2e_translation_black(const std::vector<ImageTensor>& data) {
  Tally t;
  const double rho = 1.5;
  std::mt19937_64 gen(8404);
  std::uniform_real_distribution<double> uw(-1.0, 1.0), ur(1.0, 3.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data[i];
    for (int variant = 0; variant < 2; ++variant) {
      std::unique_ptr<BaseClassifier> h;
      if (variant == 0) {
        h = std::make_unique<SyntheticClassifier>(SyntheticClassifier::l2_ball(x, ur(gen)));
      } else {
        std::vector<double> w(x.size());
        for (double& v : w) v = uw(gen);
        h = std::make_unique<LinearClassifier>(binary_linear(x.shape(), w, -dot(w, x) + uw(gen)));
      }
      Label label = h->classify(x);
      if (i % 10 == 9) label = 1 - label;
      const auto r = certify_translation_enum(x, label, *h, ParameterSet::disk(rho));
      if (r.verdict != Verdict::certified) continue;
      ++t.certified;
      for (long long dx = -2; dx <= 2; ++dx)
        for (long long dy = -2; dy <= 2; ++dy) {
          if (static_cast<double>(dx * dx + dy * dy) > rho * rho) continue;
          ++t.attacked_points;
          if (h->classify(naive_black_shift(x, dx, dy)) != label) ++t.flips;
        }
    }
  }
  return t;
}

Tally e2e_geometric(const std::vector<ImageTensor>& data, const ConfidenceParams& conf, GeometricKind kind) {
  Tally t;
  const bool rot = kind == GeometricKind::rotation;
  const double sigma = 0.25;
  const double lo = rot ? -2.0 * std::numbers::pi / 180.0 : 0.95;
  const double hi = rot ? 2.0 * std::numbers::pi / 180.0 : 1.05;
  const IntervalGrid grid{0, 0, 200, 50, kind};
  std::mt19937_64 gen(rot ? 8505 : 8606);
  std::uniform_real_distribution<double> uw(-1.0, 1.0), umargin(-1.0, 4.0), uball(0.0, 0.8);
  auto apply = [&](const ImageTensor& x, double p) { return rot ? rotate(x, p) : scale(x, p); };
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data[i];
    const auto noise = DistributionSpec::isotropic_gaussian(sigma, x.size());
    const auto y0 = apply(x, rot ? 0.0 : 1.0);
    for (int variant = 0; variant < 2; ++variant) {
      std::unique_ptr<BaseClassifier> h;
      std::function<double(const ImageTensor&)> p_class0;
      if (variant == 0) {
        const double radius = sigma * std::sqrt(static_cast<double>(x.size())) + uball(gen);
        h = std::make_unique<SyntheticClassifier>(SyntheticClassifier::l2_ball(y0, radius));
        p_class0 = [&, radius, y0](const ImageTensor& y) {
          const double d = l2_distance(y, y0);
          return noncentral_inside(y.size(), d * d, sigma, radius);
        };
      } else {
        std::vector<double> w(x.size());
        for (double& v : w) v = uw(gen) / 9.0;
        const double c = -dot(w, y0) + umargin(gen) * sigma * norm(w);
        h = std::make_unique<LinearClassifier>(binary_linear(x.shape(), w, c));
        p_class0 = [&, w, c](const ImageTensor& y) { return 1.0 - normal_cdf((dot(w, y) + c) / (sigma * norm(w))); };
      }
      Label label = h->classify(y0);
      if (i % 10 == 9) label = 1 - label;
      SmoothedQuery q{h.get(), TransformSpec::of(rot ? TransformKind::rotation : TransformKind::scaling), noise, conf,
                      8500 + 2 * i + variant};
      const auto r = certify_diff_resolvable(x, label, q, ParameterSet::interval(lo, hi), grid);
      if (r.verdict != Verdict::certified) continue;
      ++t.certified;
      for (int m = 0; m < 10000; ++m) {
        const double beta = lo + (hi - lo) * m / 9999.0;
        const double p0 = p_class0(apply(x, beta));
        const double p = label == 0 ? p0 : 1.0 - p0;
        ++t.attacked_points;
        if (!(p > 0.5 + 1e-9)) ++t.flips;
      }
    }
  }
  return t;
}

Outcome end_to_end() {
  Outcome o;
  std::mt19937_64 gen(8000);
  std::vector<ImageTensor> data;
  for (int i = 0; i < 50; ++i) data.push_back(random_image(gen, {1, 9, 9}));
  const auto conf = params(10000);
  const std::vector<std::pair<std::string, Tally>> rows{
      {"blur", e2e_blur(data, conf)},
      {"brightness/contrast", e2e_bc(data, conf)},
      {"translation(reflect)", e2e_translation_reflect(data, conf)},
      {"translation(black)", e2e_translation_black(data)},
      {"rotation", e2e_geometric(data, conf, GeometricKind::rotation)},
      {"scaling", e2e_geometric(data, conf, GeometricKind::scaling)},
  };
  int flips = 0;
  long long points = 0;
  for (const auto& [name, t] : rows) {
    flips += t.flips;
    points += t.attacked_points;
    if (t.certified == 0) o.pass = false;  // a pipeline that never certifies proves nothing
    o.detail += tally_text(name, t) + "; ";
  }
  o.pass = o.pass && flips == 0;
  o.detail += std::to_string(points) + " attacked points in total";
  return o;
}

// ---------------------------------------------------------------------------------
// 9. translation enumeration exactness

Outcome enumeration_exactness() {
  Outcome o;
  std::mt19937_64 gen(9009);
  std::uniform_real_distribution<double> urho(0.0, 5.0), uw(-1, 1);
  std::uniform_int_distribution<int> usz(2, 7);
  int mismatches = 0, certified = 0;
  for (int t = 0; t < 100; ++t) {
    const Shape shape{1, static_cast<std::size_t>(usz(gen)), static_cast<std::size_t>(usz(gen))};
    const auto x = random_image(gen, shape);
    std::vector<double> w(shape.size());
    for (double& v : w) v = uw(gen);
    const auto h = binary_linear(shape, w, uw(gen) * 0.3);
    const Label label = h.classify(x);
    const double rho = urho(gen);
    bool all_same = true;
    const long long span = static_cast<long long>(rho) + 1;
    for (long long dx = -span; dx <= span; ++dx)
      for (long long dy = -span; dy <= span; ++dy)
        if (static_cast<double>(dx * dx + dy * dy) <= rho * rho && h.classify(naive_black_shift(x, dx, dy)) != label)
          all_same = false;
    const auto r = certify_translation_enum(x, label, h, ParameterSet::disk(rho));
    certified += r.verdict == Verdict::certified;
    if ((r.verdict == Verdict::certified) != all_same) ++mismatches;
  }
  o.pass = mismatches == 0;
  o.detail = std::to_string(mismatches) + " mismatches over 100 cases (" + std::to_string(certified) + " certified)";
  return o;
}

// ---------------------------------------------------------------------------------
// 10. CLI reproducibility

Outcome cli_reproducibility() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "semcert_acceptance";
  std::filesystem::create_directories(dir);
  std::mt19937_64 gen(10010);
  std::vector<ImageTensor> xs;
  std::vector<Label> ys;
  for (int i = 0; i < 8; ++i) {
    auto x = random_image(gen, {1, 6, 6});
    std::vector<double> d(x.data().begin(), x.data().end());
    for (double& v : d) v = std::round(v * 255.0) / 255.0;
    xs.emplace_back(Shape{1, 6, 6}, d);
    ys.push_back(i % 2);
  }
  const auto images = (dir / "images.idx").string(), labels = (dir / "labels.idx").string();
  write_idx_images(xs, images);
  write_idx_labels(ys, labels);
  std::vector<std::string> bodies;
  for (int run = 0; run < 2; ++run) {
    const auto out = (dir / ("run" + std::to_string(run) + ".csv")).string();
    std::vector<std::string> args{"semcert", "certify", "--images", images, "--labels", labels, "--transform",
                                  "gaussian_blur", "--region", "1", "--noise", "exponential", "--noise-params",
                                  "0.5", "--n", "3000", "--classifier", "mean_threshold:0.5", "--seed", "42",
                                  "--out", out};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream so, se;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), so, se);
    if (code != 0) {
      o.pass = false;
      o.detail = "certify exited with " + std::to_string(code) + ": " + se.str();
      return o;
    }
    std::ifstream in(out, std::ios::binary);
    bodies.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::filesystem::remove_all(dir);
  o.pass = !bodies[0].empty() && bodies[0] == bodies[1];
  o.detail = "two runs, " + std::to_string(bodies[0].size()) + " CSV bytes each, " +
             (bodies[0] == bodies[1] ? "identical" : "different");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria{
      {1, "radius golden suite", 1, radius_golden},
      {2, "exponential radius dominance", 1, dominance},
      {3, "aliasing soundness", 120, aliasing_soundness},
      {4, "aliasing refinement", 300, aliasing_refinement},
      {5, "statistical engine oracle", 180, statistical_engine},
      {6, "brightness/contrast confidence shift", 60, bc_shift},
      {7, "Lipschitz validity", 120, lipschitz_validity},
      {8, "end-to-end empirical soundness", 600, end_to_end},
      {9, "translation enumeration exactness", 60, enumeration_exactness},
      {10, "CLI reproducibility", 60, cli_reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << "criterion " << c.id << " [" << c.name << "]: " << (pass ? "PASS" : "FAIL") << " (" << fmt(secs, 3)
              << " s, limit " << c.limit_seconds << " s" << (in_time ? "" : ", over time") << ") " << o.detail << "\n"
              << std::flush;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
