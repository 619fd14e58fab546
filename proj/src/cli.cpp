#include "semcert/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "semcert/errors.hpp"
#include "semcert/io.hpp"

namespace semcert {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string csv_header() { return "index,true_label,predicted,verdict,p_a_lower,radius,sqrt_m,samples_used"; }

std::string to_csv(const ReportRow& r) {
  std::string s = std::to_string(r.index) + "," + std::to_string(r.true_label) + "," + std::to_string(r.predicted) +
                  "," + std::string(to_string(r.verdict)) + "," + format_double(r.p_a_lower) + "," +
                  format_double(r.radius) + ",";
  if (r.sqrt_m) s += format_double(*r.sqrt_m);
  s += "," + std::to_string(r.samples_used);
  return s;
}

namespace {

template <class T>
T parse_number(std::string_view field, std::size_t offset) {
  T v{};
  const auto r = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || r.ec != std::errc() || r.ptr != field.data() + field.size()) {
    throw ParseError("invalid number '" + std::string(field) + "' in CSV row", offset);
  }
  return v;
}

}  // namespace

ReportRow parse_csv_row(std::string_view line) {
  std::vector<std::string_view> fields;
  std::vector<std::size_t> starts;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    starts.push_back(start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() != 8) {
    throw ParseError("CSV row needs 8 fields, found " + std::to_string(fields.size()), 0);
  }
  ReportRow r;
  r.index = parse_number<std::size_t>(fields[0], starts[0]);
  r.true_label = parse_number<std::size_t>(fields[1], starts[1]);
  r.predicted = parse_number<std::size_t>(fields[2], starts[2]);
  try {
    r.verdict = verdict_from_string(fields[3]);
  } catch (const ParseError&) {
    throw ParseError("unknown verdict '" + std::string(fields[3]) + "'", starts[3]);
  }
  r.p_a_lower = parse_number<double>(fields[4], starts[4]);
  r.radius = parse_number<double>(fields[5], starts[5]);
  if (!fields[6].empty()) r.sqrt_m = parse_number<double>(fields[6], starts[6]);
  r.samples_used = parse_number<std::uint64_t>(fields[7], starts[7]);
  return r;
}

RunConfig RunConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "transform") c.transform = v.get<std::string>();
      else if (key == "region") c.region = v.get<std::vector<double>>();
      else if (key == "noise") c.noise = v.get<std::string>();
      else if (key == "noise_params") c.noise_params = v.get<std::vector<double>>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "n") c.n = v.get<std::uint64_t>();
      else if (key == "n0") c.n0 = v.get<std::uint64_t>();
      else if (key == "batch") c.batch = v.get<std::uint64_t>();
      else if (key == "grid_n") c.grid_n = v.get<std::uint64_t>();
      else if (key == "grid_r") c.grid_r = v.get<std::uint64_t>();
      else if (key == "images") c.images = v.get<std::string>();
      else if (key == "labels") c.labels = v.get<std::string>();
      else if (key == "stride") c.stride = v.get<std::uint64_t>();
      else if (key == "limit") c.limit = v.get<std::uint64_t>();
      else if (key == "classifier") c.classifier = v.get<std::string>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "threads") c.threads = v.get<unsigned>();
      else if (key == "workers") c.workers = v.get<unsigned>();
      else if (key == "output") c.output = v.get<std::string>();
      else if (key == "summary") c.summary = v.get<std::string>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("ill-typed config value: ") + e.what());
  }
  return c;
}

std::string RunConfig::to_json() const {
  const json j = {{"transform", transform}, {"region", region},     {"noise", noise},   {"noise_params", noise_params},
                  {"alpha", alpha},         {"n", n},               {"n0", n0},         {"batch", batch},
                  {"grid_n", grid_n},       {"grid_r", grid_r},     {"images", images}, {"labels", labels},
                  {"stride", stride},       {"limit", limit},       {"classifier", classifier},
                  {"seed", seed},           {"threads", threads},   {"workers", workers},
                  {"output", output},       {"summary", summary}};
  return j.dump(2);
}

namespace {

NoiseFamily parse_family(const std::string& name) {
  try {
    return noise_family_from_string(name);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

DistributionSpec make_noise(TransformKind kind, const std::string& family, const std::vector<double>& params,
                            const Shape& shape) {
  const NoiseFamily f = parse_family(family);
  const std::size_t dim = TransformSpec::of(kind).param_dim(shape);
  auto need = [&](std::size_t count) {
    if (params.size() != count) {
      throw ConfigError(family + " noise needs " + std::to_string(count) + " parameter(s), got " +
                        std::to_string(params.size()));
    }
  };
  DistributionSpec d;
  switch (f) {
    case NoiseFamily::gaussian:
      if (params.size() == 1) {
        d = DistributionSpec::isotropic_gaussian(params[0], dim);
      } else {
        need(dim);
        d = DistributionSpec::gaussian(params);
      }
      break;
    case NoiseFamily::exponential:
      need(1);
      d = DistributionSpec::exponential(params[0], dim);
      break;
    case NoiseFamily::uniform:
      need(2);
      d = DistributionSpec::uniform(params[0], params[1], dim);
      break;
    case NoiseFamily::laplace:
      need(1);
      d = DistributionSpec::laplace(params[0]);
      break;
    case NoiseFamily::folded_gaussian:
      need(1);
      d = DistributionSpec::folded_gaussian(params[0]);
      break;
  }
  try {
    d.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  return d;
}

namespace {

TransformKind parse_transform(const std::string& name) {
  try {
    return transform_kind_from_string(name);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

double degrees(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

ParameterSet make_region(const RunConfig& cfg) {
  const TransformKind kind = parse_transform(cfg.transform);
  const auto& r = cfg.region;
  auto need = [&](std::size_t count) {
    if (r.size() != count) {
      throw ConfigError(cfg.transform + " region needs " + std::to_string(count) + " number(s), got " +
                        std::to_string(r.size()));
    }
  };
  ParameterSet p;
  switch (kind) {
    case TransformKind::gaussian_blur:
      need(1);
      p = ParameterSet::blur(r[0]);
      break;
    case TransformKind::translation_reflect:
    case TransformKind::translation_black:
      need(1);
      p = ParameterSet::disk(r[0]);
      break;
    case TransformKind::brightness_contrast:
      need(4);
      p = ParameterSet::rectangle(r[0], r[1], r[2], r[3]);
      break;
    case TransformKind::rotation:
      need(2);
      p = ParameterSet::interval(degrees(r[0]), degrees(r[1]));
      break;
    case TransformKind::scaling:
      need(2);
      p = ParameterSet::interval(r[0], r[1]);
      break;
    case TransformKind::additive:
      throw ConfigError("the additive transform has no certification pipeline");
  }
  try {
    p.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  return p;
}

PipelineConfig make_pipeline(const RunConfig& cfg, const Shape& shape) {
  PipelineConfig p;
  p.transform = parse_transform(cfg.transform);
  p.conf.alpha = cfg.alpha;
  p.conf.n_samples = cfg.n;
  p.conf.n0_samples = cfg.n0;
  try {
    p.conf.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.batch == 0) throw ConfigError("batch must be positive");
  p.batch = cfg.batch;
  p.seed = cfg.seed;
  p.threads = std::max(1u, cfg.threads);
  if (p.transform != TransformKind::translation_black) {
    // Rotation and scaling smooth over pixels, so their noise lives in the additive space.
    const TransformKind noise_space = p.transform == TransformKind::rotation || p.transform == TransformKind::scaling
                                          ? TransformKind::additive
                                          : p.transform;
    p.noise = make_noise(noise_space, cfg.noise, cfg.noise_params, shape);
  }
  if (p.transform == TransformKind::rotation || p.transform == TransformKind::scaling) {
    const bool rot = p.transform == TransformKind::rotation;
    p.grid.kind = rot ? GeometricKind::rotation : GeometricKind::scaling;
    p.grid.n_outer = cfg.grid_n != 0 ? cfg.grid_n : (rot ? 10000 : 1000);
    p.grid.n_inner = cfg.grid_r != 0 ? cfg.grid_r : (rot ? 1000 : 250);
  }
  return p;
}

namespace {

std::unique_ptr<BaseClassifier> load_classifier(const std::string& spec, const Shape& shape) {
  if (spec.empty()) throw ConfigError("no classifier given");
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("invalid number '" + s + "' in classifier spec '" + spec + "'");
  };
  try {
    if (head == "constant") {
      const auto sep = rest.find(':');
      const auto label = static_cast<Label>(number(rest.substr(0, sep)));
      const auto classes = sep == std::string::npos ? 2 : static_cast<std::size_t>(number(rest.substr(sep + 1)));
      return std::make_unique<SyntheticClassifier>(SyntheticClassifier::constant(label, classes));
    }
    if (head == "mean_threshold") {
      return std::make_unique<SyntheticClassifier>(SyntheticClassifier::mean_threshold(number(rest)));
    }
    if (head == "l2_ball") {
      const auto sep = rest.rfind(':');
      if (sep == std::string::npos) throw ConfigError("l2_ball spec needs <path>:<radius>");
      auto center = read_tensor(rest.substr(0, sep));
      if (!(center.shape() == shape)) throw ConfigError("l2_ball center shape does not match the dataset");
      return std::make_unique<SyntheticClassifier>(SyntheticClassifier::l2_ball(std::move(center), number(rest.substr(sep + 1))));
    }
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid classifier spec: ") + e.what());
  }
  if (!std::filesystem::exists(spec)) throw ConfigError("classifier file '" + spec + "' not found");
  auto c = std::make_unique<LinearClassifier>(load_linear_classifier(spec));
  if (!(c->input_shape() == shape)) throw ConfigError("classifier input shape does not match the dataset");
  return c;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("no ") + what + " path given");
  if (!std::filesystem::is_regular_file(path)) throw ConfigError(std::string(what) + " '" + path + "' not found");
}

int run_certify(const RunConfig& cfg, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  require_file(cfg.images, "dataset images");
  require_file(cfg.labels, "dataset labels");
  if (cfg.stride == 0) throw ConfigError("stride must be at least 1");
  const ParameterSet region = make_region(cfg);

  const auto all = read_idx(cfg.images, cfg.labels);
  std::vector<LabeledImage> data;
  std::vector<std::size_t> original;
  for (std::size_t i = 0; i < all.size() && (cfg.limit == 0 || data.size() < cfg.limit); i += cfg.stride) {
    data.push_back(all[i]);
    original.push_back(i);
  }
  if (data.empty()) throw ConfigError("dataset selection is empty");
  const Shape shape = data.front().image.shape();
  const auto classifier = load_classifier(cfg.classifier, shape);
  const PipelineConfig pipeline = make_pipeline(cfg, shape);

  const auto rep = robust_accuracy_report(data, *classifier, pipeline, {region}, std::max(1u, cfg.workers));

  std::ostringstream csv;
  csv << csv_header() << "\n";
  json timings = json::array();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = rep.results[0][i];
    ReportRow row;
    row.index = original[i];
    row.true_label = data[i].label;
    row.predicted = r.predicted_class;
    row.verdict = r.verdict;
    row.p_a_lower = r.p_a_lower;
    row.radius = r.radius_value;
    if (r.aliasing) row.sqrt_m = r.aliasing->sqrt_m;
    row.samples_used = r.samples_used;
    csv << to_csv(row) << "\n";
    timings.push_back(r.elapsed);
  }

  const double total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json summary = {{"config", json::parse(cfg.to_json())},
                  {"region", region.describe()},
                  {"reversible", TransformSpec::of(pipeline.transform).reversible()},
                  {"samples", rep.total},
                  {"clean_accuracy", rep.clean_accuracy},
                  {"certified_correct", rep.rows[0].certified_correct},
                  {"robust_accuracy", rep.rows[0].robust_accuracy},
                  {"elapsed_seconds", timings},
                  {"total_seconds", total_seconds},
                  {"timestamp", utc_timestamp()}};
  if (pipeline.transform == TransformKind::rotation || pipeline.transform == TransformKind::scaling) {
    summary["anchors"] = pipeline.grid.n_outer;
    summary["joint_error_per_sample"] = std::min(1.0, static_cast<double>(pipeline.grid.n_outer) * cfg.alpha);
  }

  const std::string body = csv.str();
  if (cfg.output.empty()) {
    out << body;
  } else {
    write_file(cfg.output, std::span(reinterpret_cast<const unsigned char*>(body.data()), body.size()));
  }
  const std::string summary_path = !cfg.summary.empty() ? cfg.summary : (cfg.output.empty() ? "" : cfg.output + ".json");
  const std::string text = summary.dump(2) + "\n";
  if (summary_path.empty()) {
    out << text;
  } else {
    write_file(summary_path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
  }
  return 0;
}

DistributionSpec table_noise(const std::string& family, bool unit_variance, double lambda, double sigma, double a,
                             double b, double scale) {
  switch (parse_family(family)) {
    case NoiseFamily::gaussian:
      return DistributionSpec::isotropic_gaussian(unit_variance ? 1.0 : sigma, 1);
    case NoiseFamily::exponential:
      return DistributionSpec::exponential(unit_variance ? 1.0 : lambda);
    case NoiseFamily::uniform:
      return unit_variance ? DistributionSpec::uniform(0.0, std::sqrt(12.0)) : DistributionSpec::uniform(a, b);
    case NoiseFamily::laplace:
      return DistributionSpec::laplace(unit_variance ? 1.0 / std::numbers::sqrt2 : scale);
    case NoiseFamily::folded_gaussian:
      return DistributionSpec::folded_gaussian(unit_variance ? 1.0 / std::sqrt(1.0 - 2.0 / std::numbers::pi) : sigma);
  }
  throw ConfigError("unknown noise family");
}

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
  }
}

int error_exit(std::ostream& err, const char* kind, const char* message, int code) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified robustness against semantic image transformations"};
  app.require_subcommand(1);

  // certify
  auto* certify_cmd = app.add_subcommand("certify", "certify a dataset and write CSV rows plus a JSON summary");
  std::string config_path;
  std::optional<std::string> o_transform, o_noise, o_images, o_labels, o_classifier, o_output, o_summary;
  std::optional<std::vector<double>> o_region, o_noise_params;
  std::optional<double> o_alpha;
  std::optional<std::uint64_t> o_n, o_n0, o_batch, o_grid_n, o_grid_r, o_stride, o_limit, o_seed;
  std::optional<unsigned> o_threads, o_workers;
  certify_cmd->add_option("--config", config_path, "JSON run configuration");
  certify_cmd->add_option("--transform", o_transform, "gaussian_blur, brightness_contrast, translation_reflect, "
                                                      "translation_black, rotation or scaling");
  certify_cmd->add_option("--region", o_region, "region numbers (rotation in degrees)")->delimiter(',');
  certify_cmd->add_option("--noise", o_noise, "noise family");
  certify_cmd->add_option("--noise-params", o_noise_params, "noise parameters")->delimiter(',');
  certify_cmd->add_option("--alpha", o_alpha, "error probability (default 0.001)");
  certify_cmd->add_option("--n", o_n, "estimation samples (default 100000)");
  certify_cmd->add_option("--n0", o_n0, "selection samples (default 100)");
  certify_cmd->add_option("--batch", o_batch, "progressive batch size (default 400)");
  certify_cmd->add_option("--grid-n", o_grid_n, "anchors N (default 10000 rotation, 1000 scaling)");
  certify_cmd->add_option("--grid-r", o_grid_r, "inner points R (default 1000 rotation, 250 scaling)");
  certify_cmd->add_option("--images", o_images, "IDX image file");
  certify_cmd->add_option("--labels", o_labels, "IDX label file");
  certify_cmd->add_option("--stride", o_stride, "use every stride-th sample");
  certify_cmd->add_option("--limit", o_limit, "maximum number of samples (0 for all)");
  certify_cmd->add_option("--classifier", o_classifier, "SEMW1 path or synthetic spec");
  certify_cmd->add_option("--seed", o_seed, "random seed");
  certify_cmd->add_option("--threads", o_threads, "sampling threads per sample");
  certify_cmd->add_option("--workers", o_workers, "samples processed in parallel");
  certify_cmd->add_option("--out", o_output, "CSV output path (default standard output)");
  certify_cmd->add_option("--summary", o_summary, "JSON summary path (default <out>.json)");

  // radius-table
  auto* table_cmd = app.add_subcommand("radius-table", "certified radius against p_A for one noise family");
  std::string family;
  double lambda = 1.0, sigma = 1.0, ua = 0.0, ub = 1.0, scale = 1.0;
  bool unit_variance = false;
  std::vector<double> pas;
  std::string table_out;
  table_cmd->add_option("--family", family, "gaussian, exponential, uniform, laplace or folded_gaussian")->required();
  table_cmd->add_option("--lambda", lambda, "exponential rate");
  table_cmd->add_option("--sigma", sigma, "gaussian or folded gaussian scale");
  table_cmd->add_option("--a", ua, "uniform lower bound");
  table_cmd->add_option("--b", ub, "uniform upper bound");
  table_cmd->add_option("--scale", scale, "laplace scale");
  table_cmd->add_flag("--unit-variance", unit_variance, "use the unit-variance member of the family");
  table_cmd->add_option("--pa", pas, "p_A values (default 0.50, 0.51, ..., 0.99, 0.995, 0.999)")->delimiter(',');
  table_cmd->add_option("--out", table_out, "CSV output path");

  // aliasing
  auto* alias_cmd = app.add_subcommand("aliasing", "aliasing bound M and Lipschitz constant for one image");
  std::string image_path, kind_name = "rotation", alias_out;
  double lo = 0.0, hi = 0.0;
  std::uint64_t grid_n = 0, grid_r = 0;
  unsigned alias_threads = 1;
  alias_cmd->add_option("--image", image_path, "SEMT1 image")->required();
  alias_cmd->add_option("--kind", kind_name, "rotation or scaling");
  alias_cmd->add_option("--lo", lo, "lower end (degrees for rotation)")->required();
  alias_cmd->add_option("--hi", hi, "upper end (degrees for rotation)")->required();
  alias_cmd->add_option("--grid-n", grid_n, "anchors N");
  alias_cmd->add_option("--grid-r", grid_r, "inner points R");
  alias_cmd->add_option("--threads", alias_threads, "worker threads");
  alias_cmd->add_option("--out", alias_out, "JSON output path");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "smoothed prediction for one image");
  std::string p_image, p_classifier, p_transform = "gaussian_blur", p_noise = "exponential";
  std::vector<double> p_noise_params{1.0};
  std::uint64_t p_n0 = 100, p_seed = 0;
  double p_alpha = 0.001;
  predict_cmd->add_option("--image", p_image, "SEMT1 image")->required();
  predict_cmd->add_option("--classifier", p_classifier, "SEMW1 path or synthetic spec")->required();
  predict_cmd->add_option("--transform", p_transform, "transform");
  predict_cmd->add_option("--noise", p_noise, "noise family");
  predict_cmd->add_option("--noise-params", p_noise_params, "noise parameters")->delimiter(',');
  predict_cmd->add_option("--n0", p_n0, "samples");
  predict_cmd->add_option("--alpha", p_alpha, "test level");
  predict_cmd->add_option("--seed", p_seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*certify_cmd) {
      RunConfig cfg;
      if (!config_path.empty()) {
        require_file(config_path, "config");
        const auto bytes = read_file(config_path);
        cfg = RunConfig::from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      }
      if (o_transform) cfg.transform = *o_transform;
      if (o_region) cfg.region = *o_region;
      if (o_noise) cfg.noise = *o_noise;
      if (o_noise_params) cfg.noise_params = *o_noise_params;
      if (o_alpha) cfg.alpha = *o_alpha;
      if (o_n) cfg.n = *o_n;
      if (o_n0) cfg.n0 = *o_n0;
      if (o_batch) cfg.batch = *o_batch;
      if (o_grid_n) cfg.grid_n = *o_grid_n;
      if (o_grid_r) cfg.grid_r = *o_grid_r;
      if (o_images) cfg.images = *o_images;
      if (o_labels) cfg.labels = *o_labels;
      if (o_stride) cfg.stride = *o_stride;
      if (o_limit) cfg.limit = *o_limit;
      if (o_classifier) cfg.classifier = *o_classifier;
      if (o_seed) cfg.seed = *o_seed;
      if (o_threads) cfg.threads = *o_threads;
      if (o_workers) cfg.workers = *o_workers;
      if (o_output) cfg.output = *o_output;
      if (o_summary) cfg.summary = *o_summary;
      return run_certify(cfg, out);
    }
    if (*table_cmd) {
      const auto noise = table_noise(family, unit_variance, lambda, sigma, ua, ub, scale);
      try {
        noise.validate();
      } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
      }
      if (pas.empty()) {
        for (int k = 50; k < 100; ++k) pas.push_back(k / 100.0);
        pas.push_back(0.995);
        pas.push_back(0.999);
      }
      std::string csv = "p_a,radius\n";
      for (double p : pas) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p_A values must lie in [0, 1]");
        csv += format_double(p) + "," + format_double(comparable_radius(closed_form_radius(noise, ConfidencePair::two_class(p)))) + "\n";
      }
      emit(out, table_out, csv);
      return 0;
    }
    if (*alias_cmd) {
      require_file(image_path, "image");
      const auto x = read_tensor(image_path);
      IntervalGrid grid;
      if (kind_name == "rotation") {
        grid = {degrees(lo), degrees(hi), grid_n ? grid_n : 10000, grid_r ? grid_r : 1000, GeometricKind::rotation};
      } else if (kind_name == "scaling") {
        grid = {lo, hi, grid_n ? grid_n : 1000, grid_r ? grid_r : 250, GeometricKind::scaling};
      } else {
        throw ConfigError("--kind must be rotation or scaling");
      }
      try {
        grid.validate();
      } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
      }
      const auto b = aliasing_bound(x, grid, std::max(1u, alias_threads));
      const json j = {{"kind", kind_name}, {"lo", grid.a},          {"hi", grid.b},
                      {"n", grid.n_outer}, {"r", grid.n_inner},     {"m", b.m_value},
                      {"sqrt_m", b.sqrt_m}, {"lipschitz", b.lipschitz_l}};
      emit(out, alias_out, j.dump(2) + "\n");
      return 0;
    }
    if (*predict_cmd) {
      require_file(p_image, "image");
      const auto x = read_tensor(p_image);
      const auto h = load_classifier(p_classifier, x.shape());
      RunConfig cfg;
      cfg.transform = p_transform;
      cfg.noise = p_noise;
      cfg.noise_params = p_noise_params;
      cfg.alpha = p_alpha;
      cfg.n0 = p_n0;
      cfg.n = std::max<std::uint64_t>(p_n0, 1);
      cfg.seed = p_seed;
      const auto pipeline = make_pipeline(cfg, x.shape());
      const auto label = smoothed_prediction(*h, pipeline, x, 0);
      out << (label ? std::to_string(*label) : std::string("abstain")) << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    return error_exit(err, "config", e.what(), 2);
  } catch (const ParseError& e) {
    return error_exit(err, "parse", e.what(), 3);
  } catch (const std::exception& e) {
    return error_exit(err, "runtime", e.what(), 1);
  }
  return 1;
}

}  // namespace semcert
