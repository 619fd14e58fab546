#ifndef SEMCERT_CLI_HPP
#define SEMCERT_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semcert/certify.hpp"

namespace semcert {

// One CSV line of a certification run. Timing lives in the JSON summary so that two
// runs with the same configuration produce identical CSV bodies.
struct ReportRow {
  std::size_t index = 0;
  Label true_label = 0;
  Label predicted = 0;
  Verdict verdict = Verdict::abstain;
  double p_a_lower = 0.0;
  double radius = 0.0;
  std::optional<double> sqrt_m;
  std::uint64_t samples_used = 0;

  bool operator==(const ReportRow&) const = default;
};

std::string csv_header();
std::string to_csv(const ReportRow& row);
// Throws ParseError (offset = column start) on a malformed line.
ReportRow parse_csv_row(std::string_view line);
// Shortest representation that reads back to the same double; '.' decimal point in
// every locale.
std::string format_double(double v);

// Everything a `certify` run needs. Regions follow the transform:
//   gaussian_blur         {alpha_max}
//   translation_*         {rho}
//   brightness_contrast   {k_lo, k_hi, b_lo, b_hi}
//   rotation              {lo_degrees, hi_degrees}
//   scaling               {lo, hi}
// The classifier is either a SEMW1 path or a synthetic spec: "constant:<label>[:<classes>]",
// "mean_threshold:<t>" or "l2_ball:<SEMT1 path>:<radius>".
struct RunConfig {
  std::string transform = "gaussian_blur";
  std::vector<double> region;
  std::string noise = "exponential";
  std::vector<double> noise_params;
  double alpha = 0.001;
  std::uint64_t n = 100000;
  std::uint64_t n0 = 100;
  std::uint64_t batch = 400;
  std::uint64_t grid_n = 0;  // 0: 10^4 for rotation, 10^3 for scaling
  std::uint64_t grid_r = 0;  // 0: 10^3 for rotation, 250 for scaling
  std::string images;
  std::string labels;
  std::uint64_t stride = 1;
  std::uint64_t limit = 0;  // 0: no limit
  std::string classifier;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  unsigned workers = 1;
  std::string output;   // CSV path, empty for standard output
  std::string summary;  // JSON path, defaults to output + ".json"

  // Throws ConfigError for unknown keys or ill-typed values.
  static RunConfig from_json(std::string_view text);
  std::string to_json() const;
};

// Translates a configuration into a pipeline and its region for images of `shape`.
// Throws ConfigError on inconsistent settings.
PipelineConfig make_pipeline(const RunConfig& cfg, const Shape& shape);
ParameterSet make_region(const RunConfig& cfg);
DistributionSpec make_noise(TransformKind kind, const std::string& family, const std::vector<double>& params,
                            const Shape& shape);

// Command-line entry point with subcommands certify, radius-table, aliasing and
// predict. Exit codes: 0 success, 1 runtime failure, 2 configuration error such as a
// missing input file, 3 malformed input data; usage errors use CLI11's codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace semcert

#endif  // SEMCERT_CLI_HPP
