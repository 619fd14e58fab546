#include "semcert/io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "semcert/errors.hpp"

namespace semcert {

namespace {

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

std::uint32_t read_be32(std::span<const unsigned char> b, std::size_t at, const char* what) {
  if (b.size() < at + 4) {
    throw ParseError(std::string("truncated IDX file while reading ") + what + ": need 4 bytes, " +
                         std::to_string(b.size() > at ? b.size() - at : 0) + " left",
                     at);
  }
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
         std::uint32_t{b[at + 3]};
}

void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<unsigned char>(v >> s));
}

void check_magic(std::span<const unsigned char> b, std::uint32_t expected, const char* kind) {
  const std::uint32_t magic = read_be32(b, 0, "the magic number");
  if (magic != expected) {
    std::ostringstream s;
    s << "bad IDX magic for " << kind << ": expected 0x" << std::hex << expected << ", found 0x" << magic;
    throw ParseError(s.str(), 0);
  }
}

// Size of the payload after the header, checked against overflow and the file size.
std::size_t payload_size(std::span<const unsigned char> b, std::size_t header, std::initializer_list<std::uint32_t> dims) {
  std::size_t total = 1;
  for (std::uint32_t d : dims) {
    if (d != 0 && total > std::numeric_limits<std::size_t>::max() / d) {
      throw ParseError("IDX dimension product overflows", 4);
    }
    total *= d;
  }
  const std::size_t have = b.size() - header;
  if (have < total) {
    throw ParseError("truncated IDX payload: expected " + std::to_string(total) + " bytes, found " +
                         std::to_string(have),
                     header + have);
  }
  if (have > total) {
    throw ParseError("trailing bytes after IDX payload: expected " + std::to_string(total) + ", found " +
                         std::to_string(have),
                     header + total);
  }
  return total;
}

double read_le_double(std::span<const unsigned char> b, std::size_t at) {
  std::uint64_t bits = 0;
  for (int k = 7; k >= 0; --k) bits = (bits << 8) | b[at + static_cast<std::size_t>(k)];
  return std::bit_cast<double>(bits);
}

void put_le_double(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<unsigned char>(bits >> (8 * k)));
}

// Splits the ASCII header line of the SEMT1/SEMW1 formats into tokens and returns the
// offset of the first payload byte.
std::size_t header_tokens(std::span<const unsigned char> b, std::vector<std::string>& tokens) {
  std::size_t end = 0;
  while (end < b.size() && b[end] != '\n' && end < 256) ++end;
  if (end >= b.size() || b[end] != '\n') throw ParseError("missing header line", std::min(end, b.size()));
  std::istringstream s(std::string(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(end)));
  for (std::string t; s >> t;) tokens.push_back(t);
  return end + 1;
}

std::size_t parse_extent(const std::string& token, std::size_t offset) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || token.empty() || token[0] == '-' || v == 0 || v > (1ull << 31)) {
    throw ParseError("invalid extent '" + token + "' in header", offset);
  }
  return static_cast<std::size_t>(v);
}

void check_version(const std::vector<std::string>& tokens, const std::string& want, std::size_t count) {
  if (tokens.empty() || tokens[0].rfind(want.substr(0, 4), 0) != 0) {
    throw ParseError("not a " + want + " file", 0);
  }
  if (tokens[0] != want) throw ParseError("unsupported format version '" + tokens[0] + "', expected " + want, 0);
  if (tokens.size() != count) {
    throw ParseError(want + " header needs " + std::to_string(count - 1) + " extents, found " +
                         std::to_string(tokens.size() - 1),
                     0);
  }
}

void check_payload(std::size_t have, std::size_t expected, std::size_t offset) {
  if (have != expected) {
    throw ParseError("payload length mismatch: expected " + std::to_string(expected) + " bytes, found " +
                         std::to_string(have),
                     offset + std::min(have, expected));
  }
}

}  // namespace

std::vector<ImageTensor> parse_idx_images(std::span<const unsigned char> b) {
  check_magic(b, kIdxImages, "images");
  const std::uint32_t n = read_be32(b, 4, "the image count");
  const std::uint32_t rows = read_be32(b, 8, "the row count");
  const std::uint32_t cols = read_be32(b, 12, "the column count");
  if (rows == 0 || cols == 0) throw ParseError("IDX image extents must be positive", rows == 0 ? 8 : 12);
  payload_size(b, 16, {n, rows, cols});

  const Shape shape{1, rows, cols};
  const std::size_t per = shape.size();
  std::vector<ImageTensor> out;
  out.reserve(n);
  std::vector<double> data(per);
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t base = 16 + m * per;
    for (std::size_t p = 0; p < per; ++p) data[p] = b[base + p] / 255.0;
    out.emplace_back(shape, data);
  }
  return out;
}

std::vector<Label> parse_idx_labels(std::span<const unsigned char> b) {
  check_magic(b, kIdxLabels, "labels");
  const std::uint32_t n = read_be32(b, 4, "the label count");
  payload_size(b, 8, {n});
  std::vector<Label> out(n);
  for (std::size_t m = 0; m < n; ++m) out[m] = b[8 + m];
  return out;
}

std::vector<ImageTensor> read_idx_images(const std::string& path) { return parse_idx_images(read_file(path)); }
std::vector<Label> read_idx_labels(const std::string& path) { return parse_idx_labels(read_file(path)); }

std::vector<LabeledImage> read_idx(const std::string& images_path, const std::string& labels_path) {
  auto images = read_idx_images(images_path);
  const auto labels = read_idx_labels(labels_path);
  if (images.size() != labels.size()) {
    throw ConfigError("image file has " + std::to_string(images.size()) + " entries but label file has " +
                      std::to_string(labels.size()));
  }
  std::vector<LabeledImage> out;
  out.reserve(images.size());
  for (std::size_t m = 0; m < images.size(); ++m) out.push_back({std::move(images[m]), labels[m]});
  return out;
}

std::vector<unsigned char> encode_idx_images(const std::vector<ImageTensor>& images) {
  Shape shape{1, 1, 1};
  if (!images.empty()) shape = images.front().shape();
  if (shape.channels != 1) throw ArgumentError("IDX images must have one channel");
  std::vector<unsigned char> out;
  put_be32(out, kIdxImages);
  put_be32(out, static_cast<std::uint32_t>(images.size()));
  put_be32(out, static_cast<std::uint32_t>(shape.width));
  put_be32(out, static_cast<std::uint32_t>(shape.height));
  for (const auto& x : images) {
    if (!(x.shape() == shape)) throw ArgumentError("IDX images must share one shape");
    for (double v : x.data()) out.push_back(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  return out;
}

std::vector<unsigned char> encode_idx_labels(const std::vector<Label>& labels) {
  std::vector<unsigned char> out;
  put_be32(out, kIdxLabels);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (Label l : labels) {
    if (l > 255) throw ArgumentError("IDX labels must fit in one byte");
    out.push_back(static_cast<unsigned char>(l));
  }
  return out;
}

void write_idx_images(const std::vector<ImageTensor>& images, const std::string& path) {
  write_file(path, encode_idx_images(images));
}
void write_idx_labels(const std::vector<Label>& labels, const std::string& path) {
  write_file(path, encode_idx_labels(labels));
}

ImageTensor parse_tensor(std::span<const unsigned char> b) {
  std::vector<std::string> tokens;
  const std::size_t start = header_tokens(b, tokens);
  check_version(tokens, "SEMT1", 4);
  const Shape shape{parse_extent(tokens[1], 0), parse_extent(tokens[2], 0), parse_extent(tokens[3], 0)};
  check_payload(b.size() - start, shape.size() * 8, start);

  std::vector<double> data(shape.size());
  bool normalized = true;
  for (std::size_t p = 0; p < data.size(); ++p) {
    data[p] = read_le_double(b, start + 8 * p);
    if (!std::isfinite(data[p])) throw ParseError("non-finite tensor value", start + 8 * p);
    normalized = normalized && data[p] >= 0.0 && data[p] <= 1.0;
  }
  return ImageTensor(shape, std::move(data), !normalized);
}

std::vector<unsigned char> encode_tensor(const ImageTensor& x) {
  const Shape s = x.shape();
  const std::string header = "SEMT1 " + std::to_string(s.channels) + " " + std::to_string(s.width) + " " +
                             std::to_string(s.height) + "\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  for (double v : x.data()) put_le_double(out, v);
  return out;
}

ImageTensor read_tensor(const std::string& path) { return parse_tensor(read_file(path)); }
void write_tensor(const ImageTensor& x, const std::string& path) { write_file(path, encode_tensor(x)); }

LinearClassifier parse_linear_classifier(std::span<const unsigned char> b) {
  std::vector<std::string> tokens;
  const std::size_t start = header_tokens(b, tokens);
  check_version(tokens, "SEMW1", 5);
  const std::size_t classes = parse_extent(tokens[1], 0);
  const Shape shape{parse_extent(tokens[2], 0), parse_extent(tokens[3], 0), parse_extent(tokens[4], 0)};
  const std::size_t nw = classes * shape.size();
  check_payload(b.size() - start, (nw + classes) * 8, start);

  std::vector<double> values(nw + classes);
  for (std::size_t p = 0; p < values.size(); ++p) {
    values[p] = read_le_double(b, start + 8 * p);
    if (!std::isfinite(values[p])) {
      throw ParseError(std::string("non-finite ") + (p < nw ? "weight" : "bias") + " entry", start + 8 * p);
    }
  }
  std::vector<double> bias(values.begin() + static_cast<std::ptrdiff_t>(nw), values.end());
  values.resize(nw);
  return LinearClassifier(shape, classes, std::move(values), std::move(bias));
}

std::vector<unsigned char> encode_linear_classifier(const LinearClassifier& c) {
  const Shape s = c.input_shape();
  const std::string header = "SEMW1 " + std::to_string(c.num_classes()) + " " + std::to_string(s.channels) + " " +
                             std::to_string(s.width) + " " + std::to_string(s.height) + "\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  for (double v : c.weights()) put_le_double(out, v);
  for (double v : c.bias()) put_le_double(out, v);
  return out;
}

LinearClassifier load_linear_classifier(const std::string& path) { return parse_linear_classifier(read_file(path)); }
void write_linear_classifier(const LinearClassifier& c, const std::string& path) {
  write_file(path, encode_linear_classifier(c));
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace semcert
