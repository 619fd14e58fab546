#ifndef SEMCERT_IO_HPP
#define SEMCERT_IO_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semcert/certify.hpp"
#include "semcert/classifiers.hpp"
#include "semcert/tensor.hpp"

namespace semcert {

// IDX containers (big-endian). Images use magic 0x00000803 with dimensions
// (count, rows, cols) and unsigned byte pixels; labels use 0x00000801 with one
// dimension. Each image becomes a 1 x rows x cols tensor (i = row, j = column, so the
// byte order is the tensor's storage order) with values byte / 255.
// All parse failures throw ParseError carrying the byte offset of the problem.
std::vector<ImageTensor> parse_idx_images(std::span<const unsigned char> bytes);
std::vector<Label> parse_idx_labels(std::span<const unsigned char> bytes);
std::vector<ImageTensor> read_idx_images(const std::string& path);
std::vector<Label> read_idx_labels(const std::string& path);
// Pairs images with labels. Throws ConfigError when the counts differ.
std::vector<LabeledImage> read_idx(const std::string& images_path, const std::string& labels_path);

// Writers for fixtures. Images must share one single-channel shape; pixels are
// rounded to the nearest byte. Labels must be < 256.
std::vector<unsigned char> encode_idx_images(const std::vector<ImageTensor>& images);
std::vector<unsigned char> encode_idx_labels(const std::vector<Label>& labels);
void write_idx_images(const std::vector<ImageTensor>& images, const std::string& path);
void write_idx_labels(const std::vector<Label>& labels, const std::string& path);

// Tensor file: ASCII line "SEMT1 K W H\n", then K*W*H little-endian IEEE doubles in
// storage order. Round trips bit-exactly.
ImageTensor parse_tensor(std::span<const unsigned char> bytes);
std::vector<unsigned char> encode_tensor(const ImageTensor& x);
ImageTensor read_tensor(const std::string& path);
void write_tensor(const ImageTensor& x, const std::string& path);

// Linear classifier file: ASCII line "SEMW1 C K W H\n", then the C x (K*W*H) weights
// row-major and the C biases, all little-endian doubles. Non-finite entries are
// rejected with a ParseError at their offset.
LinearClassifier parse_linear_classifier(std::span<const unsigned char> bytes);
std::vector<unsigned char> encode_linear_classifier(const LinearClassifier& c);
LinearClassifier load_linear_classifier(const std::string& path);
void write_linear_classifier(const LinearClassifier& c, const std::string& path);

// Whole-file helpers. Throw ConfigError when the file cannot be opened.
std::vector<unsigned char> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const unsigned char> bytes);

}  // namespace semcert

#endif  // SEMCERT_IO_HPP
