#include "lrmr/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "lrmr/errors.hpp"

namespace lrmr {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then reads a decimal integer.
  long next_int(const char* what) {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw FormatError(std::string("PGM: expected ") + what);
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000'000L) throw FormatError(std::string("PGM: ") + what + " too large");
    }
    return v;
  }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  // Exactly one whitespace byte separates maxval from a binary raster.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("PGM: missing whitespace after maxval");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    throw FormatError("PGM: magic number must be P5 or P2");
  }
  const bool binary = bytes[1] == '5';
  HeaderReader in(bytes.subspan(2));
  GrayImage img;
  img.width = in.next_int("width");
  img.height = in.next_int("height");
  const long maxval = in.next_int("maxval");
  if (img.width < 1 || img.height < 1) throw FormatError("PGM: empty image");
  if (maxval < 1 || maxval > 255) throw FormatError("PGM: maxval must lie in [1, 255]");
  const auto count = static_cast<std::size_t>(img.width * img.height);
  img.pixels.resize(count);
  if (binary) {
    in.single_space();
    const std::size_t start = 2 + in.pos();
    if (bytes.size() - start < count) throw FormatError("PGM: truncated raster");
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), count, img.pixels.begin());
  } else {
    for (std::size_t i = 0; i < count; ++i) img.pixels[i] = static_cast<std::uint8_t>(
        [&] {
          long v = 0;
          try {
            v = in.next_int("pixel");
          } catch (const FormatError&) {
            throw FormatError("PGM: truncated raster");
          }
          return v;
        }());
  }
  for (std::uint8_t v : img.pixels) {
    if (v > maxval) throw FormatError("PGM: sample exceeds maxval");
  }
  return img;
}

GrayImage read_pgm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_pgm(bytes);
}

std::vector<std::uint8_t> write_pgm(const GrayImage& img) {
  if (img.width < 1 || img.height < 1 ||
      img.pixels.size() != static_cast<std::size_t>(img.width * img.height)) {
    throw InvalidInput("image size does not match its pixel buffer");
  }
  const std::string header =
      "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

void write_pgm_file(const std::string& path, const GrayImage& img) {
  const auto bytes = write_pgm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

DenseMatrix to_matrix(const GrayImage& img) {
  DenseMatrix X(img.height, img.width);
  for (Index i = 0; i < img.height; ++i)
    for (Index j = 0; j < img.width; ++j) X(i, j) = img.at(i, j);
  return X;
}

GrayImage from_matrix(const DenseMatrix& X) {
  GrayImage img{X.cols(), X.rows(), std::vector<std::uint8_t>(X.size())};
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      const double v = std::clamp(std::round(X(i, j)), 0.0, 255.0);
      img.pixels[i * img.width + j] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

std::vector<Entry> sample_pixels(const GrayImage& img, double fraction, std::uint64_t seed) {
  return uniform_mask(img.height, img.width, fraction, seed);
}

ImageCompletion complete_image_detailed(const GrayImage& img, std::span<const Entry> mask,
                                        const SolverConfig& cfg) {
  if (mask.empty()) throw InvalidArgument("pixel mask is empty");
  const DenseMatrix pixels = to_matrix(img);
  const MeasurementOp op = completion_op(img.height, img.width, mask);
  ImageCompletion out;
  out.report = solve(op, apply(op, pixels), cfg);
  out.reconstruction = out.report.x_final.cwiseMax(0.0);
  out.image = from_matrix(out.reconstruction);
  return out;
}

GrayImage complete_image(const GrayImage& img, std::span<const Entry> mask,
                         const SolverConfig& cfg) {
  return complete_image_detailed(img, mask, cfg).image;
}

}  // namespace lrmr
