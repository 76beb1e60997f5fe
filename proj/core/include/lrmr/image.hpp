#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lrmr/irlsm.hpp"
#include "lrmr/matcore.hpp"
#include "lrmr/measure.hpp"

namespace lrmr {

/// 8-bit grayscale image, row-major.
struct GrayImage {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(Index row, Index col) const { return pixels[row * width + col]; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Parses binary (P5) or plain (P2) PGM with maxval <= 255. Throws
/// FormatError on a malformed header, maxval > 255, out-of-range samples or
/// a truncated payload.
GrayImage read_pgm(std::span<const std::uint8_t> bytes);
GrayImage read_pgm_file(const std::string& path);

/// P5, maxval 255.
std::vector<std::uint8_t> write_pgm(const GrayImage& img);
void write_pgm_file(const std::string& path, const GrayImage& img);

/// height x width matrix of pixel values.
DenseMatrix to_matrix(const GrayImage& img);

/// Rounds to nearest, clamping to [0, 255].
GrayImage from_matrix(const DenseMatrix& X);

/// Exactly floor(fraction * width * height) distinct pixel positions
/// (row, col), uniformly without replacement.
std::vector<Entry> sample_pixels(const GrayImage& img, double fraction, std::uint64_t seed);

struct ImageCompletion {
  GrayImage image;
  DenseMatrix reconstruction;  // solver output with negatives set to zero
  SolverReport report;
};

/// Completes the pixel matrix from the masked pixels with rank input
/// cfg.rank, zeroes negative values, then rounds and clamps to 8 bits.
ImageCompletion complete_image_detailed(const GrayImage& img, std::span<const Entry> mask,
                                        const SolverConfig& cfg);
GrayImage complete_image(const GrayImage& img, std::span<const Entry> mask,
                         const SolverConfig& cfg);

}  // namespace lrmr
