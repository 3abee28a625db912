#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bflow/grid.hpp"

namespace bflow {

/// Integer grayscale image as stored on disk: row-major scanlines, top row
/// first, samples in [0, maxval].
struct RawImage {
  int width = 0;
  int height = 0;
  int maxval = 255;  // 1..65535
  std::vector<std::uint16_t> pixels;  // row-major, size width*height
};

/// Parses PGM bytes, "P2" (ASCII) or "P5" (binary), honoring '#' comments in
/// the header. Binary samples are one byte for maxval <= 255, otherwise two
/// bytes big-endian. Malformed input throws ParseError with the byte offset.
RawImage read_pgm(std::span<const std::uint8_t> bytes);

/// Serializes to binary P5; read_pgm(write_pgm(img)) reproduces the pixel
/// content exactly.
std::vector<std::uint8_t> write_pgm(const RawImage& img);

RawImage read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const RawImage& img, const std::filesystem::path& path);

/// Intensities scaled to [0,1] and transposed from row-major scanlines into
/// the column-indexed (i,j) = (x,y) matrix convention, width -> nx and
/// height -> ny.
ImageField normalize(const RawImage& img);

/// Inverse of normalize for file output: clamps to [0,1] and rounds to
/// integer samples at the given maxval.
RawImage quantize(const ImageField& img, int maxval);

/// Corner-aligned bilinear resample. Output intensities stay inside the input
/// range; targets below 2x2 are rejected.
ImageField resize_bilinear(const ImageField& img, int new_nx, int new_ny);

}  // namespace bflow
