#include "bflow/imageio.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace bflow {

namespace {

// Header scanner that tracks the byte offset for error reporting. Whitespace
// separates tokens; '#' starts a comment running to end of line.
class Cursor {
public:
  explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }

  std::uint8_t take() {
    if (at_end()) throw ParseError("unexpected end of data", pos_);
    return bytes_[pos_++];
  }

  void skip_space_and_comments() {
    while (!at_end()) {
      const std::uint8_t c = bytes_[pos_];
      if (c == '#') {
        while (!at_end() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int take_int(const char* what, long max_value) {
    skip_space_and_comments();
    if (at_end()) throw ParseError(std::string("missing ") + what, pos_);
    if (!std::isdigit(bytes_[pos_])) {
      throw ParseError(std::string("expected digit in ") + what, pos_);
    }
    long value = 0;
    while (!at_end() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > max_value) {
        throw ParseError(std::string(what) + " out of range", pos_);
      }
      ++pos_;
    }
    return static_cast<int>(value);
  }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

RawImage read_pgm(std::span<const std::uint8_t> bytes) {
  Cursor cur(bytes);
  if (bytes.size() < 2) throw ParseError("not a PGM file", 0);
  const char m0 = static_cast<char>(cur.take());
  const char m1 = static_cast<char>(cur.take());
  if (m0 != 'P' || (m1 != '2' && m1 != '5')) {
    throw ParseError("unsupported magic (want P2 or P5)", 0);
  }
  const bool binary = m1 == '5';

  RawImage img;
  img.width = cur.take_int("width", 1 << 20);
  img.height = cur.take_int("height", 1 << 20);
  img.maxval = cur.take_int("maxval", 65535);
  if (img.width < 1 || img.height < 1) {
    throw ParseError("image dimensions must be positive", cur.offset());
  }
  if (img.maxval < 1) throw ParseError("maxval must be positive", cur.offset());

  const std::size_t count =
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.pixels.reserve(count);

  if (binary) {
    // Exactly one whitespace byte separates the header from the raster.
    cur.take();
    const bool two_byte = img.maxval > 255;
    for (std::size_t i = 0; i < count; ++i) {
      std::uint16_t v = cur.take();
      if (two_byte) v = static_cast<std::uint16_t>((v << 8) | cur.take());
      if (v > img.maxval) {
        throw ParseError("pixel exceeds maxval", cur.offset() - (two_byte ? 2 : 1));
      }
      img.pixels.push_back(v);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      cur.skip_space_and_comments();
      const std::size_t before = cur.offset();
      const int v = cur.take_int("pixel", 65535);
      if (v > img.maxval) throw ParseError("pixel exceeds maxval", before);
      img.pixels.push_back(static_cast<std::uint16_t>(v));
    }
  }
  return img;
}

std::vector<std::uint8_t> write_pgm(const RawImage& img) {
  if (img.width < 1 || img.height < 1 || img.maxval < 1 || img.maxval > 65535) {
    throw DomainError("write_pgm: invalid image header");
  }
  const std::size_t count =
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (img.pixels.size() != count) {
    throw DimensionError("write_pgm: pixel count does not match dimensions");
  }

  std::string header = "P5\n" + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n" +
                       std::to_string(img.maxval) + "\n";
  const bool two_byte = img.maxval > 255;
  std::vector<std::uint8_t> out;
  out.reserve(header.size() + count * (two_byte ? 2 : 1));
  out.insert(out.end(), header.begin(), header.end());
  for (const std::uint16_t v : img.pixels) {
    if (v > img.maxval) throw DomainError("write_pgm: pixel exceeds maxval");
    if (two_byte) out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  return out;
}

RawImage read_pgm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_pgm(bytes);
}

void write_pgm_file(const RawImage& img, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = write_pgm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

ImageField normalize(const RawImage& img) {
  if (img.width < 2 || img.height < 2) {
    throw DomainError("normalize: image must be at least 2x2");
  }
  const GridSpec grid(img.width, img.height);
  Eigen::MatrixXd data(grid.nx, grid.ny);
  const double scale = 1.0 / img.maxval;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      data(i, j) = scale * img.pixels[static_cast<std::size_t>(j) * img.width + i];
    }
  }
  return ImageField(grid, std::move(data));
}

RawImage quantize(const ImageField& img, int maxval) {
  if (maxval < 1 || maxval > 65535) {
    throw DomainError("quantize: maxval must lie in 1..65535");
  }
  RawImage out;
  out.width = img.grid.nx;
  out.height = img.grid.ny;
  out.maxval = maxval;
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);
  for (int j = 0; j < img.grid.ny; ++j) {
    for (int i = 0; i < img.grid.nx; ++i) {
      const double clamped = std::min(1.0, std::max(0.0, img.data(i, j)));
      out.pixels[static_cast<std::size_t>(j) * out.width + i] =
          static_cast<std::uint16_t>(std::lround(clamped * maxval));
    }
  }
  return out;
}

ImageField resize_bilinear(const ImageField& img, int new_nx, int new_ny) {
  if (new_nx < 2 || new_ny < 2) {
    throw DomainError("resize_bilinear: target must be at least 2x2");
  }
  const GridSpec out_grid(new_nx, new_ny);
  Eigen::MatrixXd out(new_nx, new_ny);

  const int nx = img.grid.nx;
  const int ny = img.grid.ny;
  const double sx = static_cast<double>(nx - 1) / (new_nx - 1);
  const double sy = static_cast<double>(ny - 1) / (new_ny - 1);
  for (int j = 0; j < new_ny; ++j) {
    const double y = j * sy;
    const int j0 = std::min(static_cast<int>(y), ny - 2);
    const double ty = y - j0;
    for (int i = 0; i < new_nx; ++i) {
      const double x = i * sx;
      const int i0 = std::min(static_cast<int>(x), nx - 2);
      const double tx = x - i0;
      out(i, j) = (1 - tx) * (1 - ty) * img.data(i0, j0) +
                  tx * (1 - ty) * img.data(i0 + 1, j0) +
                  (1 - tx) * ty * img.data(i0, j0 + 1) +
                  tx * ty * img.data(i0 + 1, j0 + 1);
    }
  }
  return ImageField(out_grid, std::move(out));
}

}  // namespace bflow
