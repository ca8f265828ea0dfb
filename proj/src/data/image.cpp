// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

namespace ridnet {

ImageBuffer::ImageBuffer(int c, int h, int w, float fill) : channels(c), height(h), width(w) {
  if (c < 1 || h < 1 || w < 1) fail(Errc::invalid_argument, "image dimensions must be positive");
  data.assign(static_cast<std::size_t>(c) * h * w, fill);
}

ImageBuffer clipped(const ImageBuffer& image) {
  ImageBuffer out = image;
  for (float& v : out.data) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

ImageBuffer quantized(const ImageBuffer& image) {
  ImageBuffer out = image;
  for (float& v : out.data) v = std::nearbyint(std::clamp(v, 0.0f, 1.0f) * 255.0f) / 255.0f;
  return out;
}

namespace {

class HeaderParser {
 public:
  explicit HeaderParser(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  int next_int(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      fail(Errc::io, std::string("netpbm: malformed header, expected ") + what);
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 30)) fail(Errc::io, std::string("netpbm: ") + what + " out of range");
      ++pos_;
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail(Errc::io, "netpbm: malformed header terminator");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

ImageBuffer decode_netpbm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    fail(Errc::io, "netpbm: expected a binary P5 or P6 header");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderParser header(bytes);
  const int width = header.next_int("width");
  const int height = header.next_int("height");
  const int maxval = header.next_int("maxval");
  if (width < 1 || height < 1) fail(Errc::io, "netpbm: image dimensions must be positive");
  if (maxval != 255) fail(Errc::io, "netpbm: unsupported maxval " + std::to_string(maxval) + " (only 255)");
  const std::size_t offset = header.raster_offset();
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  const std::size_t needed = pixels * channels;
  if (bytes.size() - offset < needed) {
    fail(Errc::io, "netpbm: truncated raster, need " + std::to_string(needed) + " bytes, have " +
                       std::to_string(bytes.size() - offset));
  }
  ImageBuffer image(channels, height, width);
  const std::uint8_t* raster = bytes.data() + offset;
  // The file interleaves channels per pixel; the buffer is planar.
  for (std::size_t i = 0; i < pixels; ++i) {
    for (int c = 0; c < channels; ++c) {
      image.data[c * pixels + i] = static_cast<float>(raster[i * channels + c]) / 255.0f;
    }
  }
  return image;
}

std::vector<std::uint8_t> encode_netpbm(const ImageBuffer& image) {
  if (image.channels != 1 && image.channels != 3) {
    fail(Errc::invalid_argument, "netpbm: only 1 or 3 channel images can be written");
  }
  const std::string header = std::string(image.channels == 1 ? "P5" : "P6") + "\n" + std::to_string(image.width) +
                             " " + std::to_string(image.height) + "\n255\n";
  const std::size_t pixels = static_cast<std::size_t>(image.width) * image.height;
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.resize(header.size() + pixels * image.channels);
  std::uint8_t* raster = out.data() + header.size();
  for (std::size_t i = 0; i < pixels; ++i) {
    for (int c = 0; c < image.channels; ++c) {
      const float v = std::clamp(image.data[c * pixels + i], 0.0f, 1.0f);
      raster[i * image.channels + c] = static_cast<std::uint8_t>(std::nearbyint(v * 255.0f));
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::io, "failed writing '" + path.string() + "'");
}

ImageBuffer read_image(const std::filesystem::path& path) {
  try {
    return decode_netpbm(read_file_bytes(path));
  } catch (const Error& e) {
    fail(Errc::io, path.string() + ": " + e.what());
  }
}

void write_image(const ImageBuffer& image, const std::filesystem::path& path) {
  write_file_bytes(path, encode_netpbm(image));
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) fail(Errc::io, "'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Tensor<float> image_to_tensor(const ImageBuffer& image) {
  return Tensor<float>({1, static_cast<std::size_t>(image.channels), static_cast<std::size_t>(image.height),
                        static_cast<std::size_t>(image.width)},
                       image.data);
}

ImageBuffer tensor_to_image(const Tensor<float>& tensor, std::size_t index) {
  if (tensor.rank() != 4 || index >= tensor.dim(0)) {
    fail(Errc::shape_mismatch, "tensor_to_image: expected an NCHW tensor with item " + std::to_string(index));
  }
  ImageBuffer image(static_cast<int>(tensor.dim(1)), static_cast<int>(tensor.dim(2)), static_cast<int>(tensor.dim(3)));
  const std::size_t n = image.size();
  std::copy_n(tensor.data().begin() + static_cast<std::ptrdiff_t>(index * n), n, image.data.begin());
  return image;
}

}  // namespace ridnet
