// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ridnet/tensor.hpp"

namespace ridnet {

// Planar channel-major float image; pixel (c, y, x) lives at
// data[(c * height + y) * width + x].
struct ImageBuffer {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  ImageBuffer() = default;
  ImageBuffer(int channels, int height, int width, float fill = 0.0f);

  std::size_t size() const { return data.size(); }
  float& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  float at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  bool same_shape(const ImageBuffer& other) const {
    return channels == other.channels && height == other.height && width == other.width;
  }
};

// Values clamped to [0, 1].
ImageBuffer clipped(const ImageBuffer& image);

// Round-to-nearest onto the 8-bit grid, v -> round(clamp(v) * 255) / 255.
ImageBuffer quantized(const ImageBuffer& image);

// Binary NetPBM: P5 for one channel, P6 for three; maxval must be 255.
// Header comments ('#' to end of line) are accepted.
ImageBuffer decode_netpbm(std::span<const std::uint8_t> bytes);
// Writes P5/P6 with maxval 255, clamping to [0, 1] and rounding to nearest.
std::vector<std::uint8_t> encode_netpbm(const ImageBuffer& image);

ImageBuffer read_image(const std::filesystem::path& path);
void write_image(const ImageBuffer& image, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Sorted list of *.pgm / *.ppm files directly inside `dir`.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

// 1 x C x H x W tensor holding a copy of the image.
Tensor<float> image_to_tensor(const ImageBuffer& image);
// Image from item `index` of an N x C x H x W tensor (values not clipped).
ImageBuffer tensor_to_image(const Tensor<float>& tensor, std::size_t index = 0);

}  // namespace ridnet
