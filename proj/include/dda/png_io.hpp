// Copyright 2026 The DDA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>

#include "dda/error.hpp"
#include "dda/image.hpp"

namespace dda {

class PngError : public IoError {
public:
  enum class Kind { kNotFound, kUnsupported, kCorrupt, kWriteFailed };

  PngError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Reads an 8- or 16-bit RGB/RGBA PNG. Samples are scaled by 1/(2^depth - 1);
/// alpha is dropped.
Image load_png(const std::filesystem::path& path);

/// Writes 8-bit RGB; each sample becomes floor(clamp(s,0,1)*255 + 0.5).
void save_png(const Image& image, const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG from a plane in [0,1].
void save_png_gray(const Plane& plane, const std::filesystem::path& path);

std::uint8_t quantize_sample(double s);

} // namespace dda
