#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "esia/error.hpp"

namespace esia {

struct PixelCoord {
    int row = 0;
    int col = 0;
};

/// 8-bit interleaved RGB raster, row-major, channel order R,G,B.
/// Minimum size 2x2 so a full Bayer quad always fits.
class RgbImage {
public:
    RgbImage(int width, int height);
    RgbImage(int width, int height, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    std::uint8_t& operator()(int row, int col, int channel) {
        return data_[static_cast<std::size_t>(row * width_ + col) * 3 + channel];
    }
    std::uint8_t operator()(int row, int col, int channel) const {
        return data_[static_cast<std::size_t>(row * width_ + col) * 3 + channel];
    }

    /// Bounds-checked access; throws OutOfRange.
    std::uint8_t at(PixelCoord p, int channel) const;
    void set(PixelCoord p, int channel, std::uint8_t value);

    bool contains(PixelCoord p) const noexcept {
        return p.row >= 0 && p.row < height_ && p.col >= 0 && p.col < width_;
    }

    const std::vector<std::uint8_t>& data() const noexcept { return data_; }
    std::vector<std::uint8_t>& data() noexcept { return data_; }

    bool operator==(const RgbImage& other) const = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> data_;
};

/// Reads an 8-bit RGB PNG or binary PPM (P6, maxval 255). The format is
/// sniffed from magic bytes, not the extension. Anything else (16-bit,
/// palette, grayscale, alpha) is UnsupportedFormat.
RgbImage load_image(const std::filesystem::path& path);

/// Writes a lossless 8-bit RGB PNG, or P6 when the extension is ".ppm".
/// Encoding is deterministic: saving the same image twice produces
/// byte-identical files.
void save_image(const RgbImage& img, const std::filesystem::path& path);

}  // namespace esia
