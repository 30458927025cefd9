#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "esia/image.hpp"

namespace esia {

enum class BayerPattern { RGGB, GRBG, GBRG, BGGR };

/// Channel index (0=R, 1=G, 2=B) sampled at absolute coordinate (row, col).
/// Site parity comes from absolute coordinates, so odd image sizes only
/// affect border handling, never site assignment.
inline int site_channel(BayerPattern pattern, int row, int col) {
    static constexpr std::array<std::array<int, 4>, 4> kSites = {{
        {0, 1, 1, 2},  // RGGB
        {1, 0, 2, 1},  // GRBG
        {1, 2, 0, 1},  // GBRG
        {2, 1, 1, 0},  // BGGR
    }};
    return kSites[static_cast<int>(pattern)][(row & 1) * 2 + (col & 1)];
}

BayerPattern parse_bayer_pattern(const std::string& name);
std::string to_string(BayerPattern pattern);

/// Single-channel raster of raw CFA samples plus the pattern that assigns
/// a color to each site.
class CfaImage {
public:
    CfaImage(int width, int height, BayerPattern pattern);
    CfaImage(int width, int height, BayerPattern pattern,
             std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    BayerPattern pattern() const noexcept { return pattern_; }

    std::uint8_t& operator()(int row, int col) {
        return data_[static_cast<std::size_t>(row) * width_ + col];
    }
    std::uint8_t operator()(int row, int col) const {
        return data_[static_cast<std::size_t>(row) * width_ + col];
    }

    const std::vector<std::uint8_t>& data() const noexcept { return data_; }
    std::vector<std::uint8_t>& data() noexcept { return data_; }

    bool operator==(const CfaImage& other) const = default;

private:
    int width_;
    int height_;
    BayerPattern pattern_;
    std::vector<std::uint8_t> data_;
};

/// Samples the pattern-designated channel at every pixel.
CfaImage mosaic(const RgbImage& img, BayerPattern pattern);

/// Bilinear reconstruction. Missing channels are the average of the nearest
/// same-color CFA neighbors (2 or 4 taps), tap coordinates clamped to the
/// frame (replicate padding), sums rounded half away from zero.
RgbImage demosaic(const CfaImage& cfa);

/// Demosaics only rows [row_begin, row_end) into `out`, with taps reading
/// the full-frame CFA; other rows of `out` are untouched. demosaic() is
/// this over all rows.
void demosaic_rows(const CfaImage& cfa, int row_begin, int row_end,
                   RgbImage& out);

}  // namespace esia
