#pragma once

// Shared helpers for the test suites: deterministic image generators and a
// scratch-directory guard.

#include <unistd.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "esia/bayer.hpp"
#include "esia/image.hpp"
#include "esia/rng.hpp"

namespace esia::testing {

inline RgbImage uniform_image(int width, int height, std::uint8_t r,
                              std::uint8_t g, std::uint8_t b) {
    RgbImage img(width, height);
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            img(row, col, 0) = r;
            img(row, col, 1) = g;
            img(row, col, 2) = b;
        }
    }
    return img;
}

inline RgbImage random_image(int width, int height, std::uint64_t seed) {
    RgbImage img(width, height);
    SplitMix64 rng(seed);
    for (auto& byte : img.data()) {
        byte = static_cast<std::uint8_t>(rng.bounded(256));
    }
    return img;
}

/// Random colors with well-separated channels, so the swap signature is
/// visible in every row (|R-G| + |G-B| >= 8 everywhere).
inline void random_chroma_color(SplitMix64& rng, std::uint8_t rgb[3]) {
    rgb[0] = static_cast<std::uint8_t>(170 + rng.bounded(86));  // R in [170,255]
    rgb[1] = static_cast<std::uint8_t>(70 + rng.bounded(80));   // G in [70,149]
    rgb[2] = static_cast<std::uint8_t>(rng.bounded(50));        // B in [0,49]
}

/// Piecewise-constant blocks of high-chroma colors.
inline RgbImage block_image(int width, int height, int block, std::uint64_t seed) {
    RgbImage img(width, height);
    SplitMix64 rng(seed);
    const int cols = (width + block - 1) / block;
    const int rows = (height + block - 1) / block;
    std::vector<std::array<std::uint8_t, 3>> colors(
        static_cast<std::size_t>(cols) * rows);
    for (auto& c : colors) random_chroma_color(rng, c.data());
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const auto& color = colors[static_cast<std::size_t>(r / block) * cols +
                                       c / block];
            img(r, c, 0) = color[0];
            img(r, c, 1) = color[1];
            img(r, c, 2) = color[2];
        }
    }
    return img;
}

/// Runs an image once through mosaic+demosaic so it becomes a fixed point
/// of that round trip under the given pattern.
inline RgbImage demosaic_stable(const RgbImage& img, BayerPattern pattern) {
    return demosaic(mosaic(img, pattern));
}

class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        dir_ = std::filesystem::temp_directory_path() /
               ("esia_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(dir_);
        std::filesystem::create_directories(dir_);
    }
    ~ScratchDir() { std::filesystem::remove_all(dir_); }

    const std::filesystem::path& path() const { return dir_; }
    std::filesystem::path operator/(const std::string& name) const {
        return dir_ / name;
    }

private:
    std::filesystem::path dir_;
};

}  // namespace esia::testing
