#include "esia/bayer.hpp"

#include <algorithm>

#include "esia/error.hpp"

namespace esia {

BayerPattern parse_bayer_pattern(const std::string& name) {
    if (name == "rggb" || name == "RGGB") return BayerPattern::RGGB;
    if (name == "grbg" || name == "GRBG") return BayerPattern::GRBG;
    if (name == "gbrg" || name == "GBRG") return BayerPattern::GBRG;
    if (name == "bggr" || name == "BGGR") return BayerPattern::BGGR;
    raise(ErrorKind::InvalidArgument, "unknown Bayer pattern '" + name + "'");
}

std::string to_string(BayerPattern pattern) {
    switch (pattern) {
        case BayerPattern::RGGB: return "rggb";
        case BayerPattern::GRBG: return "grbg";
        case BayerPattern::GBRG: return "gbrg";
        case BayerPattern::BGGR: return "bggr";
    }
    return "rggb";
}

CfaImage::CfaImage(int width, int height, BayerPattern pattern)
    : width_(width), height_(height), pattern_(pattern),
      data_(static_cast<std::size_t>(width) * height, 0) {
    if (width < 1 || height < 1) {
        raise(ErrorKind::InvalidArgument, "CFA image must be non-empty");
    }
}

CfaImage::CfaImage(int width, int height, BayerPattern pattern,
                   std::vector<std::uint8_t> data)
    : width_(width), height_(height), pattern_(pattern), data_(std::move(data)) {
    if (width < 1 || height < 1) {
        raise(ErrorKind::InvalidArgument, "CFA image must be non-empty");
    }
    if (data_.size() != static_cast<std::size_t>(width) * height) {
        raise(ErrorKind::InvalidArgument, "CFA buffer size mismatch");
    }
}

CfaImage mosaic(const RgbImage& img, BayerPattern pattern) {
    CfaImage out(img.width(), img.height(), pattern);
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            out(r, c) = img(r, c, site_channel(pattern, r, c));
        }
    }
    return out;
}

namespace {

// Rounded averages; samples are non-negative so half away from zero is
// plain half-up integer arithmetic.
inline std::uint8_t avg2(int a, int b) {
    return static_cast<std::uint8_t>((a + b + 1) / 2);
}
inline std::uint8_t avg4(int a, int b, int c, int d) {
    return static_cast<std::uint8_t>((a + b + c + d + 2) / 4);
}

}  // namespace

void demosaic_rows(const CfaImage& cfa, int row_begin, int row_end,
                   RgbImage& out) {
    if (out.width() != cfa.width() || out.height() != cfa.height()) {
        raise(ErrorKind::DimensionMismatch, "demosaic output size mismatch");
    }
    const int w = cfa.width();
    const int h = cfa.height();
    const BayerPattern pat = cfa.pattern();
    row_begin = std::max(row_begin, 0);
    row_end = std::min(row_end, h);

    // Replicate padding: tap coordinates clamp to the frame.
    auto v = [&](int r, int c) -> int {
        r = std::clamp(r, 0, h - 1);
        c = std::clamp(c, 0, w - 1);
        return cfa(r, c);
    };

    for (int r = row_begin; r < row_end; ++r) {
        for (int c = 0; c < w; ++c) {
            const int own = cfa(r, c);
            const int site = site_channel(pat, r, c);
            std::uint8_t red, green, blue;
            if (site == 0) {  // R site: G on the cross, B on the diagonals
                red = static_cast<std::uint8_t>(own);
                green = avg4(v(r - 1, c), v(r + 1, c), v(r, c - 1), v(r, c + 1));
                blue = avg4(v(r - 1, c - 1), v(r - 1, c + 1), v(r + 1, c - 1),
                            v(r + 1, c + 1));
            } else if (site == 2) {  // B site: mirrored
                blue = static_cast<std::uint8_t>(own);
                green = avg4(v(r - 1, c), v(r + 1, c), v(r, c - 1), v(r, c + 1));
                red = avg4(v(r - 1, c - 1), v(r - 1, c + 1), v(r + 1, c - 1),
                           v(r + 1, c + 1));
            } else {  // G site: horizontal neighbor decides which row kind
                green = static_cast<std::uint8_t>(own);
                if (site_channel(pat, r, c + 1) == 0) {  // row carries R
                    red = avg2(v(r, c - 1), v(r, c + 1));
                    blue = avg2(v(r - 1, c), v(r + 1, c));
                } else {  // row carries B
                    blue = avg2(v(r, c - 1), v(r, c + 1));
                    red = avg2(v(r - 1, c), v(r + 1, c));
                }
            }
            out(r, c, 0) = red;
            out(r, c, 1) = green;
            out(r, c, 2) = blue;
        }
    }
}

RgbImage demosaic(const CfaImage& cfa) {
    RgbImage out(cfa.width(), cfa.height());
    demosaic_rows(cfa, 0, cfa.height(), out);
    return out;
}

}  // namespace esia
