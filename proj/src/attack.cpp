#include "esia/attack.hpp"

#include <algorithm>
#include <numeric>

#include "esia/error.hpp"
#include "esia/rng.hpp"

namespace esia {

StripCountRange strip_count_range(SeverityLevel severity) {
    switch (severity) {
        case SeverityLevel::Unattacked: return {0, 0};
        case SeverityLevel::Mild: return {1, 6};
        case SeverityLevel::Moderate: return {7, 12};
        case SeverityLevel::Severe: return {13, 20};
    }
    return {0, 0};
}

SeverityLevel parse_severity(const std::string& name) {
    if (name == "unattacked") return SeverityLevel::Unattacked;
    if (name == "mild") return SeverityLevel::Mild;
    if (name == "moderate") return SeverityLevel::Moderate;
    if (name == "severe") return SeverityLevel::Severe;
    raise(ErrorKind::InvalidArgument, "unknown severity '" + name + "'");
}

std::string to_string(SeverityLevel severity) {
    switch (severity) {
        case SeverityLevel::Unattacked: return "unattacked";
        case SeverityLevel::Mild: return "mild";
        case SeverityLevel::Moderate: return "moderate";
        case SeverityLevel::Severe: return "severe";
    }
    return "unattacked";
}

void validate_strips(const std::vector<StripSpec>& strips, int height) {
    for (std::size_t i = 0; i < strips.size(); ++i) {
        const StripSpec& s = strips[i];
        if (s.start_row < 0 || s.start_row >= s.end_row || s.end_row > height) {
            raise(ErrorKind::InvalidArgument,
                  "strip [" + std::to_string(s.start_row) + "," +
                      std::to_string(s.end_row) + ") out of bounds for height " +
                      std::to_string(height));
        }
        if (s.height() < 2) {
            raise(ErrorKind::InvalidArgument, "strip height must be >= 2");
        }
        if (s.start_row % 2 != 0) {
            raise(ErrorKind::InvalidArgument,
                  "strip start row " + std::to_string(s.start_row) +
                      " must be even");
        }
        if (i > 0) {
            const StripSpec& prev = strips[i - 1];
            if (s.start_row < prev.end_row + 2) {
                raise(ErrorKind::InvalidArgument,
                      "strips must be sorted with >= 2 clean rows between them");
            }
        }
    }
}

void validate_plan(const AttackPlan& plan, bool enforce_count_range) {
    validate_strips(plan.strips, plan.image_height);
    if (enforce_count_range) {
        const StripCountRange range = strip_count_range(plan.severity);
        const int count = static_cast<int>(plan.strips.size());
        if (count < range.min || count > range.max) {
            raise(ErrorKind::InvalidArgument,
                  "strip count " + std::to_string(count) + " outside [" +
                      std::to_string(range.min) + "," +
                      std::to_string(range.max) + "] for severity " +
                      to_string(plan.severity));
        }
    }
}

namespace {

void validate_sampler_config(const SamplerConfig& config) {
    if (config.min_strip_height < 2 ||
        config.min_strip_height > config.max_strip_height ||
        config.min_strip_height % 2 != 0 || config.max_strip_height % 2 != 0) {
        raise(ErrorKind::InvalidConfig,
              "strip heights must be even with 2 <= min <= max");
    }
    if (config.max_placement_attempts < 1) {
        raise(ErrorKind::InvalidConfig, "max_placement_attempts must be >= 1");
    }
}

}  // namespace

AttackPlan sample_plan(SeverityLevel severity, int width, int height,
                       std::uint64_t seed, const SamplerConfig& config) {
    validate_sampler_config(config);
    if (width < 2 || height < 2) {
        raise(ErrorKind::InvalidArgument, "image must be at least 2x2");
    }

    AttackPlan plan;
    plan.severity = severity;
    plan.seed = seed;
    plan.image_width = width;
    plan.image_height = height;
    if (severity == SeverityLevel::Unattacked) {
        return plan;
    }

    SplitMix64 rng(seed);
    const StripCountRange range = strip_count_range(severity);
    const int count = static_cast<int>(
        rng.range(static_cast<std::uint64_t>(range.min),
                  static_cast<std::uint64_t>(range.max)));

    std::vector<int> heights(count);
    for (int i = 0; i < count; ++i) {
        const int h = static_cast<int>(
            rng.range(static_cast<std::uint64_t>(config.min_strip_height),
                      static_cast<std::uint64_t>(config.max_strip_height)));
        heights[i] = h & ~1;  // round down to even
    }

    // Quick infeasibility check before burning attempts.
    const int occupied =
        std::accumulate(heights.begin(), heights.end(), 0) + 2 * (count - 1);
    if (occupied > height) {
        raise(ErrorKind::ImageTooSmall,
              std::to_string(count) + " strips need " + std::to_string(occupied) +
                  " rows, image has " + std::to_string(height));
    }

    // Place tallest strips first; each position is drawn uniformly over even
    // start rows and rejected on conflict. Total draws are capped; the count
    // is never reduced to force a fit.
    std::vector<int> order(heights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return heights[a] > heights[b]; });

    std::vector<StripSpec> placed;
    int attempts = 0;
    for (const int idx : order) {
        const int strip_height = heights[idx];
        for (;;) {
            if (++attempts > config.max_placement_attempts) {
                raise(ErrorKind::ImageTooSmall,
                      "no feasible placement for " + std::to_string(count) +
                          " strips within " +
                          std::to_string(config.max_placement_attempts) +
                          " attempts");
            }
            const int max_even_start = (height - strip_height) / 2;
            const int start = 2 * static_cast<int>(rng.bounded(
                                      static_cast<std::uint64_t>(max_even_start) + 1));
            const StripSpec candidate{start, start + strip_height};
            const bool clear = std::all_of(
                placed.begin(), placed.end(), [&](const StripSpec& other) {
                    return candidate.start_row >= other.end_row + 2 ||
                           other.start_row >= candidate.end_row + 2;
                });
            if (clear) {
                placed.push_back(candidate);
                break;
            }
        }
    }

    std::sort(placed.begin(), placed.end(),
              [](const StripSpec& a, const StripSpec& b) {
                  return a.start_row < b.start_row;
              });
    plan.strips = std::move(placed);
    validate_plan(plan);
    return plan;
}

RgbImage apply_swap(const RgbImage& img, const AttackPlan& plan,
                    BayerPattern pattern) {
    if (plan.image_width != img.width() || plan.image_height != img.height()) {
        raise(ErrorKind::DimensionMismatch,
              "plan is for " + std::to_string(plan.image_width) + "x" +
                  std::to_string(plan.image_height) + ", image is " +
                  std::to_string(img.width()) + "x" +
                  std::to_string(img.height()));
    }
    validate_strips(plan.strips, img.height());
    if (plan.strips.empty()) {
        return img;
    }

    const int w = img.width();
    const int h = img.height();

    // Per-site overwrites on a working copy. Row i's site channel takes the
    // sample the camera would have delivered for row i+1: the site channel
    // of the pixel below. The last strip row is the resync row and keeps its
    // own samples.
    RgbImage work = img;
    for (const StripSpec& strip : plan.strips) {
        for (int i = strip.start_row; i < strip.end_row - 1; ++i) {
            const int src_row = std::min(i + 1, h - 1);
            for (int c = 0; c < w; ++c) {
                const int dst_ch = site_channel(pattern, i, c);
                const int src_ch = site_channel(pattern, i + 1, c);
                work(i, c, dst_ch) = img(src_row, c, src_ch);
            }
        }
    }

    // Re-mosaic (overwritten channel at swapped sites, original elsewhere)
    // and re-reconstruct each touched band in place.
    const CfaImage cfa = mosaic(work, pattern);
    RgbImage out = img;
    for (const StripSpec& strip : plan.strips) {
        const int band_begin = std::max(0, strip.start_row - 1);
        const int band_end = std::min(h, strip.end_row);
        demosaic_rows(cfa, band_begin, band_end, out);
    }
    return out;
}

}  // namespace esia
