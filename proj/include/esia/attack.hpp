#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esia/bayer.hpp"
#include "esia/image.hpp"

namespace esia {

/// Attack intensity class, defined by how many color strips it produces.
enum class SeverityLevel { Unattacked, Mild, Moderate, Severe };

struct StripCountRange {
    int min = 0;
    int max = 0;
};

/// Mild 1-6, Moderate 7-12, Severe 13-20, Unattacked 0.
StripCountRange strip_count_range(SeverityLevel severity);

SeverityLevel parse_severity(const std::string& name);
std::string to_string(SeverityLevel severity);

/// Half-open row range [start_row, end_row) of one corrupted band.
/// Starts on an even row and spans at least two rows, so every strip covers
/// whole Bayer quads.
struct StripSpec {
    int start_row = 0;
    int end_row = 0;

    int height() const noexcept { return end_row - start_row; }
    bool operator==(const StripSpec&) const = default;
};

/// Full provenance of one attack: what was hit, how hard, and the seed that
/// reproduces it.
struct AttackPlan {
    SeverityLevel severity = SeverityLevel::Unattacked;
    std::uint64_t seed = 0;
    std::vector<StripSpec> strips;
    int image_width = 0;
    int image_height = 0;
};

/// Validates strip geometry against `height`: in-bounds, even starts,
/// height >= 2, sorted, and at least two clean rows between strips. Throws
/// InvalidArgument on violation. Count-vs-severity is checked only when
/// `enforce_count_range` (explicit CLI plans bypass it).
void validate_strips(const std::vector<StripSpec>& strips, int height);
void validate_plan(const AttackPlan& plan, bool enforce_count_range = true);

struct SamplerConfig {
    int min_strip_height = 4;   // even, >= 2
    int max_strip_height = 32;  // even, >= min
    int max_placement_attempts = 1000;
};

/// Draws a plan for the given severity: strip count uniform over the
/// severity range, heights uniform over [min,max] rounded down to even,
/// positions uniform over feasible even start rows by rejection (largest
/// strip placed first). Fully determined by the arguments. Throws
/// ImageTooSmall when the drawn strips provably cannot fit or placement
/// exhausts the attempt budget; the count is never silently reduced.
AttackPlan sample_plan(SeverityLevel severity, int width, int height,
                       std::uint64_t seed, const SamplerConfig& config = {});

/// Fast simulation path: per-site channel swaps on the virtual CFA view of
/// `img`, then bilinear re-reconstruction of the touched band. Within each
/// strip, rows [start, end-1) take the next row's sample for their site
/// channel; the final strip row is the resync row and keeps its own
/// samples, mirroring the packet mechanism. Rows outside strips +/-1 are
/// byte-identical to the input.
RgbImage apply_swap(const RgbImage& img, const AttackPlan& plan,
                    BayerPattern pattern = BayerPattern::RGGB);

}  // namespace esia
