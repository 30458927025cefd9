#pragma once

#include <optional>
#include <string>
#include <vector>

#include "esia/attack.hpp"
#include "esia/image.hpp"

namespace esia {

struct DetectionReport {
    std::vector<StripSpec> detected_strips;
    std::vector<double> per_row_score;  // in [0,1]
    bool matched = false;               // meaningful only with a reference
    bool has_reference = false;
    std::vector<StripSpec> missed;
    std::vector<StripSpec> spurious;
};

/// Reference check: diffs the two images row by row, clusters changed rows
/// into maximal runs and matches them 1:1 against the plan's strips with
/// +/-1 row slack (the reconstruction bleed). matched == no missed and no
/// spurious runs.
DetectionReport verify_against_original(const RgbImage& original,
                                        const RgbImage& attacked,
                                        const AttackPlan& plan);

/// No-reference heuristic: scores each row pair (i, i+1) on the swap
/// signature - the R channel of row i tracking the G channel of row i+1
/// better than its own G, and likewise G against next-row B. Rows scoring
/// above `threshold` are clustered into strips. Best-effort inspection
/// only; recall depends on image chroma.
DetectionReport detect_heuristic(const RgbImage& attacked,
                                 double threshold = 0.5);

std::string report_to_json(const DetectionReport& report);

}  // namespace esia
