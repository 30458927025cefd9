#include "esia/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "esia/error.hpp"

namespace esia {

namespace {

std::vector<StripSpec> cluster_rows(const std::vector<bool>& flagged) {
    std::vector<StripSpec> runs;
    int start = -1;
    for (int r = 0; r <= static_cast<int>(flagged.size()); ++r) {
        const bool on = r < static_cast<int>(flagged.size()) && flagged[r];
        if (on && start < 0) {
            start = r;
        } else if (!on && start >= 0) {
            runs.push_back(StripSpec{start, r});
            start = -1;
        }
    }
    return runs;
}

}  // namespace

DetectionReport verify_against_original(const RgbImage& original,
                                        const RgbImage& attacked,
                                        const AttackPlan& plan) {
    if (original.width() != attacked.width() ||
        original.height() != attacked.height()) {
        raise(ErrorKind::DimensionMismatch,
              "original and attacked image sizes differ");
    }
    const int w = original.width();
    const int h = original.height();

    DetectionReport report;
    report.has_reference = true;
    report.per_row_score.resize(h, 0.0);
    std::vector<bool> changed(h, false);
    for (int r = 0; r < h; ++r) {
        long total_abs_diff = 0;
        for (int c = 0; c < w; ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                total_abs_diff += std::abs(static_cast<int>(original(r, c, ch)) -
                                           static_cast<int>(attacked(r, c, ch)));
            }
        }
        changed[r] = total_abs_diff != 0;
        report.per_row_score[r] =
            static_cast<double>(total_abs_diff) / (255.0 * 3.0 * w);
    }
    report.detected_strips = cluster_rows(changed);

    // 1:1 matching with +/-1 row slack on both boundaries.
    std::vector<bool> run_used(report.detected_strips.size(), false);
    for (const StripSpec& strip : plan.strips) {
        bool found = false;
        for (std::size_t i = 0; i < report.detected_strips.size(); ++i) {
            if (run_used[i]) continue;
            const StripSpec& run = report.detected_strips[i];
            if (std::abs(run.start_row - strip.start_row) <= 1 &&
                std::abs(run.end_row - strip.end_row) <= 1) {
                run_used[i] = true;
                found = true;
                break;
            }
        }
        if (!found) report.missed.push_back(strip);
    }
    for (std::size_t i = 0; i < report.detected_strips.size(); ++i) {
        if (!run_used[i]) report.spurious.push_back(report.detected_strips[i]);
    }
    report.matched = report.missed.empty() && report.spurious.empty();
    return report;
}

namespace {

// Pearson correlation of two channel slices over the columns of a row pair;
// 0 when either side is constant.
double row_corr(const RgbImage& img, int row_a, int ch_a, int row_b, int ch_b) {
    const int w = img.width();
    double sum_a = 0, sum_b = 0;
    for (int c = 0; c < w; ++c) {
        sum_a += img(row_a, c, ch_a);
        sum_b += img(row_b, c, ch_b);
    }
    const double mean_a = sum_a / w;
    const double mean_b = sum_b / w;
    double cov = 0, var_a = 0, var_b = 0;
    for (int c = 0; c < w; ++c) {
        const double da = img(row_a, c, ch_a) - mean_a;
        const double db = img(row_b, c, ch_b) - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0) return 0.0;
    return cov / std::sqrt(var_a * var_b);
}

}  // namespace

DetectionReport detect_heuristic(const RgbImage& attacked, double threshold) {
    const int h = attacked.height();
    DetectionReport report;
    report.per_row_score.resize(h, 0.0);

    constexpr int kR = 0, kG = 1, kB = 2;
    for (int r = 0; r + 1 < h; ++r) {
        const double r_next_g = row_corr(attacked, r, kR, r + 1, kG);
        const double r_own_g = row_corr(attacked, r, kR, r, kG);
        const double g_next_b = row_corr(attacked, r, kG, r + 1, kB);
        const double g_own_b = row_corr(attacked, r, kG, r, kB);
        const double evidence =
            std::max(r_next_g - r_own_g, g_next_b - g_own_b);
        report.per_row_score[r] = std::clamp(evidence, 0.0, 1.0);
    }

    std::vector<bool> flagged(h, false);
    for (int r = 0; r < h; ++r) flagged[r] = report.per_row_score[r] > threshold;
    report.detected_strips = cluster_rows(flagged);
    return report;
}

std::string report_to_json(const DetectionReport& report) {
    nlohmann::ordered_json j;
    auto strips_json = [](const std::vector<StripSpec>& strips) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const StripSpec& s : strips) {
            arr.push_back({{"start_row", s.start_row}, {"end_row", s.end_row}});
        }
        return arr;
    };
    j["detected_strips"] = strips_json(report.detected_strips);
    j["per_row_score"] = report.per_row_score;
    if (report.has_reference) {
        j["matched"] = report.matched;
        j["missed"] = strips_json(report.missed);
        j["spurious"] = strips_json(report.spurious);
    }
    return j.dump();
}

}  // namespace esia
