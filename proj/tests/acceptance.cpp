// Acceptance suite: runs every release criterion end to end and prints one
// PASS/FAIL line per criterion. Returns nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "esia/attack.hpp"
#include "esia/bayer.hpp"
#include "esia/dataset.hpp"
#include "esia/image.hpp"
#include "esia/packet.hpp"
#include "esia/stats.hpp"
#include "esia/verify.hpp"
#include "support.hpp"

using namespace esia;
using esia::testing::block_image;
using esia::testing::demosaic_stable;
using esia::testing::uniform_image;

namespace {

int g_failures = 0;

struct Criterion {
    int id;
    const char* title;
    std::chrono::steady_clock::time_point start;
    bool ok = true;
    std::string detail;

    Criterion(int id, const char* title)
        : id(id), title(title), start(std::chrono::steady_clock::now()) {}

    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }

    void finish() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        std::printf("%s criterion %d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL",
                    id, title, secs, detail.empty() ? "" : " - ",
                    detail.c_str());
        if (!ok) ++g_failures;
    }
};

const std::filesystem::path kDataDir = ESIA_TEST_DATA_DIR;

// Published aggregate tables, 2-decimal percent values.
// Columns: detection mild/moderate/severe, segmentation mild/moderate/severe.
struct DsExpected {
    const char* group;
    const char* subcategory;
    double v[6];
};
const DsExpected kTable4[] = {
    {"weather", "clear", {-13.68, -41.43, -65.52, -2.05, -7.09, -12.69}},
    {"weather", "rainy", {-12.28, -36.93, -56.34, -1.03, -5.45, -10.95}},
    {"weather", "snowy", {-11.37, -33.55, -62.09, -3.08, -8.13, -13.41}},
    {"weather", "partly cloudy", {-13.97, -45.38, -66.47, -2.85, -7.63, -13.01}},
    {"weather", "overcast", {-10.28, -40.46, -64.20, -1.76, -6.53, -12.02}},
    {"scene", "highway", {-21.74, -52.65, -70.89, -2.68, -7.68, -13.73}},
    {"scene", "city street", {-10.29, -35.76, -59.29, -2.32, -7.15, -12.53}},
    {"scene", "residential", {-11.78, -37.76, -60.92, -1.82, -7.52, -13.03}},
    {"timeofday", "night", {-14.71, -39.06, -63.72, -2.02, -6.80, -11.76}},
    {"timeofday", "dawn", {-8.29, -44.03, -65.11, -1.15, -6.52, -12.08}},
    {"timeofday", "daytime", {-13.09, -39.77, -62.70, -2.42, -7.62, -13.08}},
};

struct DmExpected {
    const char* model;
    const char* group;
    double v[6];
};
const DmExpected kTable5[] = {
    {"HybridNets", "weather", {-13.09, -38.61, -64.45, -2.17, -6.89, -12.08}},
    {"HybridNets", "scene", {-15.26, -42.70, -65.00, -2.02, -7.32, -12.68}},
    {"HybridNets", "timeofday", {-12.57, -41.15, -65.21, -2.03, -7.24, -12.12}},
    {"A-YOLOM", "weather", {-11.06, -39.06, -60.95, -2.33, -7.76, -13.61}},
    {"A-YOLOM", "scene", {-13.36, -40.54, -61.59, -2.58, -8.11, -14.07}},
    {"A-YOLOM", "timeofday", {-11.55, -39.77, -61.89, -1.87, -7.04, -13.09}},
    {"YOLOP", "weather", {-12.80, -40.99, -63.37, -1.96, -6.25, -11.54}},
    {"YOLOP", "scene", {-15.20, -42.91, -64.51, -2.22, -6.92, -12.53}},
    {"YOLOP", "timeofday", {-11.97, -41.93, -64.43, -1.68, -6.66, -11.71}},
};

double triple_value(const SeverityTriple& t, int i) {
    return i == 0 ? t.mild : i == 1 ? t.moderate : t.severe;
}

void criterion_1_table4() {
    Criterion c(1, "D_S reproduces all published subcategory aggregates");
    const MetricsTable table = load_metrics_csv(kDataDir / "table3.csv");
    const auto ds_det = compute_ds(table, MetricKind::mAP50);
    const auto ds_seg = compute_ds(table, MetricKind::mIoU);
    int checked = 0;
    for (const DsExpected& row : kTable4) {
        for (int metric = 0; metric < 2; ++metric) {
            const auto& ds = metric == 0 ? ds_det : ds_seg;
            bool found = false;
            for (const DsEntry& e : ds) {
                if (e.subcategory != row.subcategory) continue;
                found = true;
                for (int s = 0; s < 3; ++s) {
                    const double got = triple_value(e.values, s);
                    const double want = row.v[metric * 3 + s];
                    if (std::fabs(got - want) >= 0.005) {
                        char buf[160];
                        std::snprintf(buf, sizeof buf,
                                      "%s/%s sev%d: %.4f vs %.2f",
                                      row.subcategory,
                                      metric == 0 ? "det" : "seg", s, got,
                                      want);
                        c.fail(buf);
                    }
                    ++checked;
                }
            }
            if (!found) c.fail(std::string("missing ") + row.subcategory);
        }
    }
    if (checked != 66) c.fail("expected 66 cells, checked " + std::to_string(checked));
    c.finish();
}

void criterion_2_table5() {
    Criterion c(2, "D_M reproduces all published model aggregates");
    const MetricsTable table = load_metrics_csv(kDataDir / "table3.csv");
    const auto dm_det = compute_dm(table, MetricKind::mAP50);
    const auto dm_seg = compute_dm(table, MetricKind::mIoU);
    int checked = 0;
    for (const DmExpected& row : kTable5) {
        for (int metric = 0; metric < 2; ++metric) {
            const auto& dm = metric == 0 ? dm_det : dm_seg;
            bool found = false;
            for (const DmEntry& e : dm) {
                if (e.model != row.model || e.group != row.group) continue;
                found = true;
                for (int s = 0; s < 3; ++s) {
                    const double got = triple_value(e.values, s);
                    const double want = row.v[metric * 3 + s];
                    if (std::fabs(got - want) >= 0.005) {
                        char buf[160];
                        std::snprintf(buf, sizeof buf,
                                      "%s/%s/%s sev%d: %.4f vs %.2f", row.model,
                                      row.group, metric == 0 ? "det" : "seg", s,
                                      got, want);
                        c.fail(buf);
                    }
                    ++checked;
                }
            }
            if (!found) c.fail(std::string("missing ") + row.model);
        }
    }
    if (checked != 54) c.fail("expected 54 cells, checked " + std::to_string(checked));
    c.finish();
}

void criterion_3_calibration() {
    Criterion c(3, "severity calibration: counts in range, near-uniform");
    const SeverityLevel levels[] = {SeverityLevel::Mild, SeverityLevel::Moderate,
                                    SeverityLevel::Severe};
    constexpr int kPlans = 10000;
    for (const SeverityLevel sev : levels) {
        const StripCountRange range = strip_count_range(sev);
        std::map<int, int> histogram;
        for (int i = 0; i < kPlans; ++i) {
            AttackPlan plan;
            try {
                plan = sample_plan(sev, 1280, 720,
                                   static_cast<std::uint64_t>(i) * 3 +
                                       static_cast<std::uint64_t>(sev));
            } catch (const Error& e) {
                c.fail(std::string("sampling failed: ") + e.what());
                break;
            }
            const int count = static_cast<int>(plan.strips.size());
            if (count < range.min || count > range.max) {
                c.fail("count " + std::to_string(count) + " outside range");
                break;
            }
            ++histogram[count];
        }
        if (!c.ok) break;
        const int values = range.max - range.min + 1;
        const double uniform = static_cast<double>(kPlans) / values;
        for (int count = range.min; count <= range.max; ++count) {
            const double freq = histogram[count];
            if (std::fabs(freq - uniform) > 0.2 * uniform) {
                c.fail("count " + std::to_string(count) + " frequency " +
                       std::to_string(freq) + " off uniform " +
                       std::to_string(uniform));
            }
        }
    }
    c.finish();
}

void criterion_4_oracle() {
    Criterion c(4, "swap and packet engines agree on piecewise-constant images");
    const BayerPattern patterns[] = {BayerPattern::RGGB, BayerPattern::GRBG,
                                     BayerPattern::GBRG, BayerPattern::BGGR};
    const SeverityLevel levels[] = {SeverityLevel::Mild, SeverityLevel::Moderate,
                                    SeverityLevel::Severe};
    for (std::uint64_t i = 0; i < 100 && c.ok; ++i) {
        const BayerPattern pattern = patterns[i % 4];
        const int block = 8 << (i % 3);  // 8, 16, 32
        const RgbImage img =
            demosaic_stable(block_image(64, 720, block, i + 1), pattern);
        const AttackPlan plan =
            sample_plan(levels[i % 3], 64, 720, i * 131 + 9);
        const RgbImage a = apply_swap(img, plan, pattern);
        const RgbImage b = simulate_packet_loss(img, plan, pattern);

        auto strip_of = [&](int row) -> const StripSpec* {
            for (const StripSpec& s : plan.strips) {
                if (row >= s.start_row && row < s.end_row) return &s;
            }
            return nullptr;
        };
        for (int r = 0; r < 720 && c.ok; ++r) {
            const StripSpec* strip = strip_of(r);
            const bool interior =
                strip && r > strip->start_row && r < strip->end_row - 1;
            for (int col = 0; col < 64; ++col) {
                for (int ch = 0; ch < 3; ++ch) {
                    const int diff = std::abs(static_cast<int>(a(r, col, ch)) -
                                              static_cast<int>(b(r, col, ch)));
                    if (strip == nullptr && diff != 0) {
                        c.fail("outside-strip byte mismatch at row " +
                               std::to_string(r));
                    } else if (interior && diff > 2) {
                        c.fail("interior diff " + std::to_string(diff) +
                               " at row " + std::to_string(r));
                    }
                }
            }
        }
    }
    c.finish();
}

int run_cli(const std::string& bin, const std::string& args,
            const std::filesystem::path& scratch) {
    const std::string cmd = bin + " " + args + " > " +
                            (scratch / "stdout.txt").string() + " 2> " +
                            (scratch / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void make_batch_corpus(const std::filesystem::path& corpus, int count) {
    std::filesystem::create_directories(corpus);
    nlohmann::json attrs = nlohmann::json::array();
    const char* weathers[] = {"clear", "rainy"};
    const char* scenes[] = {"highway", "city street"};
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "img_%03d.png", i);
        save_image(block_image(64, 720, 8, 9000 + i), corpus / name);
        attrs.push_back({{"name", name},
                         {"attributes",
                          {{"weather", weathers[i % 2]},
                           {"scene", scenes[(i / 2) % 2]},
                           {"timeofday", "night"}}}});
    }
    std::ofstream out(corpus / "attributes.json");
    out << attrs.dump();
}

void criterion_5_closed_loop(const std::string& bin,
                             const std::filesystem::path& scratch) {
    Criterion c(5, "batch closed loop; any tampered output fails verify");
    const auto corpus = scratch / "c5_corpus";
    const auto out = scratch / "c5_out";
    make_batch_corpus(corpus, 64);

    if (run_cli(bin,
                "batch --corpus " + corpus.string() + " --attributes " +
                    (corpus / "attributes.json").string() + " --out " +
                    out.string() + " --seed 2024",
                scratch) != 0) {
        c.fail("batch run failed");
        c.finish();
        return;
    }
    const std::string verify_cmd =
        "verify --manifest " + (out / "manifest.jsonl").string() +
        " --corpus " + corpus.string() + " --out " + out.string();
    if (run_cli(bin, verify_cmd, scratch) != 0) {
        c.fail("fresh batch did not verify clean");
        c.finish();
        return;
    }

    // tamper every output once, one at a time
    std::vector<ManifestRecord> records;
    {
        std::ifstream in(out / "manifest.jsonl");
        std::string line;
        std::map<std::string, bool> seen;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const ManifestRecord r = record_from_json(line);
            if (!seen[r.output]) {
                seen[r.output] = true;
                records.push_back(r);
            }
        }
    }
    if (records.size() != 64) {
        c.fail("expected 64 distinct outputs, got " +
               std::to_string(records.size()));
    }
    for (const ManifestRecord& r : records) {
        if (!c.ok) break;
        const auto path = out / r.output;
        const std::string pristine = file_bytes(path);
        RgbImage img = load_image(path);
        // flip one pixel in a row well clear of every strip
        int victim = -1;
        for (int row = 0; row < img.height() && victim < 0; ++row) {
            bool clear = true;
            for (const StripSpec& s : r.strips) {
                if (row >= s.start_row - 2 && row < s.end_row + 2) clear = false;
            }
            if (clear) victim = row;
        }
        if (victim < 0) {
            c.fail("no tamperable row in " + r.output);
            break;
        }
        img(victim, 3, 1) ^= 0x40;
        save_image(img, path);
        if (run_cli(bin, verify_cmd, scratch) != 4) {
            c.fail("tamper of " + r.output + " not detected");
        }
        std::ofstream restore(path, std::ios::binary);
        restore << pristine;
    }
    if (c.ok && run_cli(bin, verify_cmd, scratch) != 0) {
        c.fail("restore did not verify clean");
    }
    c.finish();
}

void criterion_6_determinism(const std::string& bin,
                             const std::filesystem::path& scratch) {
    Criterion c(6, "batch outputs are byte-identical across runs and --jobs");
    const auto corpus = scratch / "c6_corpus";
    make_batch_corpus(corpus, 24);
    const auto out1 = scratch / "c6_out1";
    const auto out2 = scratch / "c6_out2";
    const std::string base = "batch --corpus " + corpus.string() +
                             " --attributes " +
                             (corpus / "attributes.json").string() +
                             " --seed 777";
    if (run_cli(bin, base + " --out " + out1.string() + " --jobs 1", scratch) !=
            0 ||
        run_cli(bin, base + " --out " + out2.string() + " --jobs 8", scratch) !=
            0) {
        c.fail("batch run failed");
        c.finish();
        return;
    }
    if (file_bytes(out1 / "manifest.jsonl") != file_bytes(out2 / "manifest.jsonl")) {
        c.fail("manifests differ");
    }
    if (file_bytes(out1 / "summary.json") != file_bytes(out2 / "summary.json")) {
        c.fail("summaries differ");
    }
    std::ifstream in(out1 / "manifest.jsonl");
    std::string line;
    while (std::getline(in, line) && c.ok) {
        if (line.empty()) continue;
        const ManifestRecord r = record_from_json(line);
        if (file_bytes(out1 / r.output) != file_bytes(out2 / r.output)) {
            c.fail("output bytes differ for " + r.output);
        }
    }
    c.finish();
}

void criterion_7_identity() {
    Criterion c(7, "identity properties of both engines and the CFA round trip");
    // empty plans
    const RgbImage noise = esia::testing::random_image(64, 96, 5);
    AttackPlan empty;
    empty.image_width = 64;
    empty.image_height = 96;
    if (apply_swap(noise, empty) != noise) c.fail("swap empty plan changed bytes");
    if (simulate_packet_loss(noise, empty) != noise) {
        c.fail("packet empty plan changed bytes");
    }

    // uniform achromatic images under real plans
    for (const std::uint8_t v : {0, 63, 128, 255}) {
        const RgbImage gray = uniform_image(64, 720, v, v, v);
        const AttackPlan plan = sample_plan(SeverityLevel::Severe, 64, 720, v + 1);
        if (apply_swap(gray, plan) != gray) c.fail("swap changed a gray image");
        if (simulate_packet_loss(gray, plan) != gray) {
            c.fail("packet changed a gray image");
        }
    }

    // demosaic(mosaic(x)) == x on constant color images
    const BayerPattern patterns[] = {BayerPattern::RGGB, BayerPattern::GRBG,
                                     BayerPattern::GBRG, BayerPattern::BGGR};
    const std::uint8_t colors[][3] = {{200, 100, 10}, {0, 255, 0}, {7, 7, 7}};
    for (const auto& color : colors) {
        const RgbImage img = uniform_image(32, 24, color[0], color[1], color[2]);
        for (const BayerPattern p : patterns) {
            const RgbImage back = demosaic(mosaic(img, p));
            // borders replicate-pad across channels; the guarantee is interior
            for (int r = 1; r < 23 && c.ok; ++r) {
                for (int col = 1; col < 31; ++col) {
                    for (int ch = 0; ch < 3; ++ch) {
                        if (back(r, col, ch) != img(r, col, ch)) {
                            c.fail("constant image not a fixed point");
                        }
                    }
                }
            }
        }
    }
    c.finish();
}

// Student t density integrated by adaptive Simpson, independent of the
// incomplete-beta implementation under test.
double t_density(double x, double df) {
    const double ln_c = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                        0.5 * std::log(df * M_PI);
    return std::exp(ln_c - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(double a, double b, double fa, double fm, double fb,
                double whole, double eps, int depth, double df) {
    const double m = (a + b) / 2.0;
    const double lm = (a + m) / 2.0;
    const double rm = (m + b) / 2.0;
    const double flm = t_density(lm, df);
    const double frm = t_density(rm, df);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive(a, m, fa, flm, fm, left, eps / 2.0, depth - 1, df) +
           adaptive(m, b, fm, frm, fb, right, eps / 2.0, depth - 1, df);
}

double oracle_p(double t, double df) {
    const double hi = std::fabs(t);
    if (hi == 0.0) return 1.0;
    const double fa = t_density(0.0, df);
    const double fb = t_density(hi, df);
    const double fm = t_density(hi / 2.0, df);
    const double whole = simpson(0.0, hi, fa, fm, fb);
    return std::max(0.0, 1.0 - 2.0 * adaptive(0.0, hi, fa, fm, fb, whole, 1e-13,
                                              42, df));
}

void criterion_8_ttest() {
    Criterion c(8, "t-test: identical samples p=1; 200 pairs match the oracle");
    const std::vector<double> same = {0.12, 0.5, 0.33, 0.7};
    const TTestResult id = ttest_two_sample(same, same);
    if (id.p_value != 1.0 || id.t_statistic != 0.0) {
        c.fail("identical samples did not return t=0, p=1");
    }

    SplitMix64 rng(424242);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const int na = 3 + static_cast<int>(rng.bounded(25));
        const int nb = 3 + static_cast<int>(rng.bounded(25));
        std::vector<double> a(na), b(nb);
        const double offset = static_cast<double>(rng.bounded(300)) / 100.0;
        for (double& x : a) x = static_cast<double>(rng.bounded(10000)) / 997.0;
        for (double& x : b) {
            x = offset + static_cast<double>(rng.bounded(10000)) / 1003.0;
        }
        const TTestResult r = ttest_two_sample(a, b);
        worst = std::max(worst,
                         std::fabs(r.p_value - oracle_p(r.t_statistic,
                                                        r.degrees_of_freedom)));
    }
    if (worst >= 1e-9) {
        c.fail("worst oracle deviation " + std::to_string(worst));
    }
    c.finish();
}

void criterion_9_disclosure() {
    Criterion c(9, "raw model metrics enter as fixtures only (disclosure)");
    // The toolkit consumes per-model metric CSVs; it never runs detection or
    // segmentation models, so raw mAP/mIoU tables and per-model trend data
    // are inputs, not outputs. Nothing to execute beyond stating it.
    c.finish();
}

}  // namespace

int main() {
    const char* bin = std::getenv("ESIA_BIN");
    if (!bin) {
        std::fprintf(stderr, "ESIA_BIN must point at the CLI binary\n");
        return 2;
    }
    esia::testing::ScratchDir scratch("acceptance");

    criterion_1_table4();
    criterion_2_table5();
    criterion_3_calibration();
    criterion_4_oracle();
    criterion_5_closed_loop(bin, scratch.path());
    criterion_6_determinism(bin, scratch.path());
    criterion_7_identity();
    criterion_8_ttest();
    criterion_9_disclosure();

    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
