// esia - simulate electromagnetic-interference color strips on RGB images,
// generate attacked datasets with provenance manifests, and aggregate
// degradation statistics from metric tables.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "esia/attack.hpp"
#include "esia/dataset.hpp"
#include "esia/error.hpp"
#include "esia/image.hpp"
#include "esia/packet.hpp"
#include "esia/stats.hpp"
#include "esia/verify.hpp"

namespace {

using esia::Error;
using esia::ErrorKind;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitGeneration = 3;
constexpr int kExitMismatch = 4;

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::NotFound:
        case ErrorKind::UnsupportedFormat:
        case ErrorKind::CorruptFile:
        case ErrorKind::ParseError:
        case ErrorKind::MissingField:
        case ErrorKind::DuplicateKey:
            return kExitInput;
        case ErrorKind::InvalidArgument:
        case ErrorKind::InvalidConfig:
        case ErrorKind::OutOfRange:
            return kExitUsage;
        default:
            return kExitGeneration;
    }
}

std::vector<esia::StripSpec> parse_strips_flag(const std::string& text) {
    std::vector<esia::StripSpec> strips;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string part =
            text.substr(pos, comma == std::string::npos ? std::string::npos
                                                        : comma - pos);
        const std::size_t dash = part.find('-');
        if (dash == std::string::npos) {
            esia::raise(ErrorKind::InvalidArgument,
                        "--strips entry '" + part + "' is not START-END");
        }
        try {
            strips.push_back(esia::StripSpec{std::stoi(part.substr(0, dash)),
                                             std::stoi(part.substr(dash + 1))});
        } catch (const std::exception&) {
            esia::raise(ErrorKind::InvalidArgument,
                        "--strips entry '" + part + "' is not START-END");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (strips.empty()) {
        esia::raise(ErrorKind::InvalidArgument, "--strips is empty");
    }
    std::sort(strips.begin(), strips.end(),
              [](const esia::StripSpec& a, const esia::StripSpec& b) {
                  return a.start_row < b.start_row;
              });
    return strips;
}

esia::SeverityLevel severity_for_count(std::size_t count) {
    if (count == 0) return esia::SeverityLevel::Unattacked;
    if (count <= 6) return esia::SeverityLevel::Mild;
    if (count <= 12) return esia::SeverityLevel::Moderate;
    return esia::SeverityLevel::Severe;
}

struct AttackArgs {
    std::string input;
    std::string output;
    std::string severity;
    std::string strips;
    std::optional<std::uint64_t> seed;
    std::string engine = "swap";
    std::string pattern = "rggb";
};

int run_attack(const AttackArgs& args) {
    const auto pattern = esia::parse_bayer_pattern(args.pattern);
    const auto engine = esia::parse_engine(args.engine);

    const esia::RgbImage img = esia::load_image(args.input);

    esia::AttackPlan plan;
    plan.image_width = img.width();
    plan.image_height = img.height();
    if (!args.strips.empty()) {
        plan.strips = parse_strips_flag(args.strips);
        plan.seed = args.seed.value_or(0);
        plan.severity = args.severity.empty()
                            ? severity_for_count(plan.strips.size())
                            : esia::parse_severity(args.severity);
        esia::validate_plan(plan, /*enforce_count_range=*/false);
    } else {
        if (args.severity.empty()) {
            esia::raise(ErrorKind::InvalidArgument,
                        "either --severity or --strips is required");
        }
        if (!args.seed) {
            esia::raise(ErrorKind::InvalidArgument,
                        "--seed is required when sampling strips");
        }
        plan = esia::sample_plan(esia::parse_severity(args.severity),
                                 img.width(), img.height(), *args.seed);
    }

    const esia::RgbImage attacked =
        engine == esia::AttackEngine::Swap
            ? esia::apply_swap(img, plan, pattern)
            : esia::simulate_packet_loss(img, plan, pattern);
    esia::save_image(attacked, args.output);

    nlohmann::ordered_json sidecar;
    sidecar["source"] = args.input;
    sidecar["output"] = args.output;
    sidecar["severity"] = esia::to_string(plan.severity);
    sidecar["seed"] = plan.seed;
    nlohmann::ordered_json strips = nlohmann::ordered_json::array();
    for (const esia::StripSpec& s : plan.strips) {
        strips.push_back({{"start_row", s.start_row}, {"end_row", s.end_row}});
    }
    sidecar["strips"] = std::move(strips);
    sidecar["width"] = img.width();
    sidecar["height"] = img.height();
    sidecar["engine"] = esia::to_string(engine);
    sidecar["pattern"] = esia::to_string(pattern);

    std::ofstream side(args.output + ".json");
    if (!side) {
        esia::raise(ErrorKind::IoError, "cannot write " + args.output + ".json");
    }
    side << sidecar.dump(2) << "\n";
    return kExitOk;
}

struct BatchArgs {
    std::string corpus;
    std::string attributes;
    std::string out;
    std::uint64_t seed = 0;
    std::string engine = "swap";
    std::string pattern = "rggb";
    int jobs = 1;
    int min_images = 1;
};

int run_batch(const BatchArgs& args) {
    esia::GenerateOptions options;
    options.corpus_dir = args.corpus;
    options.attributes_file = args.attributes;
    options.out_dir = args.out;
    options.master_seed = args.seed;
    options.engine = esia::parse_engine(args.engine);
    options.pattern = esia::parse_bayer_pattern(args.pattern);
    options.filter.min_images = args.min_images;
    options.jobs = args.jobs;

    const esia::GenerateResult result = esia::generate(options);
    std::fprintf(stderr, "%zu images, %zu records, %zu failures\n",
                 result.images_processed, result.records_written,
                 result.failures);
    return kExitOk;
}

struct VerifyArgs {
    std::string manifest;
    std::string corpus;
    std::string out;
    std::string original;
    std::string attacked;
    std::string plan;
};

esia::AttackPlan plan_from_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) esia::raise(ErrorKind::NotFound, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        esia::raise(ErrorKind::ParseError, path + ": " + e.what());
    }
    esia::AttackPlan plan;
    try {
        plan.severity = esia::parse_severity(j.at("severity").get<std::string>());
        plan.seed = j.at("seed").get<std::uint64_t>();
        plan.image_width = j.at("width").get<int>();
        plan.image_height = j.at("height").get<int>();
        for (const auto& s : j.at("strips")) {
            plan.strips.push_back(esia::StripSpec{
                s.at("start_row").get<int>(), s.at("end_row").get<int>()});
        }
    } catch (const nlohmann::json::exception& e) {
        esia::raise(ErrorKind::MissingField, path + ": " + e.what());
    }
    return plan;
}

int run_verify(const VerifyArgs& args) {
    if (!args.manifest.empty()) {
        std::ifstream in(args.manifest);
        if (!in) {
            esia::raise(ErrorKind::NotFound, "cannot open " + args.manifest);
        }
        std::size_t total = 0, matched = 0, mismatched = 0, skipped = 0;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const esia::ManifestRecord record = esia::record_from_json(line);
            ++total;
            if (record.error) {
                ++skipped;
                continue;
            }
            bool ok = false;
            try {
                const auto original = esia::load_image(
                    std::filesystem::path(args.corpus) / record.source);
                const auto attacked = esia::load_image(
                    std::filesystem::path(args.out) / record.output);
                esia::AttackPlan plan;
                plan.severity = record.severity;
                plan.seed = record.seed;
                plan.strips = record.strips;
                plan.image_width = record.width;
                plan.image_height = record.height;
                ok = esia::verify_against_original(original, attacked, plan)
                         .matched;
            } catch (const Error& e) {
                std::fprintf(stderr, "%s: %s\n", record.output.c_str(), e.what());
                ok = false;
            }
            if (ok) {
                ++matched;
            } else {
                ++mismatched;
                std::fprintf(stderr, "mismatch: %s (%s)\n",
                             record.output.c_str(), record.group.c_str());
            }
        }
        nlohmann::ordered_json summary;
        summary["records"] = total;
        summary["matched"] = matched;
        summary["mismatched"] = mismatched;
        summary["skipped_failed"] = skipped;
        std::cout << summary.dump() << "\n";
        return mismatched == 0 ? kExitOk : kExitMismatch;
    }

    if (args.original.empty() || args.attacked.empty()) {
        esia::raise(ErrorKind::InvalidArgument,
                    "verify needs --manifest or --original/--attacked");
    }
    const auto original = esia::load_image(args.original);
    const auto attacked = esia::load_image(args.attacked);
    esia::AttackPlan plan;
    plan.image_width = original.width();
    plan.image_height = original.height();
    if (!args.plan.empty()) plan = plan_from_sidecar(args.plan);
    const esia::DetectionReport report =
        esia::verify_against_original(original, attacked, plan);
    std::cout << esia::report_to_json(report) << "\n";
    return report.matched ? kExitOk : kExitMismatch;
}

struct StatsArgs {
    std::string metrics;
    std::string out;
    std::vector<std::string> ttest;
    std::string variant = "welch";
};

int run_stats(const StatsArgs& args) {
    if (!args.metrics.empty()) {
        if (args.out.empty()) {
            esia::raise(ErrorKind::InvalidArgument,
                        "--out is required with --metrics");
        }
        const esia::MetricsTable table = esia::load_metrics_csv(args.metrics);
        esia::emit_reports(table, args.out);
    }
    if (!args.ttest.empty()) {
        const auto a = esia::load_sample_file(args.ttest[0]);
        const auto b = esia::load_sample_file(args.ttest[1]);
        const auto variant = args.variant == "pooled"
                                 ? esia::TTestVariant::Pooled
                                 : esia::TTestVariant::Welch;
        const esia::TTestResult r = esia::ttest_two_sample(a, b, variant);
        nlohmann::ordered_json j;
        j["t_statistic"] = r.t_statistic;
        j["degrees_of_freedom"] = r.degrees_of_freedom;
        j["p_value"] = r.p_value;
        j["significant_at_5pct"] = r.significant_at_5pct;
        if (r.degenerate) j["degenerate"] = true;
        std::cout << j.dump() << "\n";
    }
    if (args.metrics.empty() && args.ttest.empty()) {
        esia::raise(ErrorKind::InvalidArgument,
                    "stats needs --metrics and/or --ttest");
    }
    return kExitOk;
}

struct InspectArgs {
    std::string input;
    double threshold = 0.5;
};

int run_inspect(const InspectArgs& args) {
    const esia::RgbImage img = esia::load_image(args.input);
    const esia::DetectionReport report =
        esia::detect_heuristic(img, args.threshold);
    std::cout << esia::report_to_json(report) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Color-strip attack simulation and evaluation toolkit"};
    app.require_subcommand(1);

    AttackArgs attack_args;
    auto* attack = app.add_subcommand(
        "attack", "Corrupt a single image with sampled or explicit strips");
    attack->add_option("--input", attack_args.input, "Input image (PNG or P6)")
        ->required();
    attack->add_option("--output", attack_args.output, "Output image path")
        ->required();
    attack->add_option("--severity", attack_args.severity,
                       "mild|moderate|severe");
    attack->add_option("--strips", attack_args.strips,
                       "Explicit strips \"s0-e0,s1-e1,...\" (end exclusive); "
                       "overrides sampling");
    attack->add_option("--seed", attack_args.seed, "Plan seed (required "
                       "unless --strips is given)");
    attack->add_option("--engine", attack_args.engine, "swap|packet");
    attack->add_option("--pattern", attack_args.pattern,
                       "rggb|grbg|gbrg|bggr");

    BatchArgs batch_args;
    auto* batch = app.add_subcommand(
        "batch", "Generate an attacked dataset with a provenance manifest");
    batch->add_option("--corpus", batch_args.corpus, "Corpus root directory")
        ->required();
    batch->add_option("--attributes", batch_args.attributes,
                      "JSON attributes file")
        ->required();
    batch->add_option("--out", batch_args.out, "Output directory")->required();
    batch->add_option("--seed", batch_args.seed, "Master seed")->required();
    batch->add_option("--engine", batch_args.engine, "swap|packet");
    batch->add_option("--pattern", batch_args.pattern, "rggb|grbg|gbrg|bggr");
    batch->add_option("--jobs", batch_args.jobs, "Worker threads");
    batch->add_option("--min-images", batch_args.min_images,
                      "Drop subcategories smaller than this");

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand(
        "verify", "Check attacked outputs against their recorded plans");
    verify->add_option("--manifest", verify_args.manifest, "manifest.jsonl");
    verify->add_option("--corpus", verify_args.corpus,
                       "Corpus root for manifest sources");
    verify->add_option("--out", verify_args.out,
                       "Output root for manifest outputs");
    verify->add_option("--original", verify_args.original,
                       "Single mode: original image");
    verify->add_option("--attacked", verify_args.attacked,
                       "Single mode: attacked image");
    verify->add_option("--plan", verify_args.plan,
                       "Single mode: sidecar plan JSON");

    StatsArgs stats_args;
    auto* stats = app.add_subcommand(
        "stats", "Degradation aggregation reports and t-tests");
    stats->add_option("--metrics", stats_args.metrics, "Metrics CSV");
    stats->add_option("--out", stats_args.out, "Report output directory");
    stats->add_option("--ttest", stats_args.ttest,
                      "Two sample files (one value per line)")
        ->expected(2);
    stats->add_option("--variant", stats_args.variant, "welch|pooled");

    InspectArgs inspect_args;
    auto* inspect = app.add_subcommand(
        "inspect", "No-reference strip detection heuristic");
    inspect->add_option("--input", inspect_args.input, "Image to inspect")
        ->required();
    inspect->add_option("--threshold", inspect_args.threshold,
                        "Row score threshold in [0,1]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, returns 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(attack)) return run_attack(attack_args);
        if (app.got_subcommand(batch)) return run_batch(batch_args);
        if (app.got_subcommand(verify)) return run_verify(verify_args);
        if (app.got_subcommand(stats)) return run_stats(stats_args);
        if (app.got_subcommand(inspect)) return run_inspect(inspect_args);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitGeneration;
    }
    return kExitUsage;
}
