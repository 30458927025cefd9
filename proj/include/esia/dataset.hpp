#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "esia/attack.hpp"

namespace esia {

/// One corpus entry from the attributes file (BDD100k label convention).
/// Values are lower-cased and trimmed; "undefined" is representable.
struct ImageAttributes {
    std::string name;  // relative path within the corpus
    std::string weather;
    std::string scene;
    std::string timeofday;
};

inline constexpr const char* kGroupNames[3] = {"weather", "scene", "timeofday"};

/// Allow-lists per environmental group. Defaults mirror the supported
/// driving-condition subcategories.
struct SubcategoryFilter {
    std::set<std::string> weather = {"overcast", "clear", "rainy", "snowy",
                                     "partly cloudy"};
    std::set<std::string> timeofday = {"daytime", "night", "dawn"};
    std::set<std::string> scene = {"city street", "highway", "residential"};
    int min_images = 1;  // subcategories with fewer images are dropped
};

enum class AttackEngine { Swap, Packet };

AttackEngine parse_engine(const std::string& name);
std::string to_string(AttackEngine engine);

/// One manifest line: an image's membership in one environmental group.
struct ManifestRecord {
    std::string source;  // relative to the corpus root
    std::string output;  // relative to the output root
    std::string group;
    std::string subcategory;
    SeverityLevel severity = SeverityLevel::Unattacked;
    std::uint64_t seed = 0;
    std::vector<StripSpec> strips;
    int width = 0;
    int height = 0;
    AttackEngine engine = AttackEngine::Swap;
    std::optional<std::string> error;
};

std::string record_to_json(const ManifestRecord& record);
ManifestRecord record_from_json(const std::string& line);

/// Parses the JSON attributes file: an array of {name, attributes:{weather,
/// scene, timeofday}} records. Extra keys are ignored. Throws ParseError /
/// MissingField naming the offending record index.
std::vector<ImageAttributes> ingest_attributes(
    const std::filesystem::path& path);

/// One severity per image. Images sharing the same full attribute triple
/// are ordered by name, shuffled with the pinned PRNG seeded from
/// derive_seed(seed, "weather|scene|timeofday"), and dealt round-robin to
/// Unattacked, Mild, Moderate, Severe; group sizes within a triple differ
/// by at most one.
std::map<std::string, SeverityLevel> partition_severity(
    const std::vector<ImageAttributes>& items, std::uint64_t seed);

struct GenerateOptions {
    std::filesystem::path corpus_dir;
    std::filesystem::path attributes_file;
    std::filesystem::path out_dir;
    std::uint64_t master_seed = 0;
    AttackEngine engine = AttackEngine::Swap;
    BayerPattern pattern = BayerPattern::RGGB;
    SubcategoryFilter filter;
    SamplerConfig sampler;
    int jobs = 1;
};

struct GenerateResult {
    std::filesystem::path manifest_path;
    std::filesystem::path summary_path;
    std::size_t images_processed = 0;
    std::size_t records_written = 0;
    std::size_t failures = 0;
};

/// Batch pipeline: filter, partition into severity groups, attack, and
/// write images plus manifest.jsonl and summary.json under out_dir.
/// Unattacked sources are copied bit-exactly. Per-image errors become
/// failed records instead of aborting; only an unreadable attributes file
/// or an unwritable out_dir is fatal. Output bytes are independent of
/// `jobs`.
GenerateResult generate(const GenerateOptions& options);

}  // namespace esia
