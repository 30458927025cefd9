#include "esia/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "esia/error.hpp"
#include "esia/image.hpp"
#include "esia/packet.hpp"
#include "esia/rng.hpp"

namespace esia {

namespace {

std::string lower_trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    s = s.substr(first, last - first + 1);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string triple_key(const ImageAttributes& a) {
    return a.weather + "|" + a.scene + "|" + a.timeofday;
}

}  // namespace

AttackEngine parse_engine(const std::string& name) {
    if (name == "swap") return AttackEngine::Swap;
    if (name == "packet") return AttackEngine::Packet;
    raise(ErrorKind::InvalidArgument, "unknown engine '" + name + "'");
}

std::string to_string(AttackEngine engine) {
    return engine == AttackEngine::Swap ? "swap" : "packet";
}

std::string record_to_json(const ManifestRecord& record) {
    nlohmann::ordered_json j;
    j["source"] = record.source;
    j["output"] = record.output;
    j["group"] = record.group;
    j["subcategory"] = record.subcategory;
    j["severity"] = to_string(record.severity);
    j["seed"] = record.seed;
    nlohmann::ordered_json strips = nlohmann::ordered_json::array();
    for (const StripSpec& s : record.strips) {
        strips.push_back({{"start_row", s.start_row}, {"end_row", s.end_row}});
    }
    j["strips"] = std::move(strips);
    j["width"] = record.width;
    j["height"] = record.height;
    j["engine"] = to_string(record.engine);
    if (record.error) j["error"] = *record.error;
    return j.dump();
}

ManifestRecord record_from_json(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::ParseError, std::string("bad manifest line: ") + e.what());
    }
    ManifestRecord r;
    try {
        r.source = j.at("source").get<std::string>();
        r.output = j.at("output").get<std::string>();
        r.group = j.at("group").get<std::string>();
        r.subcategory = j.at("subcategory").get<std::string>();
        r.severity = parse_severity(j.at("severity").get<std::string>());
        r.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& s : j.at("strips")) {
            r.strips.push_back(StripSpec{s.at("start_row").get<int>(),
                                         s.at("end_row").get<int>()});
        }
        r.width = j.at("width").get<int>();
        r.height = j.at("height").get<int>();
        r.engine = parse_engine(j.at("engine").get<std::string>());
        if (j.contains("error")) r.error = j.at("error").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::MissingField, std::string("manifest record: ") + e.what());
    }
    return r;
}

std::vector<ImageAttributes> ingest_attributes(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::NotFound, "cannot open " + path.string());

    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::ParseError,
              path.string() + ": invalid JSON: " + e.what());
    }
    if (!doc.is_array()) {
        raise(ErrorKind::ParseError, path.string() + ": expected a JSON array");
    }

    std::vector<ImageAttributes> items;
    items.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        auto missing = [&](const char* field) {
            raise(ErrorKind::MissingField,
                  path.string() + ": record " + std::to_string(i) +
                      " missing '" + field + "'");
        };
        if (!rec.is_object() || !rec.contains("name")) missing("name");
        if (!rec.contains("attributes") || !rec["attributes"].is_object()) {
            missing("attributes");
        }
        const auto& attrs = rec["attributes"];
        for (const char* field : {"weather", "scene", "timeofday"}) {
            if (!attrs.contains(field)) missing(field);
        }
        try {
            items.push_back(ImageAttributes{
                rec["name"].get<std::string>(),
                lower_trim(attrs["weather"].get<std::string>()),
                lower_trim(attrs["scene"].get<std::string>()),
                lower_trim(attrs["timeofday"].get<std::string>()),
            });
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorKind::ParseError,
                  path.string() + ": record " + std::to_string(i) + ": " +
                      e.what());
        }
    }
    return items;
}

std::map<std::string, SeverityLevel> partition_severity(
    const std::vector<ImageAttributes>& items, std::uint64_t seed) {
    std::map<std::string, std::vector<std::string>> by_triple;
    for (const ImageAttributes& item : items) {
        by_triple[triple_key(item)].push_back(item.name);
    }

    static constexpr SeverityLevel kDeal[4] = {
        SeverityLevel::Unattacked, SeverityLevel::Mild, SeverityLevel::Moderate,
        SeverityLevel::Severe};

    std::map<std::string, SeverityLevel> assignment;
    for (auto& [key, names] : by_triple) {
        std::sort(names.begin(), names.end());
        SplitMix64 rng(derive_seed(seed, key));
        rng.shuffle(names);
        for (std::size_t i = 0; i < names.size(); ++i) {
            assignment[names[i]] = kDeal[i % 4];
        }
    }
    return assignment;
}

namespace {

struct GroupMembership {
    const char* group;
    std::string subcategory;
};

struct WorkItem {
    ImageAttributes attrs;
    std::vector<GroupMembership> memberships;
    SeverityLevel severity = SeverityLevel::Unattacked;
    std::uint64_t seed = 0;
};

struct WorkResult {
    std::vector<StripSpec> strips;
    int width = 0;
    int height = 0;
    std::string output;  // relative output path
    std::optional<std::string> error;
};

std::string attribute_of(const ImageAttributes& a, const char* group) {
    if (std::string_view(group) == "weather") return a.weather;
    if (std::string_view(group) == "scene") return a.scene;
    return a.timeofday;
}

const std::set<std::string>& allow_list(const SubcategoryFilter& f,
                                        const char* group) {
    if (std::string_view(group) == "weather") return f.weather;
    if (std::string_view(group) == "scene") return f.scene;
    return f.timeofday;
}

std::string output_name_for(const std::string& source,
                            SeverityLevel severity) {
    if (severity == SeverityLevel::Unattacked) return source;  // byte copy
    std::filesystem::path p(source);
    p.replace_extension(".png");
    return p.generic_string();
}

WorkResult process_image(const GenerateOptions& options, const WorkItem& item) {
    WorkResult result;
    result.output = output_name_for(item.attrs.name, item.severity);
    const auto src_path = options.corpus_dir / item.attrs.name;
    const auto out_path = options.out_dir / result.output;

    try {
        const RgbImage img = load_image(src_path);
        result.width = img.width();
        result.height = img.height();
        std::filesystem::create_directories(out_path.parent_path());

        if (item.severity == SeverityLevel::Unattacked) {
            std::filesystem::copy_file(
                src_path, out_path,
                std::filesystem::copy_options::overwrite_existing);
            return result;
        }

        const AttackPlan plan =
            sample_plan(item.severity, img.width(), img.height(), item.seed,
                        options.sampler);
        result.strips = plan.strips;
        const RgbImage attacked =
            options.engine == AttackEngine::Swap
                ? apply_swap(img, plan, options.pattern)
                : simulate_packet_loss(img, plan, options.pattern);
        save_image(attacked, out_path);
    } catch (const Error& e) {
        result.error = e.what();
    } catch (const std::filesystem::filesystem_error& e) {
        result.error = e.what();
    }
    return result;
}

}  // namespace

GenerateResult generate(const GenerateOptions& options) {
    const auto all_items = ingest_attributes(options.attributes_file);
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec || !std::filesystem::is_directory(options.out_dir)) {
        raise(ErrorKind::IoError,
              "cannot create output directory " + options.out_dir.string());
    }

    // Group memberships, with small subcategories dropped per group.
    std::map<std::pair<std::string, std::string>, int> subcategory_sizes;
    for (const ImageAttributes& a : all_items) {
        for (const char* group : kGroupNames) {
            const std::string value = attribute_of(a, group);
            if (allow_list(options.filter, group).count(value)) {
                ++subcategory_sizes[{group, value}];
            }
        }
    }

    std::vector<WorkItem> work;
    std::vector<ImageAttributes> working_set;
    for (const ImageAttributes& a : all_items) {
        WorkItem item;
        item.attrs = a;
        for (const char* group : kGroupNames) {
            const std::string value = attribute_of(a, group);
            if (allow_list(options.filter, group).count(value) &&
                subcategory_sizes[{group, value}] >= options.filter.min_images) {
                item.memberships.push_back(GroupMembership{group, value});
            }
        }
        if (!item.memberships.empty()) {
            work.push_back(std::move(item));
            working_set.push_back(a);
        }
    }
    std::sort(work.begin(), work.end(), [](const WorkItem& x, const WorkItem& y) {
        return x.attrs.name < y.attrs.name;
    });

    const auto severities = partition_severity(working_set, options.master_seed);
    for (WorkItem& item : work) {
        item.severity = severities.at(item.attrs.name);
        item.seed = derive_seed(options.master_seed, item.attrs.name);
    }

    // Images are independent; output bytes cannot depend on scheduling.
    std::vector<WorkResult> results(work.size());
    const int jobs = std::max(1, options.jobs);
    if (jobs == 1 || work.size() <= 1) {
        for (std::size_t i = 0; i < work.size(); ++i) {
            results[i] = process_image(options, work[i]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int n_threads = std::min<std::size_t>(jobs, work.size());
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= work.size()) return;
                    results[i] = process_image(options, work[i]);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    GenerateResult summary_out;
    summary_out.manifest_path = options.out_dir / "manifest.jsonl";
    summary_out.summary_path = options.out_dir / "summary.json";
    summary_out.images_processed = work.size();

    std::ofstream manifest(summary_out.manifest_path);
    if (!manifest) {
        raise(ErrorKind::IoError,
              "cannot write " + summary_out.manifest_path.string());
    }

    // group -> subcategory -> severity -> count
    std::map<std::string, std::map<std::string, std::map<std::string, int>>>
        counts;
    std::map<std::string, int> group_totals;
    std::size_t failures = 0;

    for (std::size_t i = 0; i < work.size(); ++i) {
        const WorkItem& item = work[i];
        const WorkResult& r = results[i];
        if (r.error) ++failures;
        for (const GroupMembership& m : item.memberships) {
            ManifestRecord record;
            record.source = item.attrs.name;
            record.output = r.output;
            record.group = m.group;
            record.subcategory = m.subcategory;
            record.severity = item.severity;
            record.seed = item.seed;
            record.strips = r.strips;
            record.width = r.width;
            record.height = r.height;
            record.engine = options.engine;
            record.error = r.error;
            manifest << record_to_json(record) << "\n";
            ++summary_out.records_written;
            if (!r.error) {
                ++counts[m.group][m.subcategory][to_string(item.severity)];
                ++group_totals[m.group];
            }
        }
    }
    manifest.close();
    summary_out.failures = failures;

    nlohmann::ordered_json summary;
    summary["images"] = work.size();
    summary["failures"] = failures;
    nlohmann::ordered_json groups_json;
    for (const char* group : kGroupNames) {
        nlohmann::ordered_json group_json;
        for (const auto& [subcategory, by_severity] : counts[group]) {
            nlohmann::ordered_json sub_json;
            int total = 0;
            for (const char* sev : {"unattacked", "mild", "moderate", "severe"}) {
                const auto it = by_severity.find(sev);
                const int n = it == by_severity.end() ? 0 : it->second;
                sub_json[sev] = n;
                total += n;
            }
            sub_json["total"] = total;
            group_json[subcategory] = std::move(sub_json);
        }
        group_json["total"] = group_totals[group];
        groups_json[group] = std::move(group_json);
    }
    summary["groups"] = std::move(groups_json);

    std::ofstream summary_file(summary_out.summary_path);
    if (!summary_file) {
        raise(ErrorKind::IoError,
              "cannot write " + summary_out.summary_path.string());
    }
    summary_file << summary.dump(2) << "\n";
    return summary_out;
}

}  // namespace esia
