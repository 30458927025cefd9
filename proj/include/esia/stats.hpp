#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace esia {

enum class MetricKind { mAP50, mAP75, mAP50_95, mIoU };

MetricKind parse_metric(const std::string& name);
std::string to_string(MetricKind metric);

/// One row of ingested evaluation results: a model's metric under the four
/// attack conditions for one subcategory.
struct MetricsRow {
    std::string group;
    std::string subcategory;
    std::string model;
    MetricKind metric = MetricKind::mAP50;
    double no_attack = 0.0;
    double mild = 0.0;
    double moderate = 0.0;
    double severe = 0.0;
};

struct MetricsTable {
    std::vector<MetricsRow> rows;
};

/// CSV columns, exactly: group,subcategory,model,metric,no_attack,mild,
/// moderate,severe. Header required, UTF-8, '.' decimals.
MetricsTable load_metrics_csv(const std::filesystem::path& path);
void save_metrics_csv(const MetricsTable& table,
                      const std::filesystem::path& path);

/// Signed percentage change versus the no-attack baseline (negative =
/// loss). Throws ZeroBaseline when no_attack <= 0.
double degradation(double no_attack, double attacked);

/// Per-severity degradation triple for one aggregate.
struct SeverityTriple {
    double mild = 0.0;
    double moderate = 0.0;
    double severe = 0.0;
};

struct DsEntry {
    std::string group;
    std::string subcategory;
    SeverityTriple values;
};

struct DmEntry {
    std::string model;
    std::string group;
    SeverityTriple values;
};

/// Degradation averaged across models, per (subcategory, severity).
/// Throws MissingModel when a subcategory lacks a model present elsewhere.
std::vector<DsEntry> compute_ds(const MetricsTable& table, MetricKind metric);

/// Degradation averaged across a group's subcategories, per (model, group,
/// severity).
std::vector<DmEntry> compute_dm(const MetricsTable& table, MetricKind metric);

struct TTestResult {
    double t_statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
    bool significant_at_5pct = false;
    bool degenerate = false;  // both variances zero with unequal means
};

enum class TTestVariant { Welch, Pooled };

/// Two-sided two-sample t-test, Welch by default. Identical samples give
/// t = 0, p = 1 exactly. Both variances zero with unequal means yields the
/// degenerate p = 0 convention. Throws InsufficientData when a sample has
/// fewer than two values (and the samples are not identical).
TTestResult ttest_two_sample(const std::vector<double>& sample_a,
                             const std::vector<double>& sample_b,
                             TTestVariant variant = TTestVariant::Welch);

/// Plain-text sample file for the CLI t-test: one value per line, blank
/// lines and '#' comments skipped.
std::vector<double> load_sample_file(const std::filesystem::path& path);

/// Writes ds_report.csv / dm_report.csv plus aligned-text renderings
/// (ds_report.txt / dm_report.txt) for every metric present in the table.
void emit_reports(const MetricsTable& table,
                  const std::filesystem::path& out_dir);

}  // namespace esia
