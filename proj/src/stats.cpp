#include "esia/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "esia/error.hpp"

namespace esia {

MetricKind parse_metric(const std::string& name) {
    if (name == "mAP50") return MetricKind::mAP50;
    if (name == "mAP75") return MetricKind::mAP75;
    if (name == "mAP50_95") return MetricKind::mAP50_95;
    if (name == "mIoU") return MetricKind::mIoU;
    raise(ErrorKind::ParseError, "unknown metric '" + name + "'");
}

std::string to_string(MetricKind metric) {
    switch (metric) {
        case MetricKind::mAP50: return "mAP50";
        case MetricKind::mAP75: return "mAP75";
        case MetricKind::mAP50_95: return "mAP50_95";
        case MetricKind::mIoU: return "mIoU";
    }
    return "mAP50";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_metric_value(const std::string& text, int line_no) {
    double value;
    try {
        std::size_t pos = 0;
        value = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        raise(ErrorKind::ParseError,
              "line " + std::to_string(line_no) + ": bad number '" + text + "'");
    }
    if (value < 0.0 || value > 1.0) {
        raise(ErrorKind::ParseError,
              "line " + std::to_string(line_no) + ": metric value " + text +
                  " outside [0,1]");
    }
    return value;
}

constexpr const char* kMetricsHeader =
    "group,subcategory,model,metric,no_attack,mild,moderate,severe";

}  // namespace

MetricsTable load_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::NotFound, "cannot open " + path.string());

    MetricsTable table;
    std::set<std::string> seen_keys;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (trim(line) != kMetricsHeader) {
                raise(ErrorKind::ParseError,
                      "line 1: expected header '" + std::string(kMetricsHeader) + "'");
            }
            continue;
        }
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 8) {
            raise(ErrorKind::ParseError,
                  "line " + std::to_string(line_no) + ": expected 8 fields, got " +
                      std::to_string(fields.size()));
        }
        MetricsRow row;
        row.group = trim(fields[0]);
        row.subcategory = trim(fields[1]);
        row.model = trim(fields[2]);
        row.metric = parse_metric(trim(fields[3]));
        row.no_attack = parse_metric_value(trim(fields[4]), line_no);
        row.mild = parse_metric_value(trim(fields[5]), line_no);
        row.moderate = parse_metric_value(trim(fields[6]), line_no);
        row.severe = parse_metric_value(trim(fields[7]), line_no);

        const std::string key = row.group + "\x1f" + row.subcategory + "\x1f" +
                                row.model + "\x1f" + to_string(row.metric);
        if (!seen_keys.insert(key).second) {
            raise(ErrorKind::DuplicateKey,
                  "line " + std::to_string(line_no) + ": duplicate row for (" +
                      row.group + ", " + row.subcategory + ", " + row.model +
                      ", " + to_string(row.metric) + ")");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void save_metrics_csv(const MetricsTable& table,
                      const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::IoError, "cannot write " + path.string());
    out << kMetricsHeader << "\n";
    char buf[64];
    for (const MetricsRow& row : table.rows) {
        out << row.group << ',' << row.subcategory << ',' << row.model << ','
            << to_string(row.metric);
        for (const double v : {row.no_attack, row.mild, row.moderate, row.severe}) {
            std::snprintf(buf, sizeof buf, "%.6g", v);
            out << ',' << buf;
        }
        out << "\n";
    }
}

double degradation(double no_attack, double attacked) {
    if (no_attack <= 0.0) {
        raise(ErrorKind::ZeroBaseline,
              "no-attack baseline must be positive, got " +
                  std::to_string(no_attack));
    }
    return 100.0 * (attacked - no_attack) / no_attack;
}

namespace {

// Preserves first-seen order so reports mirror the input table layout.
template <typename Key>
struct OrderedKeys {
    std::vector<Key> order;
    std::set<Key> seen;
    void add(const Key& k) {
        if (seen.insert(k).second) order.push_back(k);
    }
};

std::vector<MetricsRow> rows_for_metric(const MetricsTable& table,
                                        MetricKind metric) {
    std::vector<MetricsRow> rows;
    for (const MetricsRow& r : table.rows) {
        if (r.metric == metric) rows.push_back(r);
    }
    return rows;
}

void check_model_coverage(const std::vector<MetricsRow>& rows) {
    std::set<std::string> models;
    for (const MetricsRow& r : rows) models.insert(r.model);
    std::map<std::pair<std::string, std::string>, std::set<std::string>> per_sub;
    for (const MetricsRow& r : rows) {
        per_sub[{r.group, r.subcategory}].insert(r.model);
    }
    for (const auto& [key, present] : per_sub) {
        for (const std::string& model : models) {
            if (!present.count(model)) {
                raise(ErrorKind::MissingModel,
                      "subcategory '" + key.second + "' lacks model '" + model +
                          "'");
            }
        }
    }
}

}  // namespace

std::vector<DsEntry> compute_ds(const MetricsTable& table, MetricKind metric) {
    const auto rows = rows_for_metric(table, metric);
    check_model_coverage(rows);

    OrderedKeys<std::pair<std::string, std::string>> keys;
    std::map<std::pair<std::string, std::string>, std::vector<const MetricsRow*>>
        cells;
    for (const MetricsRow& r : rows) {
        const auto key = std::make_pair(r.group, r.subcategory);
        keys.add(key);
        cells[key].push_back(&r);
    }

    std::vector<DsEntry> result;
    for (const auto& key : keys.order) {
        const auto& members = cells[key];
        SeverityTriple t;
        for (const MetricsRow* r : members) {
            t.mild += degradation(r->no_attack, r->mild);
            t.moderate += degradation(r->no_attack, r->moderate);
            t.severe += degradation(r->no_attack, r->severe);
        }
        const double n = static_cast<double>(members.size());
        result.push_back(DsEntry{key.first, key.second,
                                 {t.mild / n, t.moderate / n, t.severe / n}});
    }
    return result;
}

std::vector<DmEntry> compute_dm(const MetricsTable& table, MetricKind metric) {
    const auto rows = rows_for_metric(table, metric);
    check_model_coverage(rows);

    OrderedKeys<std::pair<std::string, std::string>> keys;
    std::map<std::pair<std::string, std::string>, std::vector<const MetricsRow*>>
        cells;
    for (const MetricsRow& r : rows) {
        const auto key = std::make_pair(r.model, r.group);
        keys.add(key);
        cells[key].push_back(&r);
    }

    std::vector<DmEntry> result;
    for (const auto& key : keys.order) {
        const auto& members = cells[key];
        SeverityTriple t;
        for (const MetricsRow* r : members) {
            t.mild += degradation(r->no_attack, r->mild);
            t.moderate += degradation(r->no_attack, r->moderate);
            t.severe += degradation(r->no_attack, r->severe);
        }
        const double n = static_cast<double>(members.size());
        result.push_back(DmEntry{key.first, key.second,
                                 {t.mild / n, t.moderate / n, t.severe / n}});
    }
    return result;
}

// ---- t-test ----

namespace {

// Regularized incomplete beta I_x(a, b) by Lentz continued fraction.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                            std::lgamma(b) + a * std::log(x) +
                            b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (const double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TTestResult ttest_two_sample(const std::vector<double>& sample_a,
                             const std::vector<double>& sample_b,
                             TTestVariant variant) {
    TTestResult result;
    if (sample_a == sample_b) {
        if (sample_a.empty()) {
            raise(ErrorKind::InsufficientData, "empty samples");
        }
        result.t_statistic = 0.0;
        result.degrees_of_freedom = std::max<double>(
            static_cast<double>(sample_a.size() + sample_b.size() - 2), 1.0);
        result.p_value = 1.0;
        return result;
    }
    if (sample_a.size() < 2 || sample_b.size() < 2) {
        raise(ErrorKind::InsufficientData,
              "each sample needs >= 2 values (unless identical)");
    }

    const double na = static_cast<double>(sample_a.size());
    const double nb = static_cast<double>(sample_b.size());
    const double ma = mean_of(sample_a);
    const double mb = mean_of(sample_b);
    const double va = sample_variance(sample_a, ma);
    const double vb = sample_variance(sample_b, mb);

    if (va == 0.0 && vb == 0.0) {
        // Means must differ here (identical samples were handled above).
        result.t_statistic = ma > mb ? INFINITY : -INFINITY;
        result.degrees_of_freedom = na + nb - 2.0;
        result.p_value = 0.0;
        result.significant_at_5pct = true;
        result.degenerate = true;
        return result;
    }

    double t, df;
    if (variant == TTestVariant::Welch) {
        const double sa = va / na;
        const double sb = vb / nb;
        t = (ma - mb) / std::sqrt(sa + sb);
        df = (sa + sb) * (sa + sb) /
             (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    } else {
        const double pooled =
            ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
        t = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
        df = na + nb - 2.0;
    }

    result.t_statistic = t;
    result.degrees_of_freedom = df;
    if (t == 0.0) {
        result.p_value = 1.0;
    } else {
        result.p_value = ibeta(df / 2.0, 0.5, df / (df + t * t));
    }
    result.significant_at_5pct = result.p_value < 0.05;
    return result;
}

std::vector<double> load_sample_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::NotFound, "cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        try {
            std::size_t pos = 0;
            values.push_back(std::stod(t, &pos));
            if (pos != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            raise(ErrorKind::ParseError,
                  path.string() + ":" + std::to_string(line_no) +
                      ": bad sample value '" + t + "'");
        }
    }
    return values;
}

// ---- reports ----

namespace {

std::vector<MetricKind> metrics_present(const MetricsTable& table) {
    std::vector<MetricKind> out;
    for (const MetricsRow& r : table.rows) {
        if (std::find(out.begin(), out.end(), r.metric) == out.end()) {
            out.push_back(r.metric);
        }
    }
    return out;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", v);
    return buf;
}

}  // namespace

void emit_reports(const MetricsTable& table,
                  const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto metrics = metrics_present(table);

    std::ofstream ds_csv(out_dir / "ds_report.csv");
    std::ofstream dm_csv(out_dir / "dm_report.csv");
    std::ofstream ds_txt(out_dir / "ds_report.txt");
    std::ofstream dm_txt(out_dir / "dm_report.txt");
    if (!ds_csv || !dm_csv || !ds_txt || !dm_txt) {
        raise(ErrorKind::IoError, "cannot write reports to " + out_dir.string());
    }

    ds_csv << "group,subcategory,metric,mild,moderate,severe\n";
    dm_csv << "model,group,metric,mild,moderate,severe\n";
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };

    for (const MetricKind metric : metrics) {
        const auto ds = compute_ds(table, metric);
        const auto dm = compute_dm(table, metric);
        for (const DsEntry& e : ds) {
            ds_csv << e.group << ',' << e.subcategory << ',' << to_string(metric)
                   << ',' << num(e.values.mild) << ',' << num(e.values.moderate)
                   << ',' << num(e.values.severe) << "\n";
        }
        for (const DmEntry& e : dm) {
            dm_csv << e.model << ',' << e.group << ',' << to_string(metric)
                   << ',' << num(e.values.mild) << ',' << num(e.values.moderate)
                   << ',' << num(e.values.severe) << "\n";
        }

        ds_txt << "D_S (" << to_string(metric) << ")\n";
        ds_txt << "  Group        Subcategory       Mild      Moderate  Severe\n";
        for (const DsEntry& e : ds) {
            char line[160];
            std::snprintf(line, sizeof line, "  %-12s %-16s %9s %9s %9s\n",
                          e.group.c_str(), e.subcategory.c_str(),
                          pct(e.values.mild).c_str(),
                          pct(e.values.moderate).c_str(),
                          pct(e.values.severe).c_str());
            ds_txt << line;
        }
        ds_txt << "\n";

        dm_txt << "D_M (" << to_string(metric) << ")\n";
        dm_txt << "  Model        Group             Mild      Moderate  Severe\n";
        for (const DmEntry& e : dm) {
            char line[160];
            std::snprintf(line, sizeof line, "  %-12s %-16s %9s %9s %9s\n",
                          e.model.c_str(), e.group.c_str(),
                          pct(e.values.mild).c_str(),
                          pct(e.values.moderate).c_str(),
                          pct(e.values.severe).c_str());
            dm_txt << line;
        }
        dm_txt << "\n";
    }
}

}  // namespace esia
