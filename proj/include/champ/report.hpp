#pragma once

// Suite reports: per-check records, data tables, CSV and JSON output.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace champ {

struct check_record {
    std::string name;
    double measured = std::numeric_limits<double>::quiet_NaN();
    double threshold = std::numeric_limits<double>::quiet_NaN();
    std::string relation; // "<=", ">=", "<", ">", "==", "in", "info", "error"
    bool pass = false;
    std::string note;

    bool operator==(const check_record& o) const
    {
        auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
        return name == o.name && same(measured, o.measured) && same(threshold, o.threshold) &&
               relation == o.relation && pass == o.pass && note == o.note;
    }
};

struct data_table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    bool operator==(const data_table&) const = default;
};

struct suite_report {
    std::string suite;
    std::vector<check_record> records;
    std::vector<data_table> tables;
    std::vector<std::string> overridden; // thresholds differing from the defaults
    // run metadata, kept apart so the rest of the JSON is reproducible
    std::string timestamp;
    double elapsed_s = 0;

    bool overall() const
    {
        for (auto& r : records)
            if (!r.pass)
                return false;
        return true;
    }
    bool non_default_thresholds() const { return !overridden.empty(); }

    void check(const std::string& name, double measured, const std::string& rel, double threshold,
               const std::string& note = {})
    {
        bool ok = false;
        if (std::isfinite(measured)) {
            if (rel == "<=")
                ok = measured <= threshold;
            else if (rel == "<")
                ok = measured < threshold;
            else if (rel == ">=")
                ok = measured >= threshold;
            else if (rel == ">")
                ok = measured > threshold;
            else if (rel == "==")
                ok = measured == threshold;
            else
                throw error(errc::domain_violation, "unknown relation " + rel);
        }
        records.push_back({name, measured, threshold, rel, ok, note});
    }
    void flag(const std::string& name, bool ok, const std::string& note = {})
    {
        records.push_back({name, ok ? 1.0 : 0.0, 1.0, "==", ok, note});
    }
    void info(const std::string& name, double measured, const std::string& note = {})
    {
        records.push_back({name, measured, std::numeric_limits<double>::quiet_NaN(), "info", true, note});
    }
    void fail(const std::string& name, const std::string& why)
    {
        records.push_back({name, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                           "error", false, why});
    }
    const check_record* find(const std::string& name) const
    {
        for (auto& r : records)
            if (r.name == name)
                return &r;
        return nullptr;
    }
};

namespace detail {

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string num(double x)
{
    if (std::isnan(x))
        return "";
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

inline nlohmann::json num_json(double x)
{
    if (!std::isfinite(x))
        return nullptr;
    return x;
}

inline double json_num(const nlohmann::json& j)
{
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

} // namespace detail

inline std::string records_csv(const suite_report& r)
{
    std::ostringstream os;
    os << "name,measured,threshold,relation,pass,note\n";
    for (auto& c : r.records)
        os << detail::csv_field(c.name) << ',' << detail::num(c.measured) << ',' << detail::num(c.threshold) << ','
           << c.relation << ',' << (c.pass ? "true" : "false") << ',' << detail::csv_field(c.note) << '\n';
    return os.str();
}

inline std::string table_csv(const data_table& t)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << detail::csv_field(t.columns[i]);
    os << '\n';
    for (auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << detail::num(row[i]);
        os << '\n';
    }
    return os.str();
}

inline nlohmann::json to_json(const suite_report& r)
{
    using nlohmann::json;
    json j;
    j["schema"] = 1;
    j["suite"] = r.suite;
    j["overall_pass"] = r.overall();
    j["non_default_thresholds"] = r.non_default_thresholds();
    j["overridden_thresholds"] = r.overridden;
    json recs = json::array();
    for (auto& c : r.records)
        recs.push_back({{"name", c.name},
                        {"measured", detail::num_json(c.measured)},
                        {"threshold", detail::num_json(c.threshold)},
                        {"relation", c.relation},
                        {"pass", c.pass},
                        {"note", c.note}});
    j["records"] = recs;
    json tabs = json::array();
    for (auto& t : r.tables) {
        json rows = json::array();
        for (auto& row : t.rows) {
            json jr = json::array();
            for (double x : row)
                jr.push_back(detail::num_json(x));
            rows.push_back(jr);
        }
        tabs.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
    }
    j["tables"] = tabs;
    j["meta"] = {{"timestamp", r.timestamp}, {"elapsed_s", r.elapsed_s}};
    return j;
}

inline suite_report from_json(const nlohmann::json& j)
{
    if (!j.contains("schema") || j["schema"] != 1)
        throw error(errc::config_invalid, "report schema must be 1");
    suite_report r;
    r.suite = j.at("suite").get<std::string>();
    r.overridden = j.at("overridden_thresholds").get<std::vector<std::string>>();
    for (auto& c : j.at("records"))
        r.records.push_back({c.at("name").get<std::string>(), detail::json_num(c.at("measured")),
                             detail::json_num(c.at("threshold")), c.at("relation").get<std::string>(),
                             c.at("pass").get<bool>(), c.at("note").get<std::string>()});
    for (auto& t : j.at("tables")) {
        data_table d{t.at("name").get<std::string>(), t.at("columns").get<std::vector<std::string>>(), {}};
        for (auto& row : t.at("rows")) {
            std::vector<double> v;
            for (auto& x : row)
                v.push_back(detail::json_num(x));
            d.rows.push_back(v);
        }
        r.tables.push_back(d);
    }
    r.timestamp = j.at("meta").at("timestamp").get<std::string>();
    r.elapsed_s = j.at("meta").at("elapsed_s").get<double>();
    return r;
}

inline std::string banner(const suite_report& r)
{
    if (!r.non_default_thresholds())
        return {};
    std::string s = "*** NON-DEFAULT THRESHOLDS:";
    for (auto& n : r.overridden)
        s += " " + n;
    return s + " ***";
}

enum class report_format { csv, json };

/// Writes <suite>.csv or <suite>.json into dir; CSV also writes one file per table.
inline std::vector<std::filesystem::path> emit_report(const suite_report& r, report_format fmt,
                                                      const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw error(errc::io_failure, "cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    auto write = [&](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p);
        if (!out)
            throw error(errc::io_failure, "cannot write " + p.string());
        out << text;
        if (!out)
            throw error(errc::io_failure, "write failed for " + p.string());
        written.push_back(p);
    };
    if (fmt == report_format::csv) {
        std::string head = banner(r);
        write(dir / (r.suite + ".csv"), head.empty() ? records_csv(r) : "# " + head + "\n" + records_csv(r));
        for (auto& t : r.tables)
            write(dir / (r.suite + "_" + t.name + ".csv"), table_csv(t));
    } else {
        write(dir / (r.suite + ".json"), to_json(r).dump(2) + "\n");
    }
    return written;
}

} // namespace champ
