#include "spme/report.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spme {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string render_csv(const std::vector<ReportRow>& rows,
                       const std::vector<std::pair<std::string, std::string>>& config_echo) {
    if (rows.empty()) throw std::invalid_argument("render_csv: rows must be nonempty");
    std::ostringstream os;
    for (const auto& [k, v] : config_echo) os << "# config " << k << " = " << v << "\n";

    // Union of keys in first-appearance order, kind-prefixed.
    std::vector<std::string> cols;
    auto add = [&](const std::string& c) {
        for (const auto& e : cols)
            if (e == c) return;
        cols.push_back(c);
    };
    for (const auto& r : rows) {
        for (const auto& [k, _] : r.text) add("s:" + k);
        for (const auto& [k, _] : r.num) add("m:" + k);
        for (const auto& [k, _] : r.flag) add("f:" + k);
    }

    os << "suite,schema_version";
    for (const auto& c : cols) os << "," << c;
    os << "\n";
    for (const auto& r : rows) {
        os << r.suite << ",1";
        for (const auto& c : cols) {
            os << ",";
            const std::string key = c.substr(2);
            if (c[0] == 's') {
                for (const auto& [k, v] : r.text)
                    if (k == key) os << v;
            } else if (c[0] == 'm') {
                for (const auto& [k, v] : r.num)
                    if (k == key) os << fmt17(v);
            } else {
                for (const auto& [k, v] : r.flag)
                    if (k == key) os << (v ? "true" : "false");
            }
        }
        os << "\n";
    }
    return os.str();
}

std::vector<ReportRow> parse_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<std::string> cols;
    std::vector<ReportRow> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cols.empty()) {
            cols = cells;
            continue;
        }
        ReportRow r;
        r.suite = cells[0];
        for (std::size_t j = 2; j < cols.size() && j < cells.size(); ++j) {
            if (cells[j].empty()) continue;
            const std::string key = cols[j].substr(2);
            if (cols[j][0] == 's')
                r.put(key, cells[j]);
            else if (cols[j][0] == 'm')
                r.put(key, std::stod(cells[j]));
            else
                r.put(key, cells[j] == "true");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string render_json_summary(
    const std::vector<std::pair<std::string, std::string>>& config_echo,
    const std::vector<std::pair<std::string, std::vector<ReportRow>>>& suites,
    const std::vector<std::pair<std::string, bool>>& suite_pass, int exit_status) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["exit_status"] = exit_status;
    nlohmann::json cfg;
    for (const auto& [k, v] : config_echo) cfg[k] = v;
    j["config"] = cfg;
    nlohmann::json js;
    for (const auto& [name, rows] : suites) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json o;
            for (const auto& [k, v] : r.text) o[k] = v;
            for (const auto& [k, v] : r.num) o[k] = fmt17(v);  // text keeps bytes stable
            for (const auto& [k, v] : r.flag) o[k] = v;
            arr.push_back(o);
        }
        js[name]["rows"] = arr;
        for (const auto& [n, p] : suite_pass)
            if (n == name) js[name]["pass"] = p;
    }
    j["suites"] = js;
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << content;
    if (!os) throw std::runtime_error("write failed: " + path);
}

} // namespace spme
