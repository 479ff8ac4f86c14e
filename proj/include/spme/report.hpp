#pragma once

// Report rows and deterministic CSV/JSON emission.  Metrics render with 17
// significant digits so parse(emit(rows)) reproduces every double exactly;
// wall-clock stays on the console and never enters a file.

#include <string>
#include <utility>
#include <vector>

namespace spme {

struct ReportRow {
    std::string suite;
    std::vector<std::pair<std::string, std::string>> text;  // echoed parameters
    std::vector<std::pair<std::string, double>> num;        // estimates, SEs
    std::vector<std::pair<std::string, bool>> flag;         // pass/fail
    double wall_ms = 0;  // console only

    void put(const std::string& k, const std::string& v) { text.emplace_back(k, v); }
    void put(const std::string& k, double v) { num.emplace_back(k, v); }
    void put(const std::string& k, bool v) { flag.emplace_back(k, v); }
};

std::string fmt17(double v);

// Column header carries a kind prefix (s:, m:, f:) so parsing is lossless.
std::string render_csv(const std::vector<ReportRow>& rows,
                       const std::vector<std::pair<std::string, std::string>>& config_echo);
std::vector<ReportRow> parse_csv(const std::string& text);

std::string render_json_summary(
    const std::vector<std::pair<std::string, std::string>>& config_echo,
    const std::vector<std::pair<std::string, std::vector<ReportRow>>>& suites,
    const std::vector<std::pair<std::string, bool>>& suite_pass, int exit_status);

void write_text_file(const std::string& path, const std::string& content);

} // namespace spme
