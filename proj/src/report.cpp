#include <cstdio>

#include "kgprover/bench.hpp"
#include "kgprover/error.hpp"
#include "kgprover/text_util.hpp"

namespace kgp {

namespace {

constexpr std::string_view kNoValue = "—";

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
    return buf;
}

}  // namespace

ojson to_json(const Report& r) {
    ojson histogram = ojson::object();
    for (const auto& [cls, count] : r.failure_histogram) histogram[std::string(to_string(cls))] = count;
    ojson per_problem = ojson::array();
    for (const auto& o : r.per_problem) per_problem.push_back(to_json(o));
    ojson j;
    j["run_id"] = r.run_id;
    j["config"] = to_json(r.config);
    j["problem_count"] = r.per_problem.size();
    j["accuracy"] = r.accuracy;
    j["accuracy_by_attempt"] = r.accuracy_by_attempt;
    j["failure_histogram"] = std::move(histogram);
    j["error_count"] = r.error_count;
    j["per_problem"] = std::move(per_problem);
    return j;
}

Report report_from_json(const ojson& j) {
    Report r;
    r.run_id = j.at("run_id").get<std::string>();
    r.config = run_config_from_json(j.at("config"));
    r.accuracy = j.at("accuracy").get<double>();
    r.accuracy_by_attempt = j.at("accuracy_by_attempt").get<std::vector<double>>();
    for (auto it = j.at("failure_histogram").begin(); it != j.at("failure_histogram").end(); ++it) {
        auto cls = parse_failure_class(it.key());
        if (!cls) throw FormatError("report.json", 0, "unknown failure class '" + it.key() + "'");
        r.failure_histogram[*cls] = it.value().get<std::size_t>();
    }
    r.error_count = j.at("error_count").get<std::size_t>();
    for (const auto& o : j.at("per_problem")) r.per_problem.push_back(outcome_from_json(o));
    if (j.at("problem_count").get<std::size_t>() != r.per_problem.size())
        throw FormatError("report.json", 0, "problem_count does not match per_problem");
    return r;
}

std::string render_summary_md(const Report& r) {
    const bool empty = r.per_problem.empty();
    const std::string label(method_label(r.config.method));
    std::string out = "# Benchmark summary\n\n";
    out += "- run: `" + r.run_id + "`\n";
    out += "- problems: n=" + std::to_string(r.per_problem.size()) + "\n";
    out += "- attempts: " + std::to_string(r.config.attempts) + ", depth: " + std::to_string(r.config.max_depth) +
           ", top-k: " + std::to_string(r.config.top_k) + "\n\n";
    out += "| Method | Accuracy (%) |\n|---|---|\n";
    out += "| " + label + " | " + (empty ? std::string(kNoValue) : percent(r.accuracy)) + " |\n\n";
    out += "## Accuracy by attempt (%)\n\n| Method |";
    std::string rule = "|---|";
    for (std::size_t t = 1; t <= r.accuracy_by_attempt.size(); ++t) {
        out += " Attempt " + std::to_string(t) + " |";
        rule += "---|";
    }
    out += "\n" + rule + "\n| " + label + " |";
    for (double v : r.accuracy_by_attempt) out += " " + (empty ? std::string(kNoValue) : percent(v)) + " |";
    out += "\n";
    return out;
}

std::string render_failures_md(const Report& r) {
    constexpr std::size_t kExamples = 5;
    std::map<std::string, std::vector<std::string>> names;
    for (const auto& o : r.per_problem) {
        if (o.status == OutcomeStatus::error)
            names["error"].push_back(o.problem_name);
        else if (o.failure_class)
            names[std::string(to_string(*o.failure_class))].push_back(o.problem_name);
    }
    std::string out = "# Failures\n\n| Class | Count | Examples |\n|---|---|---|\n";
    auto row = [&](const std::string& cls, std::size_t count) {
        std::string examples;
        const auto& list = names[cls];
        for (std::size_t i = 0; i < list.size() && i < kExamples; ++i) {
            if (i) examples += ", ";
            examples += "`" + list[i] + "`";
        }
        if (list.size() > kExamples) examples += ", …";
        if (examples.empty()) examples = std::string(kNoValue);
        out += "| " + cls + " | " + std::to_string(count) + " | " + examples + " |\n";
    };
    for (const auto& [cls, count] : r.failure_histogram) row(std::string(to_string(cls)), count);
    row("error", r.error_count);
    bool any_error = false;
    for (const auto& o : r.per_problem) {
        if (o.status != OutcomeStatus::error) continue;
        if (!any_error) out += "\n## Errors\n\n";
        any_error = true;
        out += "- `" + o.problem_name + "`: " + o.error_message.value_or("") + "\n";
    }
    return out;
}

void emit_report(const Report& r, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    text::write_file(out_dir / "report.json", to_json(r).dump(2) + "\n");
    text::write_file(out_dir / "summary.md", render_summary_md(r));
    text::write_file(out_dir / "failures.md", render_failures_md(r));
    std::string traces;
    for (const auto& o : r.per_problem) traces += to_json(o).dump() + "\n";
    text::write_file(out_dir / "traces.jsonl", traces);
    ojson timing;
    timing["run_id"] = r.run_id;
    timing["wall_clock_ms"] = r.wall_clock.count();
    text::write_file(out_dir / "timing.json", timing.dump(2) + "\n");
}

}  // namespace kgp
