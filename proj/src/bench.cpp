#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "kgprover/bench.hpp"
#include "kgprover/error.hpp"
#include "kgprover/text_util.hpp"

namespace kgp {

namespace {

const char* const kNameKeys[] = {"name", "id", "problem_name"};
const char* const kStatementKeys[] = {"informal_statement", "informal_stmt", "nl_statement"};
const char* const kKnownKeys[] = {"header", "informal_prefix", "formal_statement", "goal", "split"};

std::optional<std::string> string_field(const ojson& j, const char* key, std::string& problem) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_string()) {
        problem = "field '" + std::string(key) + "' is not a string";
        return std::nullopt;
    }
    return j.at(key).get<std::string>();
}

// Text of the first "/-- ... -/" doc comment.
std::optional<std::string> doc_comment(std::string_view prefix) {
    auto open = prefix.find("/--");
    if (open == std::string_view::npos) return std::nullopt;
    auto close = prefix.find("-/", open + 3);
    if (close == std::string_view::npos) return std::nullopt;
    auto body = text::trim(prefix.substr(open + 3, close - open - 3));
    if (body.empty()) return std::nullopt;
    return std::string(body);
}

std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

bool is_theorem_item(const Problem& p) {
    auto extra = ojson::parse(p.extra_json, nullptr, false);
    if (!extra.is_object()) return true;
    for (const char* key : {"type", "problem_type", "task"}) {
        if (!extra.contains(key) || !extra.at(key).is_string()) continue;
        auto v = text::to_lower_ascii(extra.at(key).get<std::string>());
        return v.find("theorem") != std::string::npos || v == "tp";
    }
    return true;
}

}  // namespace

std::vector<Problem> parse_dataset(std::istream& in, const std::string& source_name) {
    std::vector<Problem> out;
    std::vector<std::string> problems;
    std::set<std::string> names;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line_no) + ": ";
        auto j = ojson::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            problems.push_back(where + "not a JSON object");
            continue;
        }
        Problem p;
        std::string bad;
        std::set<std::string> consumed;
        auto first_of = [&](const auto& keys) -> std::optional<std::string> {
            for (const char* key : keys) {
                if (auto v = string_field(j, key, bad)) {
                    for (const char* k : keys) consumed.insert(k);
                    return v;
                }
            }
            for (const char* k : keys) consumed.insert(k);
            return std::nullopt;
        };
        auto name = first_of(kNameKeys);
        auto statement = first_of(kStatementKeys);
        std::optional<std::string> fields[std::size(kKnownKeys)];
        for (std::size_t i = 0; i < std::size(kKnownKeys); ++i) {
            fields[i] = string_field(j, kKnownKeys[i], bad);
            consumed.insert(kKnownKeys[i]);
        }
        if (!bad.empty()) {
            problems.push_back(where + bad);
            continue;
        }
        if (!name || text::trim(*name).empty()) {
            problems.push_back(where + "missing name");
            continue;
        }
        p.name = std::string(text::trim(*name));
        p.header = fields[0].value_or("");
        p.informal_prefix = fields[1].value_or("");
        p.formal_statement = fields[2].value_or("");
        p.goal = fields[3];
        p.split = fields[4].value_or("");
        if (text::trim(p.formal_statement).empty()) {
            problems.push_back(where + "missing formal_statement for '" + p.name + "'");
            continue;
        }
        if (!statement || text::trim(*statement).empty()) statement = doc_comment(p.informal_prefix);
        if (!statement) {
            problems.push_back(where + "missing informal_statement for '" + p.name + "'");
            continue;
        }
        p.informal_statement = std::string(text::trim(*statement));
        if (!names.insert(p.name).second) {
            problems.push_back(where + "duplicate name '" + p.name + "'");
            continue;
        }
        ojson extra = ojson::object();
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!consumed.contains(it.key())) extra[it.key()] = it.value();
        p.extra_json = extra.dump();
        out.push_back(std::move(p));
    }
    if (!problems.empty()) throw DatasetError(std::move(problems));
    return out;
}

std::vector<Problem> load_dataset(const std::filesystem::path& path, const std::optional<std::string>& format_hint) {
    if (format_hint && !format_hint->empty()) {
        static const std::set<std::string> known = {"jsonl", "minif2f", "proofnet", "mustard"};
        if (!known.contains(text::to_lower_ascii(*format_hint)))
            throw ConfigError("unknown dataset format '" + *format_hint + "'");
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset " + path.string());
    return parse_dataset(in, path.filename().string());
}

std::vector<Problem> select_mustard_subset(std::vector<Problem> problems, std::size_t n, std::uint64_t seed) {
    std::erase_if(problems, [](const Problem& p) { return !is_theorem_item(p); });
    std::sort(problems.begin(), problems.end(), [](const Problem& a, const Problem& b) { return a.name < b.name; });
    if (problems.size() <= n) return problems;
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates: the first n slots hold the sample
    for (std::size_t i = 0; i < n; ++i) {
        auto j = i + static_cast<std::size_t>(draw_below(rng, problems.size() - i));
        std::swap(problems[i], problems[j]);
    }
    problems.resize(n);
    std::sort(problems.begin(), problems.end(), [](const Problem& a, const Problem& b) { return a.name < b.name; });
    return problems;
}

std::string_view method_label(Method m) {
    switch (m) {
        case Method::base: return "Base";
        case Method::rag: return "RAG";
        case Method::graph: return "Graphs";
    }
    return "Graphs";
}

Report aggregate(const RunConfig& config, std::vector<ProofOutcome> outcomes) {
    Report r;
    r.config = config;
    r.per_problem = std::move(outcomes);
    for (auto c : {FailureClass::formalization_gap, FailureClass::missing_knowledge, FailureClass::model_error,
                   FailureClass::other})
        r.failure_histogram[c] = 0;
    std::vector<std::size_t> verified_by(config.attempts, 0);
    std::size_t verified = 0;
    std::string fingerprint = to_json(config).dump();
    for (const auto& o : r.per_problem) {
        fingerprint += "\n" + o.problem_name;
        if (o.status == OutcomeStatus::verified && o.winning_attempt) {
            ++verified;
            for (std::size_t t = *o.winning_attempt; t <= config.attempts; ++t) ++verified_by[t - 1];
        } else if (o.status == OutcomeStatus::error) {
            ++r.error_count;
        } else if (o.failure_class) {
            ++r.failure_histogram[*o.failure_class];
        }
    }
    const double n = static_cast<double>(r.per_problem.size());
    r.accuracy = r.per_problem.empty() ? 0.0 : static_cast<double>(verified) / n;
    for (auto v : verified_by) r.accuracy_by_attempt.push_back(r.per_problem.empty() ? 0.0 : static_cast<double>(v) / n);
    r.run_id = std::string(to_string(config.method)) + "-" + text::sha256_hex(fingerprint).substr(0, 12);
    return r;
}

Report run_bench(const std::vector<Problem>& problems, const RunConfig& config, const Services& services,
                 const BenchOptions& options) {
    validate(config);
    const auto start = std::chrono::steady_clock::now();
    std::vector<ProofOutcome> outcomes(problems.size());
    std::atomic<std::size_t> next{0};
    std::mutex callback_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < problems.size(); i = next++) {
            ProofOutcome o;
            try {
                o = prove(problems[i], config, services);
            } catch (const std::exception& e) {
                o.problem_name = problems[i].name;
                o.method = config.method;
                o.status = OutcomeStatus::error;
                o.error_message = e.what();
            }
            outcomes[i] = std::move(o);
            if (options.on_outcome) {
                std::lock_guard lock(callback_mutex);
                options.on_outcome(i, outcomes[i]);
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(problems.size(), 1));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    Report r = aggregate(config, std::move(outcomes));
    r.wall_clock = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    return r;
}

}  // namespace kgp
