#include <json.hpp>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <regex>
#include <set>

#include "kgprover/error.hpp"
#include "kgprover/text_util.hpp"
#include "kgprover/verifier.hpp"

namespace kgp {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string_view to_string(VerifyStatus status) {
    switch (status) {
        case VerifyStatus::verified: return "verified";
        case VerifyStatus::failed: return "failed";
        case VerifyStatus::timeout: return "timeout";
        case VerifyStatus::toolchain_error: return "toolchain_error";
    }
    return "failed";
}

std::optional<VerifyStatus> parse_verify_status(std::string_view s) {
    for (auto st : {VerifyStatus::verified, VerifyStatus::failed, VerifyStatus::timeout, VerifyStatus::toolchain_error})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

namespace {

const std::regex& diagnostic_header() {
    static const std::regex re(R"(^(.+?):(\d+):(\d+):\s*(error|warning|info|information)\s*:\s?(.*)$)");
    return re;
}

bool mentions_error(std::string_view line) {
    auto lower = text::to_lower_ascii(line);
    return lower.find("error") != std::string::npos;
}

constexpr std::string_view kSorryWarning = "declaration uses 'sorry'";

}  // namespace

std::vector<Diagnostic> parse_errors(std::string_view raw_output) {
    const std::string normalized = text::normalize_newlines(raw_output);
    std::vector<Diagnostic> errors;
    std::vector<std::string> stray;
    // current diagnostic kind: 0 none, 1 error, 2 other severity
    int current = 0;
    for (auto line_view : text::split_lines(normalized)) {
        std::string line(text::trim_right(line_view));
        std::smatch m;
        if (std::regex_match(line, m, diagnostic_header())) {
            if (m[4] == "error") {
                Diagnostic d;
                d.line = std::stoul(m[2].str());
                d.column = std::stoul(m[3].str());
                d.message = std::string(text::trim(m[5].str()));
                errors.push_back(std::move(d));
                current = 1;
            } else {
                current = 2;
            }
            continue;
        }
        if (text::trim(line).empty()) {
            current = 0;
            continue;
        }
        if (current == 1) {
            auto& msg = errors.back().message;
            if (!msg.empty()) msg += '\n';
            msg += line;
        } else if (current == 0 && mentions_error(line)) {
            stray.emplace_back(text::trim(line));
        }
    }
    if (!stray.empty()) {
        Diagnostic d;
        for (std::size_t i = 0; i < stray.size(); ++i) {
            if (i) d.message += '\n';
            d.message += stray[i];
        }
        errors.push_back(std::move(d));
    }
    return errors;
}

std::string render_error_feedback(std::span<const Diagnostic> errors, std::string_view previous_code) {
    constexpr std::size_t kMaxShown = 10;
    if (errors.empty()) return {};
    const std::string code = text::normalize_newlines(previous_code);
    auto lines = text::split_lines(code);
    std::string out = "The previous Lean code failed to compile with these errors:\n";
    const std::size_t shown = std::min(errors.size(), kMaxShown);
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& e = errors[i];
        auto msg_lines = text::split_lines(e.message);
        std::string first = msg_lines.empty() ? std::string{} : std::string(text::trim(msg_lines.front()));
        out += "\n";
        if (e.line > 0)
            out += "- line " + std::to_string(e.line) + ":" + std::to_string(e.column) + ": " + first + "\n";
        else
            out += "- " + first + "\n";
        if (e.line > 0 && e.line <= lines.size()) {
            out += "  > ";
            out.append(text::trim_right(lines[e.line - 1]));
            out += "\n";
        }
    }
    if (errors.size() > shown) out += "\n… and " + std::to_string(errors.size() - shown) + " more\n";
    return std::string(text::trim_right(out));
}

std::string assemble_submission(std::string_view header, std::string_view prefix, std::string_view code) {
    std::vector<std::string> imports;
    std::set<std::string> seen_imports;
    std::string body;
    bool previous_blank = true;
    // a prefix (doc comment) stays attached to the code that follows it
    auto take = [&](std::string_view part, bool separate) {
        const std::string normalized = text::normalize_newlines(part);
        for (auto line : text::split_lines(normalized)) {
            auto trimmed = std::string(text::trim(line));
            if (trimmed.starts_with("import ")) {
                if (seen_imports.insert(trimmed).second) imports.push_back(trimmed);
                continue;
            }
            bool blank = trimmed.empty();
            if (blank && previous_blank) continue;
            body.append(text::trim_right(line));
            body += '\n';
            previous_blank = blank;
        }
        if (separate && !previous_blank) {
            body += '\n';
            previous_blank = true;
        }
    };
    take(header, true);
    take(prefix, false);
    take(code, true);
    std::string out;
    for (const auto& imp : imports) out += imp + "\n";
    if (!imports.empty() && !body.empty()) out += "\n";
    out += body;
    while (out.size() >= 2 && out[out.size() - 1] == '\n' && out[out.size() - 2] == '\n') out.pop_back();
    return out;
}

namespace {

class Workspace {
public:
    explicit Workspace(const fs::path& root) {
        fs::create_directories(root);
        std::string tmpl = (root / "kgp-verify-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!::mkdtemp(buf.data())) throw Error("cannot create verification workspace: " + std::string(std::strerror(errno)));
        path_ = buf.data();
    }
    ~Workspace() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

bool is_executable(const fs::path& p) {
    std::error_code ec;
    return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

std::optional<fs::path> find_program(const std::string& name) {
    if (name.empty()) return std::nullopt;
    if (name.find('/') != std::string::npos) return is_executable(name) ? std::optional<fs::path>(name) : std::nullopt;
    const char* path_env = std::getenv("PATH");
    if (!path_env) return std::nullopt;
    std::string_view rest(path_env);
    while (true) {
        auto colon = rest.find(':');
        auto dir = rest.substr(0, colon);
        fs::path candidate = fs::path(dir.empty() ? "." : std::string(dir)) / name;
        if (is_executable(candidate)) return candidate;
        if (colon == std::string_view::npos) break;
        rest.remove_prefix(colon + 1);
    }
    return std::nullopt;
}

struct ProcessResult {
    bool timed_out = false;
    bool exec_failed = false;
    int exit_code = -1;
    std::string output;
};

constexpr int kExecFailedCode = 127;

ProcessResult run_process(const std::vector<std::string>& argv, const fs::path& cwd, Clock::time_point deadline) {
    int pipefd[2];
    if (::pipe2(pipefd, O_CLOEXEC) != 0) throw Error("pipe failed: " + std::string(std::strerror(errno)));
    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(pipefd[0]);
        ::close(pipefd[1]);
        throw Error("fork failed: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(pipefd[1], STDOUT_FILENO);
        ::dup2(pipefd[1], STDERR_FILENO);
        int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        if (::chdir(cwd.c_str()) != 0) ::_exit(kExecFailedCode);
        ::execvp(cargv[0], cargv.data());
        ::_exit(kExecFailedCode);
    }
    ::setpgid(pid, pid);
    ::close(pipefd[1]);

    ProcessResult result;
    char buf[4096];
    bool open = true;
    while (open) {
        auto now = Clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            break;
        }
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        pollfd pfd{pipefd[0], POLLIN, 0};
        int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining + 1, 1000)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) continue;
        ssize_t n = ::read(pipefd[0], buf, sizeof buf);
        if (n > 0)
            result.output.append(buf, static_cast<std::size_t>(n));
        else if (n == 0 || errno != EINTR)
            open = false;
    }
    if (result.timed_out) ::kill(-pid, SIGKILL);
    ::close(pipefd[0]);

    int status = 0;
    while (true) {
        if (!result.timed_out) {
            pid_t r = ::waitpid(pid, &status, WNOHANG);
            if (r == pid) break;
            if (r < 0 && errno != EINTR) break;
            if (Clock::now() >= deadline) {
                result.timed_out = true;
                ::kill(-pid, SIGKILL);
                continue;
            }
            ::usleep(2000);
        } else {
            if (::waitpid(pid, &status, 0) >= 0 || errno != EINTR) break;
        }
    }
    if (!result.timed_out) {
        if (WIFEXITED(status))
            result.exit_code = WEXITSTATUS(status);
        else if (WIFSIGNALED(status))
            result.exit_code = 128 + WTERMSIG(status);
        result.exec_failed = result.exit_code == kExecFailedCode && result.output.empty();
    }
    return result;
}

void add_sorry_failures(std::string_view raw, std::vector<Diagnostic>& errors) {
    const std::string normalized = text::normalize_newlines(raw);
    for (auto line_view : text::split_lines(normalized)) {
        std::string line(line_view);
        std::smatch m;
        if (line.find(kSorryWarning) == std::string::npos) continue;
        Diagnostic d;
        d.message = std::string(kSorryWarning);
        if (std::regex_match(line, m, diagnostic_header())) {
            d.line = std::stoul(m[2].str());
            d.column = std::stoul(m[3].str());
        }
        errors.push_back(std::move(d));
    }
}

}  // namespace

VerificationResult LeanVerifier::verify(const std::string& code, std::chrono::milliseconds timeout, const VerifyTag&) {
    VerificationResult result;
    const auto start = Clock::now();
    auto finish = [&](VerifyStatus status) {
        result.status = status;
        if (result.elapsed.count() == 0)
            result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
        if (status == VerifyStatus::failed && result.errors.empty() && result.raw_output.empty())
            result.raw_output = "checker reported failure without output";
        return result;
    };

    if (config_.command.empty()) {
        result.raw_output = "no checker command configured";
        return finish(VerifyStatus::toolchain_error);
    }
    if (!find_program(config_.command.front())) {
        result.raw_output = "checker binary not found: " + config_.command.front();
        return finish(VerifyStatus::toolchain_error);
    }

    Workspace ws(config_.workspace_root);
    const fs::path file = fs::absolute(ws.path() / "Main.lean");
    text::write_file(file, code.empty() || code.back() == '\n' ? code : code + "\n");

    std::vector<std::string> argv;
    for (const auto& arg : config_.command) {
        std::string a = arg;
        for (auto pos = a.find("{file}"); pos != std::string::npos; pos = a.find("{file}", pos))
            a.replace(pos, 6, file.string());
        argv.push_back(std::move(a));
    }
    const fs::path cwd = config_.project_dir ? *config_.project_dir : ws.path();

    auto proc = run_process(argv, cwd, start + timeout);
    result.raw_output = std::move(proc.output);
    result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
    if (proc.timed_out || result.elapsed >= timeout) {
        result.elapsed = std::max(result.elapsed, timeout);
        return finish(VerifyStatus::timeout);
    }
    if (result.elapsed.count() == 0) result.elapsed = std::chrono::milliseconds(1);
    if (proc.exec_failed) {
        result.raw_output = "could not execute checker: " + config_.command.front();
        return finish(VerifyStatus::toolchain_error);
    }
    result.errors = parse_errors(result.raw_output);
    add_sorry_failures(result.raw_output, result.errors);
    if (proc.exit_code == 0 && result.errors.empty()) return finish(VerifyStatus::verified);
    if (result.errors.empty() && result.raw_output.empty())
        result.raw_output = "checker exited with status " + std::to_string(proc.exit_code);
    return finish(VerifyStatus::failed);
}

MockVerifier::MockVerifier(const fs::path& script) {
    std::ifstream in(script);
    if (!in) throw ConfigError("cannot open mock verifier script " + script.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            auto status = parse_verify_status(j.at("status").get<std::string>());
            if (!status) throw FormatError(script.filename().string(), line_no, "unknown status");
            add(j.at("problem_id").get<std::string>(), j.at("attempt").get<int>(), *status,
                j.value("raw_output", std::string{}));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(script.filename().string(), line_no, e.what());
        }
    }
}

void MockVerifier::add(const std::string& problem_id, int attempt, VerifyStatus status, std::string raw_output) {
    std::lock_guard lock(mutex_);
    script_[problem_id][attempt] = Entry{status, std::move(raw_output)};
}

VerificationResult MockVerifier::verify(const std::string& code, std::chrono::milliseconds timeout,
                                        const VerifyTag& tag) {
    std::lock_guard lock(mutex_);
    auto& subs = submitted_[tag.problem_id];
    subs.push_back(code);
    const int attempt = static_cast<int>(subs.size());
    auto script = script_.find(tag.problem_id);
    if (script == script_.end() || !script->second.contains(attempt))
        throw ScriptExhaustedError("mock verifier script has no attempt " + std::to_string(attempt) +
                                   " for problem '" + tag.problem_id + "'");
    const Entry& e = script->second.at(attempt);
    VerificationResult r;
    r.status = e.status;
    r.raw_output = e.raw_output;
    if (e.status == VerifyStatus::failed) {
        r.errors = parse_errors(e.raw_output);
        if (r.errors.empty() && r.raw_output.empty()) r.raw_output = "scripted failure";
    }
    if (e.status == VerifyStatus::timeout) r.elapsed = timeout;
    return r;
}

int MockVerifier::calls(const std::string& problem_id) const {
    std::lock_guard lock(mutex_);
    auto it = submitted_.find(problem_id);
    return it == submitted_.end() ? 0 : static_cast<int>(it->second.size());
}

std::size_t MockVerifier::total_calls() const {
    std::lock_guard lock(mutex_);
    std::size_t total = 0;
    for (const auto& [id, subs] : submitted_) total += subs.size();
    return total;
}

std::vector<std::string> MockVerifier::submissions(const std::string& problem_id) const {
    std::lock_guard lock(mutex_);
    auto it = submitted_.find(problem_id);
    return it == submitted_.end() ? std::vector<std::string>{} : it->second;
}

}  // namespace kgp
