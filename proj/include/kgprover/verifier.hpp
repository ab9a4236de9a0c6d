#pragma once

// Formal proof checking: runs an external checker in a throwaway workspace
// and turns its diagnostics into structured errors.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kgp {

enum class VerifyStatus { verified, failed, timeout, toolchain_error };

std::string_view to_string(VerifyStatus status);
std::optional<VerifyStatus> parse_verify_status(std::string_view s);

struct Diagnostic {
    std::size_t line = 0;  // 1-based; 0 for diagnostics without a position
    std::size_t column = 0;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

struct VerificationResult {
    VerifyStatus status = VerifyStatus::failed;
    std::vector<Diagnostic> errors;
    std::string raw_output;
    std::chrono::milliseconds elapsed{0};
};

struct VerifyTag {
    std::string problem_id;
};

inline constexpr std::chrono::milliseconds kDefaultVerifyTimeout{60'000};

class Verifier {
public:
    virtual ~Verifier() = default;
    /// Proof failure is a result, never an exception.
    virtual VerificationResult verify(const std::string& code, std::chrono::milliseconds timeout,
                                      const VerifyTag& tag) = 0;
};

/// Error diagnostics of the form "file:line:col: error: message". Continuation
/// lines join the preceding error's message. Stray lines mentioning "error"
/// outside any diagnostic are folded into one trailing entry at line 0.
std::vector<Diagnostic> parse_errors(std::string_view raw_output);

/// Compact feedback for the next formalization attempt: at most 10 errors,
/// each with the offending source line.
std::string render_error_feedback(std::span<const Diagnostic> errors, std::string_view previous_code);

/// header + prefix + code, with import lines hoisted to the top and deduplicated.
std::string assemble_submission(std::string_view header, std::string_view prefix, std::string_view code);

struct LeanCheckerConfig {
    /// argv; "{file}" is replaced with the absolute path of the proof file.
    std::vector<std::string> command = {"lean", "{file}"};
    /// Working directory for the checker (a project with prebuilt dependencies).
    /// Defaults to the per-proof workspace.
    std::optional<std::filesystem::path> project_dir;
    std::filesystem::path workspace_root = std::filesystem::temp_directory_path();
};

class LeanVerifier : public Verifier {
public:
    explicit LeanVerifier(LeanCheckerConfig config) : config_(std::move(config)) {}
    VerificationResult verify(const std::string& code, std::chrono::milliseconds timeout,
                              const VerifyTag& tag) override;

private:
    LeanCheckerConfig config_;
};

/// Replays JSONL rows {problem_id, attempt, status, raw_output}; each problem
/// has its own 1-based attempt cursor.
class MockVerifier : public Verifier {
public:
    explicit MockVerifier(const std::filesystem::path& script);
    MockVerifier() = default;

    void add(const std::string& problem_id, int attempt, VerifyStatus status, std::string raw_output = {});
    VerificationResult verify(const std::string& code, std::chrono::milliseconds timeout,
                              const VerifyTag& tag) override;

    int calls(const std::string& problem_id) const;
    std::size_t total_calls() const;
    /// Code submitted for a problem, in call order.
    std::vector<std::string> submissions(const std::string& problem_id) const;

private:
    struct Entry {
        VerifyStatus status;
        std::string raw_output;
    };
    std::map<std::string, std::map<int, Entry>> script_;
    std::map<std::string, std::vector<std::string>> submitted_;
    mutable std::mutex mutex_;
};

}  // namespace kgp
