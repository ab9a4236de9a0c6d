#include <algorithm>
#include <cmath>
#include <regex>

#include "kgprover/error.hpp"
#include "kgprover/model_gateway.hpp"
#include "kgprover/text_util.hpp"

namespace kgp {

namespace {

struct Fence {
    std::string info;
    std::string content;
};

std::vector<Fence> find_fences(std::string_view response) {
    std::vector<Fence> fences;
    std::optional<Fence> open;
    std::vector<std::string_view> body;
    auto close_block = [&] {
        std::string content;
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (i) content += '\n';
            content.append(body[i]);
        }
        open->content = std::move(content);
        fences.push_back(std::move(*open));
        open.reset();
        body.clear();
    };
    for (auto line : text::split_lines(response)) {
        auto trimmed = text::trim(line);
        if (trimmed.starts_with("```")) {
            auto ticks = trimmed.find_first_not_of('`');
            auto info = ticks == std::string_view::npos ? std::string_view{} : text::trim(trimmed.substr(ticks));
            if (open) {
                if (info.empty()) {
                    close_block();
                    continue;
                }
            } else {
                open = Fence{text::to_lower_ascii(info), {}};
                continue;
            }
        }
        if (open) body.push_back(line);
    }
    if (open) {
        // unterminated fence (truncated response): keep what arrived, minus an end marker
        while (!body.empty() && (text::trim(body.back()).empty() || text::trim(body.back()) == "# End"))
            body.pop_back();
        close_block();
    }
    return fences;
}

}  // namespace

std::string extract_lean_block(std::string_view response_text) {
    const std::string normalized = text::normalize_newlines(response_text);
    auto fences = find_fences(normalized);
    const Fence* chosen = nullptr;
    for (const auto& f : fences)
        if (f.info == "lean4" || f.info == "lean") {
            chosen = &f;
            break;
        }
    if (!chosen)
        for (const auto& f : fences)
            if (f.info.empty()) {
                chosen = &f;
                break;
            }
    if (!chosen) throw ExtractionError("no Lean code block in model response", std::string(response_text));
    auto code = std::string(text::trim_right(chosen->content));
    if (text::trim(code).empty()) throw ExtractionError("Lean code block is empty", std::string(response_text));
    return code;
}

std::string extract_informal_proof(std::string_view response_text) {
    const std::string normalized = text::normalize_newlines(response_text);
    const std::string lower = text::to_lower_ascii(normalized);
    constexpr std::string_view marker = "informal proof:";
    auto pos = lower.rfind(marker);
    std::string_view rest = normalized;
    if (pos != std::string::npos) rest = std::string_view(normalized).substr(pos + marker.size());
    return std::string(text::trim(rest));
}

JudgeVerdict parse_judge_score(std::string_view response_text) {
    static const std::regex score_line(
        R"(^[\s*_#>`-]*score[\s*_`]*[:=][\s*_`]*(-?\d+(?:\.\d+)?)[\s*_`]*(?:/\s*10)?[\s*_`.]*$)",
        std::regex::icase);
    const std::string normalized = text::normalize_newlines(response_text);
    auto lines = text::split_lines(normalized);
    for (std::size_t i = lines.size(); i-- > 0;) {
        std::string line(lines[i]);
        std::smatch m;
        if (!std::regex_match(line, m, score_line)) continue;
        JudgeVerdict verdict;
        const std::string number = m[1].str();
        double value = std::stod(number);
        long rounded = std::lround(std::clamp(value, -1e9, 1e9));
        if (number.find('.') != std::string::npos)
            verdict.warnings.push_back("fractional score " + number + " rounded to " + std::to_string(rounded));
        if (rounded < 0 || rounded > 10) {
            long clamped = std::clamp(rounded, 0L, 10L);
            verdict.warnings.push_back("score " + std::to_string(rounded) + " clamped to " +
                                       std::to_string(clamped));
            rounded = clamped;
        }
        verdict.score = static_cast<int>(rounded);
        std::string justification;
        for (std::size_t j = 0; j < i; ++j) {
            if (j) justification += '\n';
            justification.append(lines[j]);
        }
        verdict.justification = std::string(text::trim(justification));
        return verdict;
    }
    throw ScoreParseError("judge response has no 'SCORE: <n>' line");
}

}  // namespace kgp
