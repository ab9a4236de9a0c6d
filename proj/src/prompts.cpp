#include <array>
#include <stdexcept>

#include "kgprover/model_gateway.hpp"
#include "kgprover/retrieval.hpp"
#include "kgprover/text_util.hpp"

namespace kgp {

namespace {

// Line breaks below are part of the templates; rendered prompts are compared
// byte-for-byte against golden files.

constexpr std::string_view kInformalHeader =
    "You are a mathematics expert focused on\n"
    "generating clear informal proofs.";

constexpr std::string_view kInformalBody =
    "Given the following mathematical problem\n"
    "and context, generate a clear and detailed\n"
    "informal proof in natural language.\n"
    "\n"
    "Context: {context}\n"
    "\n"
    "Problem: {problem}\n"
    "\n"
    "Provide your proof in the following format:\n"
    "\n"
    "Informal Proof:\n"
    "[Your proof here]";

constexpr std::string_view kFormalHeader = "You are a Lean 4 code generator.";

constexpr std::string_view kFormalBody =
    "We have:\n"
    "HEADER:\n"
    "{header}\n"
    "\n"
    "INFORMAL PROOF:\n"
    "{informal_proof}\n"
    "\n"
    "PREFIX:\n"
    "{informal_prefix}\n"
    "\n"
    "STATEMENT:\n"
    "{formal_statement}\n"
    "\n"
    "GOAL (optional):\n"
    "{goal}\n"
    "\n"
    "INSTRUCTIONS:\n"
    "1. Output exactly one triple-backtick code\n"
    "block containing valid Lean 4 code.\n"
    "2. Do not include any text or explanations\n"
    "outside the code block.\n"
    "3. Make sure it compiles in Lean 4.\n"
    "\n"
    "Required Format:\n"
    "# Start\n"
    "```lean4\n"
    "<Lean code here>\n"
    "```\n"
    "# End";

// judge template v1
constexpr std::string_view kJudgeHeader = "You are a rigorous judge of mathematical proofs.";

constexpr std::string_view kJudgeBody =
    "Evaluate the candidate proof of the problem below across the dimensions of\n"
    "mathematical correctness, clarity, and reasoning completeness.\n"
    "\n"
    "Problem: {problem}\n"
    "\n"
    "Candidate Proof:\n"
    "{candidate}\n"
    "\n"
    "Assign an integer score from 0 (worthless) to 10 (flawless) and justify it\n"
    "briefly. End your answer with a final line of exactly this form:\n"
    "SCORE: <n>";

using Slots = std::initializer_list<std::pair<std::string_view, std::string_view>>;

// Single pass: substituted values are never rescanned, so braces inside
// problem text or Lean code pass through untouched.
std::string fill(std::string_view tmpl, Slots slots) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                auto name = tmpl.substr(i + 1, close - i - 1);
                const std::string_view* value = nullptr;
                for (const auto& [k, v] : slots)
                    if (k == name) value = &v;
                if (!value) throw std::logic_error("template slot without value: " + std::string(name));
                out.append(text::normalize_newlines(*value));
                i = close + 1;
                continue;
            }
        }
        out += tmpl[i++];
    }
    return out;
}

}  // namespace

std::string_view to_string(TemplateId id) {
    switch (id) {
        case TemplateId::informal: return "informal";
        case TemplateId::formalize: return "formalize";
        case TemplateId::judge: return "judge";
    }
    return "informal";
}

std::optional<TemplateId> parse_template_id(std::string_view s) {
    for (auto id : {TemplateId::informal, TemplateId::formalize, TemplateId::judge})
        if (to_string(id) == s) return id;
    return std::nullopt;
}

std::string PromptBundle::text() const {
    return role_header + (template_id == TemplateId::formalize ? "\n" : "\n\n") + body;
}

PromptBundle render_informal_prompt(const Problem& problem, std::string_view context) {
    auto ctx = text::trim(context);
    return {std::string(kInformalHeader),
            fill(kInformalBody, {{"context", ctx.empty() ? std::string_view("(none)") : ctx},
                                 {"problem", text::trim(problem.informal_statement)}}),
            TemplateId::informal};
}

PromptBundle render_informal_prompt(const Problem& problem, const RetrievalContext& context) {
    return render_informal_prompt(problem, context.rendered);
}

PromptBundle render_formal_prompt(std::string_view header, std::string_view informal_proof,
                                  std::string_view informal_prefix, std::string_view formal_statement,
                                  const std::optional<std::string>& goal, std::string_view error_feedback) {
    std::string body = fill(kFormalBody, {{"header", header},
                                          {"informal_proof", informal_proof},
                                          {"informal_prefix", informal_prefix},
                                          {"formal_statement", formal_statement},
                                          {"goal", goal ? std::string_view(*goal) : std::string_view()}});
    if (!text::trim(error_feedback).empty()) {
        body += "\n\n";
        body += text::normalize_newlines(text::trim_right(error_feedback));
    }
    return {std::string(kFormalHeader), std::move(body), TemplateId::formalize};
}

PromptBundle render_judge_prompt(const Problem& problem, std::string_view candidate_proof) {
    auto candidate = text::trim(candidate_proof);
    return {std::string(kJudgeHeader),
            fill(kJudgeBody, {{"problem", text::trim(problem.informal_statement)},
                              {"candidate", candidate.empty() ? std::string_view("(empty proof)") : candidate}}),
            TemplateId::judge};
}

std::string wrap_lean_response(std::string_view code) {
    return "# Start\n```lean4\n" + std::string(code) + "\n```\n# End";
}

}  // namespace kgp
