#include <algorithm>

#include "kgprover/error.hpp"
#include "kgprover/pipeline.hpp"
#include "kgprover/text_util.hpp"
#include "pipeline_internal.hpp"

namespace kgp {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::base: return "base";
        case Method::rag: return "rag";
        case Method::graph: return "graph";
    }
    return "graph";
}

std::optional<Method> parse_method(std::string_view s) {
    for (auto m : {Method::base, Method::rag, Method::graph})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

std::string_view to_string(OutcomeStatus s) {
    switch (s) {
        case OutcomeStatus::verified: return "verified";
        case OutcomeStatus::failed: return "failed";
        case OutcomeStatus::error: return "error";
    }
    return "error";
}

std::string_view to_string(FailureClass c) {
    switch (c) {
        case FailureClass::formalization_gap: return "formalization_gap";
        case FailureClass::missing_knowledge: return "missing_knowledge";
        case FailureClass::model_error: return "model_error";
        case FailureClass::other: return "other";
    }
    return "other";
}

std::optional<OutcomeStatus> parse_outcome_status(std::string_view s) {
    for (auto v : {OutcomeStatus::verified, OutcomeStatus::failed, OutcomeStatus::error})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

std::optional<FailureClass> parse_failure_class(std::string_view s) {
    for (auto v : {FailureClass::formalization_gap, FailureClass::missing_knowledge, FailureClass::model_error,
                   FailureClass::other})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

void validate(const RunConfig& c) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string(what) + " must be at least 1");
    };
    require(c.attempts >= 1, "attempts");
    require(c.top_k >= 1, "top_k");
    require(c.beam_width >= 1, "beam_width");
    require(c.search_depth >= 1, "search_depth");
    require(c.n_candidates >= 1, "n_candidates");
    if (c.verify_timeout.count() <= 0) throw ConfigError("verify timeout must be positive");
}

std::size_t effective_max_depth(const RunConfig& config) {
    return config.method == Method::graph ? config.max_depth : 0;
}

std::size_t depth_for_attempt(const RunConfig& config, std::size_t attempt) {
    return std::min(attempt == 0 ? 0 : attempt - 1, effective_max_depth(config));
}

namespace detail {

RetrievalContext retrieve_for(const Problem& problem, const RunConfig& config, const Services& services,
                              std::size_t depth) {
    if (config.method == Method::base) return {};
    if (!services.retriever) throw ConfigError("method " + std::string(to_string(config.method)) + " needs a retriever");
    RetrievalQuery q;
    q.query_text = problem.informal_statement;
    q.k = config.top_k;
    q.depth = depth;
    return services.retriever->retrieve(q);
}

SamplingParams candidate_sampling(const RunConfig& config, std::size_t candidate_index0) {
    SamplingParams p = config.sampling;
    constexpr std::size_t ladder = std::size(kTemperatureLadder);
    p.temperature = kTemperatureLadder[candidate_index0 % ladder];
    return p;
}

std::string generate_informal(const Problem& problem, const RetrievalContext& context,
                              const SamplingParams& params, const Services& services) {
    auto response = services.prover->complete(render_informal_prompt(problem, context), params, {problem.name});
    return extract_informal_proof(response.text);
}

namespace {

std::string judge_text(const Candidate& c) {
    std::string out = c.informal_proof;
    if (c.formal_code && !c.formal_code->empty()) out += "\n\nFormal proof:\n" + wrap_lean_response(*c.formal_code);
    return out;
}

}  // namespace

void judge_candidate(const Problem& problem, Candidate& c, const Services& services) {
    if (!services.judge) throw ConfigError("search needs a judge backend");
    SamplingParams greedy;
    auto response = services.judge->complete(render_judge_prompt(problem, judge_text(c)), greedy, {problem.name});
    try {
        auto verdict = parse_judge_score(response.text);
        c.judge_score = verdict.score;
        c.justification = verdict.justification;
        c.warnings.insert(c.warnings.end(), verdict.warnings.begin(), verdict.warnings.end());
    } catch (const ScoreParseError& e) {
        c.judge_score = 0;
        c.justification = std::string(text::trim(response.text));
        c.warnings.push_back(std::string("judge score unparseable: ") + e.what());
    }
    c.judged = true;
}

FormalStep formalize(const Problem& problem, std::string_view informal_proof, std::string_view feedback,
                     const RunConfig& config, const Services& services, bool verify) {
    FormalStep step;
    auto prompt = render_formal_prompt(problem.header, informal_proof, problem.informal_prefix,
                                       problem.formal_statement, problem.goal, feedback);
    auto response = services.formalizer->complete(prompt, config.sampling, {problem.name});
    std::string code;
    try {
        code = extract_lean_block(response.text);
    } catch (const ExtractionError& e) {
        step.extraction_error = e.what();
        step.verification.status = VerifyStatus::failed;
        step.verification.raw_output = std::string("no verification: ") + e.what();
        return step;
    }
    step.formal_code = assemble_submission(problem.header, problem.informal_prefix, code);
    if (verify) {
        step.verification = services.verifier->verify(step.formal_code, config.verify_timeout, {problem.name});
    }
    return step;
}

std::string feedback_from(const VerificationResult& v, std::string_view code,
                          const std::optional<std::string>& extraction_error) {
    if (extraction_error)
        return "The previous response did not contain a usable Lean code block. "
               "Output exactly one ```lean4 code block.";
    if (!v.errors.empty()) return render_error_feedback(v.errors, code);
    if (v.status == VerifyStatus::timeout) return "The previous Lean code timed out during checking.";
    auto raw = text::trim(v.raw_output);
    if (raw.empty()) return {};
    return "The previous Lean code failed to compile:\n" + std::string(text::utf8_truncate(raw, 2000));
}

}  // namespace detail

ProofOutcome prove(const Problem& problem, const RunConfig& config, const Services& services) {
    validate(config);
    if (!services.prover || !services.formalizer || !services.verifier)
        throw ConfigError("prove needs prover, formalizer and verifier services");
    ProofOutcome out;
    out.problem_name = problem.name;
    out.method = config.method;
    std::string feedback;
    std::size_t current_attempt = 1;
    try {
        for (; current_attempt <= config.attempts; ++current_attempt) {
            AttemptTrace trace;
            trace.attempt_index = current_attempt;
            trace.context_depth_used = depth_for_attempt(config, current_attempt);
            auto context = detail::retrieve_for(problem, config, services, trace.context_depth_used);
            trace.context_node_ids = context.node_ids();
            trace.informal_proof = detail::generate_informal(problem, context, config.sampling, services);
            auto step = detail::formalize(problem, trace.informal_proof, feedback, config, services, true);
            trace.formal_code = std::move(step.formal_code);
            trace.verification = std::move(step.verification);
            trace.extraction_error = std::move(step.extraction_error);
            const auto status = trace.verification.status;
            feedback = detail::feedback_from(trace.verification, trace.formal_code, trace.extraction_error);
            out.attempts.push_back(std::move(trace));
            if (status == VerifyStatus::verified) {
                out.status = OutcomeStatus::verified;
                out.winning_attempt = current_attempt;
                return out;
            }
            if (status == VerifyStatus::toolchain_error) {
                out.status = OutcomeStatus::error;
                out.error_message = "toolchain error at attempt " + std::to_string(current_attempt) + ": " +
                                    std::string(text::trim(out.attempts.back().verification.raw_output));
                return out;
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        out.status = OutcomeStatus::error;
        out.error_message = "attempt " + std::to_string(current_attempt) + ": " + e.what();
        return out;
    }
    out.status = OutcomeStatus::failed;
    out.failure_class = classify_failure(out, config.context_floor);
    return out;
}

std::optional<FailureClass> classify_failure(const ProofOutcome& outcome, std::size_t context_floor) {
    if (outcome.status != OutcomeStatus::failed || outcome.attempts.empty()) return std::nullopt;
    const auto& last = outcome.attempts.back();
    if (last.extraction_error) return FailureClass::model_error;
    if (outcome.method != Method::base) {
        std::size_t most = 0;
        for (const auto& a : outcome.attempts) most = std::max(most, a.context_node_ids.size());
        if (most < context_floor) return FailureClass::missing_knowledge;
    }
    if (!text::trim(last.informal_proof).empty() &&
        (!last.verification.errors.empty() || !text::trim(last.verification.raw_output).empty()))
        return FailureClass::formalization_gap;
    return FailureClass::other;
}

BestOfNResult best_of_n(const Problem& problem, const RunConfig& config, const Services& services) {
    validate(config);
    if (!services.prover) throw ConfigError("best-of-n needs a prover backend");
    auto context = detail::retrieve_for(problem, config, services, effective_max_depth(config));
    std::vector<Candidate> all;
    for (std::size_t i = 0; i < config.n_candidates; ++i) {
        Candidate c;
        c.id = i + 1;
        c.informal_proof = detail::generate_informal(problem, context, detail::candidate_sampling(config, i), services);
        all.push_back(std::move(c));
    }
    for (auto& c : all) detail::judge_candidate(problem, c, services);
    std::stable_sort(all.begin(), all.end(),
                     [](const Candidate& a, const Candidate& b) { return a.judge_score > b.judge_score; });
    BestOfNResult r;
    r.best = all.front();
    r.ranked = std::move(all);
    return r;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
ojson opt(const std::optional<T>& v) {
    return v ? ojson(*v) : ojson(nullptr);
}

template <typename T>
std::optional<T> opt_get(const ojson& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

template <typename E>
E parse_enum(const ojson& j, const char* key, std::optional<E> (*parse)(std::string_view)) {
    auto v = parse(j.at(key).get<std::string>());
    if (!v) throw FormatError("json", 0, "bad value for '" + std::string(key) + "'");
    return *v;
}

}  // namespace

ojson to_json(const RunConfig& c) {
    ojson s;
    s["temperature"] = c.sampling.temperature;
    s["top_p"] = c.sampling.top_p;
    s["max_tokens"] = c.sampling.max_tokens;
    s["seed"] = opt(c.sampling.seed);
    ojson j;
    j["method"] = to_string(c.method);
    j["attempts"] = c.attempts;
    j["max_depth"] = c.max_depth;
    j["top_k"] = c.top_k;
    j["sampling"] = std::move(s);
    j["seed"] = opt(c.seed);
    j["beam_width"] = c.beam_width;
    j["search_depth"] = c.search_depth;
    j["n_candidates"] = c.n_candidates;
    j["verify_timeout_ms"] = c.verify_timeout.count();
    j["context_floor"] = c.context_floor;
    return j;
}

RunConfig run_config_from_json(const ojson& j) {
    RunConfig c;
    c.method = parse_enum<Method>(j, "method", parse_method);
    c.attempts = j.at("attempts").get<std::size_t>();
    c.max_depth = j.at("max_depth").get<std::size_t>();
    c.top_k = j.at("top_k").get<std::size_t>();
    const auto& s = j.at("sampling");
    c.sampling.temperature = s.at("temperature").get<double>();
    c.sampling.top_p = s.at("top_p").get<double>();
    c.sampling.max_tokens = s.at("max_tokens").get<int>();
    c.sampling.seed = opt_get<std::uint64_t>(s, "seed");
    c.seed = opt_get<std::uint64_t>(j, "seed");
    c.beam_width = j.at("beam_width").get<std::size_t>();
    c.search_depth = j.at("search_depth").get<std::size_t>();
    c.n_candidates = j.at("n_candidates").get<std::size_t>();
    c.verify_timeout = std::chrono::milliseconds(j.at("verify_timeout_ms").get<long long>());
    c.context_floor = j.at("context_floor").get<std::size_t>();
    return c;
}

ojson to_json(const VerificationResult& v) {
    ojson errors = ojson::array();
    for (const auto& e : v.errors) {
        ojson d;
        d["line"] = e.line;
        d["column"] = e.column;
        d["message"] = e.message;
        errors.push_back(std::move(d));
    }
    ojson j;
    j["status"] = to_string(v.status);
    j["errors"] = std::move(errors);
    j["raw_output"] = v.raw_output;
    j["elapsed_ms"] = v.elapsed.count();
    return j;
}

VerificationResult verification_from_json(const ojson& j) {
    VerificationResult v;
    v.status = parse_enum<VerifyStatus>(j, "status", parse_verify_status);
    for (const auto& d : j.at("errors"))
        v.errors.push_back({d.at("line").get<std::size_t>(), d.at("column").get<std::size_t>(),
                            d.at("message").get<std::string>()});
    v.raw_output = j.at("raw_output").get<std::string>();
    v.elapsed = std::chrono::milliseconds(j.at("elapsed_ms").get<long long>());
    return v;
}

ojson to_json(const ProofOutcome& o) {
    ojson attempts = ojson::array();
    for (const auto& a : o.attempts) {
        ojson t;
        t["attempt_index"] = a.attempt_index;
        t["context_depth_used"] = a.context_depth_used;
        t["context_node_ids"] = a.context_node_ids;
        t["informal_proof"] = a.informal_proof;
        t["formal_code"] = a.formal_code;
        t["extraction_error"] = opt(a.extraction_error);
        t["verification"] = to_json(a.verification);
        attempts.push_back(std::move(t));
    }
    ojson j;
    j["problem_name"] = o.problem_name;
    j["method"] = to_string(o.method);
    j["status"] = to_string(o.status);
    j["winning_attempt"] = opt(o.winning_attempt);
    j["failure_class"] = o.failure_class ? ojson(to_string(*o.failure_class)) : ojson(nullptr);
    j["error_message"] = opt(o.error_message);
    j["attempts"] = std::move(attempts);
    return j;
}

ProofOutcome outcome_from_json(const ojson& j) {
    ProofOutcome o;
    o.problem_name = j.at("problem_name").get<std::string>();
    o.method = parse_enum<Method>(j, "method", parse_method);
    o.status = parse_enum<OutcomeStatus>(j, "status", parse_outcome_status);
    o.winning_attempt = opt_get<std::size_t>(j, "winning_attempt");
    if (auto fc = opt_get<std::string>(j, "failure_class")) {
        o.failure_class = parse_failure_class(*fc);
        if (!o.failure_class) throw FormatError("json", 0, "bad failure_class '" + *fc + "'");
    }
    o.error_message = opt_get<std::string>(j, "error_message");
    for (const auto& t : j.at("attempts")) {
        AttemptTrace a;
        a.attempt_index = t.at("attempt_index").get<std::size_t>();
        a.context_depth_used = t.at("context_depth_used").get<std::size_t>();
        a.context_node_ids = t.at("context_node_ids").get<std::vector<NodeId>>();
        a.informal_proof = t.at("informal_proof").get<std::string>();
        a.formal_code = t.at("formal_code").get<std::string>();
        a.extraction_error = opt_get<std::string>(t, "extraction_error");
        a.verification = verification_from_json(t.at("verification"));
        o.attempts.push_back(std::move(a));
    }
    return o;
}

ojson to_json(const Candidate& c) {
    ojson j;
    j["id"] = c.id;
    j["parent"] = opt(c.parent);
    j["judge_score"] = c.judge_score;
    j["judged"] = c.judged;
    j["verification"] = c.verification ? ojson(to_string(c.verification->status)) : ojson(nullptr);
    j["informal_proof"] = c.informal_proof;
    j["formal_code"] = opt(c.formal_code);
    j["justification"] = c.justification;
    j["warnings"] = c.warnings;
    return j;
}

ojson to_json(const BestOfNResult& r) {
    ojson ranked = ojson::array();
    for (const auto& c : r.ranked) ranked.push_back(to_json(c));
    ojson j;
    j["best"] = r.best.id;
    j["ranked"] = std::move(ranked);
    return j;
}

}  // namespace kgp
