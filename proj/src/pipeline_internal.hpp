#pragma once

#include <string>

#include "kgprover/pipeline.hpp"

namespace kgp::detail {

RetrievalContext retrieve_for(const Problem& problem, const RunConfig& config, const Services& services,
                              std::size_t depth);

SamplingParams candidate_sampling(const RunConfig& config, std::size_t candidate_index0);

/// Informal proof for one candidate from the prover backend.
std::string generate_informal(const Problem& problem, const RetrievalContext& context,
                              const SamplingParams& params, const Services& services);

/// Scores `c` with the judge backend; unparseable verdicts score 0 with a warning.
void judge_candidate(const Problem& problem, Candidate& c, const Services& services);

/// Formalizes, assembles and (unless extraction fails) verifies. Returns the
/// filled trace fields without touching the attempt index or context.
struct FormalStep {
    std::string formal_code;
    VerificationResult verification;
    std::optional<std::string> extraction_error;
};
FormalStep formalize(const Problem& problem, std::string_view informal_proof, std::string_view feedback,
                     const RunConfig& config, const Services& services, bool verify);

/// Feedback for the next formalize prompt, derived from a failed verification.
std::string feedback_from(const VerificationResult& v, std::string_view code,
                          const std::optional<std::string>& extraction_error);

}  // namespace kgp::detail
