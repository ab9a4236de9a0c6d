#include <algorithm>

#include "kgprover/error.hpp"
#include "kgprover/pipeline.hpp"
#include "pipeline_internal.hpp"

namespace kgp {

namespace {

// score descending, verified first, then id
bool ranks_before(const Candidate& a, const Candidate& b) {
    if (a.judge_score != b.judge_score) return a.judge_score > b.judge_score;
    if (a.verified() != b.verified()) return a.verified();
    return a.id < b.id;
}

std::vector<Candidate> snapshot(const std::vector<Candidate>& all, const std::vector<std::size_t>& ids) {
    std::vector<Candidate> out;
    for (auto id : ids) out.push_back(all[id - 1]);
    return out;
}

}  // namespace

SearchResult tree_search(const Problem& problem, const RunConfig& config, const Services& services) {
    validate(config);
    if (!services.prover || !services.formalizer || !services.verifier || !services.judge)
        throw ConfigError("tree search needs prover, formalizer, judge and verifier services");

    SearchResult result;
    auto context = detail::retrieve_for(problem, config, services, effective_max_depth(config));
    std::vector<Candidate> all;  // all[id - 1]
    std::vector<std::size_t> frontier;
    for (std::size_t i = 0; i < config.beam_width; ++i) {
        Candidate c;
        c.id = i + 1;
        c.informal_proof = detail::generate_informal(problem, context, detail::candidate_sampling(config, i), services);
        all.push_back(std::move(c));
        frontier.push_back(i + 1);
    }
    result.iterations.push_back({0, snapshot(all, frontier), frontier});

    auto apply_step = [](Candidate& c, detail::FormalStep& step) {
        c.formal_code = std::move(step.formal_code);
        if (step.extraction_error) {
            c.verification = std::move(step.verification);
            c.warnings.push_back(*step.extraction_error);
        }
    };

    for (std::size_t it = 1; it <= config.search_depth; ++it) {
        SearchIteration rec;
        rec.iteration = it;

        for (auto id : frontier) {
            if (!all[id - 1].formal_code) {
                auto step = detail::formalize(problem, all[id - 1].informal_proof, {}, config, services, false);
                apply_step(all[id - 1], step);
            }
            Candidate& c = all[id - 1];
            if (!c.verification)
                c.verification = services.verifier->verify(*c.formal_code, config.verify_timeout, {problem.name});
            if (c.verification->status == VerifyStatus::toolchain_error)
                throw Error("toolchain error while verifying candidate " + std::to_string(c.id) + ": " +
                            c.verification->raw_output);
            if (c.verified()) {
                rec.pool = snapshot(all, frontier);
                rec.retained = {id};
                result.iterations.push_back(std::move(rec));
                result.early_exit = true;
                result.best = c;
                return result;
            }
        }

        std::vector<std::size_t> pool = frontier;
        for (auto id : frontier) {
            const Candidate parent = all[id - 1];
            std::optional<std::string> extraction;
            if (parent.formal_code->empty()) extraction = "no code";
            auto feedback = detail::feedback_from(*parent.verification, *parent.formal_code, extraction);
            auto step = detail::formalize(problem, parent.informal_proof, feedback, config, services, false);
            Candidate r;
            r.id = all.size() + 1;
            r.parent = parent.id;
            r.informal_proof = parent.informal_proof;
            apply_step(r, step);
            all.push_back(std::move(r));
            pool.push_back(all.size());
        }

        for (auto id : pool)
            if (!all[id - 1].judged) detail::judge_candidate(problem, all[id - 1], services);

        std::sort(pool.begin(), pool.end(),
                  [&](std::size_t a, std::size_t b) { return ranks_before(all[a - 1], all[b - 1]); });
        frontier.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(std::min(pool.size(), config.beam_width)));
        rec.pool = snapshot(all, pool);
        rec.retained = frontier;
        result.iterations.push_back(std::move(rec));
    }

    result.best = *std::min_element(all.begin(), all.end(), ranks_before);
    return result;
}

ojson to_json(const SearchResult& r) {
    ojson iterations = ojson::array();
    for (const auto& it : r.iterations) {
        ojson pool = ojson::array();
        for (const auto& c : it.pool) pool.push_back(to_json(c));
        ojson j;
        j["iteration"] = it.iteration;
        j["pool"] = std::move(pool);
        j["retained"] = it.retained;
        iterations.push_back(std::move(j));
    }
    ojson j;
    j["best"] = to_json(r.best);
    j["early_exit"] = r.early_exit;
    j["iterations"] = std::move(iterations);
    return j;
}

}  // namespace kgp
