#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "kgprover/bench.hpp"
#include "kgprover/cli.hpp"
#include "kgprover/corpus.hpp"
#include "kgprover/embedding.hpp"
#include "kgprover/error.hpp"
#include "kgprover/graph_store.hpp"
#include "kgprover/http_transport.hpp"
#include "kgprover/pipeline.hpp"
#include "kgprover/text_util.hpp"
#include "kgprover/verifier.hpp"

namespace kgp {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Configuration file
//
// {
//   "prover":     {"base_url": "...", "model": "...", "api_key_env": "OPENAI_API_KEY",
//                  "max_in_flight": 4, "timeout_s": 120},
//   "formalizer": {...}, "judge": {...},          // default to "prover"
//   "embedding":  {"base_url": "...", "model": "...", "api_key_env": "...", "batch_size": 64}
//              or {"provider": "mock", "table": "embeddings.jsonl"},
//   "verifier":   {"command": ["lake", "env", "lean", "{file}"], "project_dir": "...",
//                  "workspace_root": "...", "timeout_s": 60},
//   "retry":      {"max_retries": 3, "base_delay_ms": 1000},
//   "workers":    4
// }

ojson load_config(const std::string& path) {
    if (path.empty()) return ojson::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    auto j = ojson::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("config " + path + " is not a JSON object");
    return j;
}

template <typename T>
T cfg_value(const ojson& section, const char* key, T fallback) {
    if (!section.contains(key) || section.at(key).is_null()) return fallback;
    try {
        return section.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config field '" + std::string(key) + "' has the wrong type");
    }
}

std::string env_secret(const ojson& section, const char* fallback_env) {
    auto name = cfg_value<std::string>(section, "api_key_env", fallback_env);
    const char* v = std::getenv(name.c_str());
    return v ? v : "";
}

RetryPolicy retry_from(const ojson& cfg) {
    RetryPolicy p;
    if (cfg.contains("retry")) {
        const auto& r = cfg.at("retry");
        p.max_retries = cfg_value<int>(r, "max_retries", p.max_retries);
        p.base_delay = std::chrono::milliseconds(cfg_value<long long>(r, "base_delay_ms", p.base_delay.count()));
    }
    return p;
}

// ---------------------------------------------------------------------------
// Runtime: owns every backend; Services is a view over it.

struct Runtime {
    std::shared_ptr<EmbeddingCache> embedder;
    std::shared_ptr<GraphStore> store;
    std::unique_ptr<Retriever> retriever;
    std::vector<std::unique_ptr<ChatBackend>> chat_owned;
    ChatBackend* prover = nullptr;
    ChatBackend* formalizer = nullptr;
    ChatBackend* judge = nullptr;
    std::unique_ptr<Verifier> verifier;
    std::chrono::milliseconds verify_timeout = kDefaultVerifyTimeout;

    Services services() const { return {retriever.get(), prover, formalizer, judge, verifier.get()}; }
};

std::optional<fs::path> mock_file(const std::string& mock_dir, const char* name) {
    if (mock_dir.empty()) return std::nullopt;
    if (!fs::is_directory(mock_dir)) throw ConfigError("mock directory not found: " + mock_dir);
    auto p = fs::path(mock_dir) / name;
    if (!fs::exists(p)) return std::nullopt;
    return p;
}

std::shared_ptr<EmbeddingCache> make_embedder(const ojson& cfg, const std::string& mock_dir) {
    const RetryPolicy retry = retry_from(cfg);
    if (auto table = mock_file(mock_dir, "embeddings.jsonl"))
        return std::make_shared<EmbeddingCache>(std::make_shared<MockEmbeddingProvider>(*table), 0, retry);
    if (!cfg.contains("embedding")) return nullptr;
    const auto& e = cfg.at("embedding");
    if (cfg_value<std::string>(e, "provider", "http") == "mock") {
        auto table = cfg_value<std::string>(e, "table", "");
        if (table.empty()) throw ConfigError("mock embedding provider needs a 'table'");
        return std::make_shared<EmbeddingCache>(std::make_shared<MockEmbeddingProvider>(table), 0, retry);
    }
    auto url = cfg_value<std::string>(e, "base_url", "");
    if (url.empty()) throw ConfigError("embedding section needs 'base_url'");
    HttpEmbeddingConfig hc;
    hc.model = cfg_value<std::string>(e, "model", hc.model);
    hc.api_key = env_secret(e, "OPENAI_API_KEY");
    hc.batch_size = cfg_value<std::size_t>(e, "batch_size", hc.batch_size);
    auto transport = make_http_transport(url, std::chrono::seconds(cfg_value<long long>(e, "timeout_s", 120)));
    return std::make_shared<EmbeddingCache>(std::make_shared<HttpEmbeddingProvider>(hc, std::move(transport)),
                                            cfg_value<std::size_t>(e, "dimension", 0), retry);
}

void make_chat(Runtime& rt, const ojson& cfg, const std::string& mock_dir) {
    if (auto script = mock_file(mock_dir, "chat.jsonl")) {
        rt.chat_owned.push_back(std::make_unique<MockChatBackend>(*script));
        rt.prover = rt.formalizer = rt.judge = rt.chat_owned.back().get();
        return;
    }
    if (!cfg.contains("prover")) throw ConfigError("no chat backend: pass --mock-dir with chat.jsonl or --config with a 'prover' section");
    const RetryPolicy retry = retry_from(cfg);
    auto build = [&](const ojson& s) -> ChatBackend* {
        auto url = cfg_value<std::string>(s, "base_url", "");
        if (url.empty()) throw ConfigError("chat section needs 'base_url'");
        HttpChatConfig hc;
        hc.model = cfg_value<std::string>(s, "model", "");
        if (hc.model.empty()) throw ConfigError("chat section needs 'model'");
        hc.api_key = env_secret(s, "OPENAI_API_KEY");
        hc.max_in_flight = cfg_value<std::size_t>(s, "max_in_flight", hc.max_in_flight);
        auto transport = make_http_transport(url, std::chrono::seconds(cfg_value<long long>(s, "timeout_s", 120)));
        rt.chat_owned.push_back(std::make_unique<HttpChatBackend>(hc, std::move(transport), retry));
        return rt.chat_owned.back().get();
    };
    rt.prover = build(cfg.at("prover"));
    rt.formalizer = cfg.contains("formalizer") ? build(cfg.at("formalizer")) : rt.prover;
    rt.judge = cfg.contains("judge") ? build(cfg.at("judge")) : rt.prover;
}

void make_verifier(Runtime& rt, const ojson& cfg, const std::string& mock_dir) {
    if (auto script = mock_file(mock_dir, "verifier.jsonl")) {
        rt.verifier = std::make_unique<MockVerifier>(*script);
        return;
    }
    LeanCheckerConfig lc;
    if (cfg.contains("verifier")) {
        const auto& v = cfg.at("verifier");
        lc.command = cfg_value<std::vector<std::string>>(v, "command", lc.command);
        if (auto dir = cfg_value<std::string>(v, "project_dir", ""); !dir.empty()) lc.project_dir = dir;
        if (auto root = cfg_value<std::string>(v, "workspace_root", ""); !root.empty()) lc.workspace_root = root;
        rt.verify_timeout = std::chrono::milliseconds(
            static_cast<long long>(cfg_value<double>(v, "timeout_s", 60.0) * 1000.0));
    }
    rt.verifier = std::make_unique<LeanVerifier>(lc);
}

std::shared_ptr<GraphStore> load_graph(const std::string& dir, EmbeddingCache* embedder, std::ostream& err) {
    if (dir.empty()) throw ConfigError("--graph is required");
    const fs::path d(dir);
    if (!fs::is_directory(d)) throw ConfigError("graph directory not found: " + dir);
    for (const char* f : {"nodes.jsonl", "edges.csv"})
        if (!fs::exists(d / f)) throw ConfigError("graph directory " + dir + " has no " + f);
    auto store = std::make_shared<GraphStore>(GraphStore::load(d / "nodes.jsonl", d / "edges.csv"));
    if (fs::exists(d / "embeddings.bin")) {
        attach_embeddings(*store, d / "embeddings.bin");
    } else if (embedder) {
        err << "embeddings.bin missing; embedding " << store->nodes().size() << " nodes\n";
        std::vector<std::string> texts;
        for (const auto& n : store->nodes()) texts.push_back(node_embedding_text(n));
        auto vectors = embedder->embed_many(texts);
        for (std::size_t i = 0; i < vectors.size(); ++i) store->set_embedding(store->nodes()[i].id, vectors[i]);
    } else {
        throw ConfigError("graph directory " + dir + " has no embeddings.bin and no embedding provider is configured");
    }
    store->seal();
    return store;
}

// ---------------------------------------------------------------------------
// Shared options

struct RunOptions {
    std::string graph;
    std::string mock_dir;
    std::string config;
    std::string method = "graph";
    std::size_t r = 3;
    std::size_t d = 2;
    std::size_t k = 5;
    double temperature = 0.0;
    std::uint64_t seed = 0;
    double timeout_s = 0.0;
};

void add_run_options(CLI::App* sub, RunOptions& o) {
    sub->add_option("--graph", o.graph, "Graph directory (nodes.jsonl, edges.csv, embeddings.bin)");
    sub->add_option("--mock-dir", o.mock_dir, "Directory with chat.jsonl, verifier.jsonl, embeddings.jsonl");
    sub->add_option("--config", o.config, "JSON config for live backends");
    sub->add_option("--method", o.method, "base, rag or graph")->check(CLI::IsMember({"base", "rag", "graph"}));
    sub->add_option("--r", o.r, "Attempts per problem")->check(CLI::PositiveNumber);
    sub->add_option("--d", o.d, "Maximum traversal depth")->check(CLI::NonNegativeNumber);
    sub->add_option("--k", o.k, "Top-k per hop")->check(CLI::PositiveNumber);
    sub->add_option("--temperature", o.temperature, "Sampling temperature (0: greedy)");
    sub->add_option("--seed", o.seed, "Sampling seed");
    sub->add_option("--timeout", o.timeout_s, "Verifier timeout in seconds");
}

RunConfig run_config(const RunOptions& o, CLI::App* sub, const Runtime& rt) {
    RunConfig c;
    c.method = *parse_method(o.method);
    c.attempts = o.r;
    c.max_depth = o.d;
    c.top_k = o.k;
    c.sampling.temperature = o.temperature;
    if (sub->count("--seed")) {
        c.seed = o.seed;
        c.sampling.seed = o.seed;
    }
    c.verify_timeout = o.timeout_s > 0 ? std::chrono::milliseconds(static_cast<long long>(o.timeout_s * 1000.0))
                                       : rt.verify_timeout;
    return c;
}

Runtime build_runtime(const RunOptions& o, std::ostream& err) {
    if (o.mock_dir.empty() && o.config.empty()) throw ConfigError("pass --mock-dir or --config to select backends");
    const ojson cfg = load_config(o.config);
    Runtime rt;
    const Method method = *parse_method(o.method);
    if (method != Method::base || !o.graph.empty()) {
        rt.embedder = make_embedder(cfg, o.mock_dir);
        rt.store = load_graph(o.graph, rt.embedder.get(), err);
        if (method != Method::base) {
            if (!rt.embedder) throw ConfigError("method " + o.method + " needs an embedding provider");
            rt.retriever = std::make_unique<Retriever>(rt.store, rt.embedder);
        }
    }
    make_chat(rt, cfg, o.mock_dir);
    make_verifier(rt, cfg, o.mock_dir);
    return rt;
}

Problem pick_problem(const std::string& file, const std::string& name) {
    auto problems = load_dataset(file);
    if (problems.empty()) throw ConfigError("no problems in " + file);
    if (name.empty()) {
        if (problems.size() > 1) throw ConfigError(file + " holds several problems; choose one with --name");
        return problems.front();
    }
    for (auto& p : problems)
        if (p.name == name) return p;
    throw ConfigError("no problem named '" + name + "' in " + file);
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty())
        out << text;
    else
        text::write_file(path, text);
}

std::size_t config_workers(const std::string& config_path) {
    return cfg_value<std::size_t>(load_config(config_path), "workers", 1);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_ingest(const std::string& xml, const std::string& out_dir, std::ostream& out) {
    if (!fs::exists(xml)) throw ConfigError("dump not found: " + xml);
    auto in = open_dump(xml);
    auto corpus = build_corpus(*in);
    write_corpus(corpus, out_dir);
    out << "nodes: " << corpus.nodes.size() << "\nedges: " << corpus.edges.size() << "\n";
    return kExitOk;
}

int cmd_embed(const std::string& graph, const std::string& provider, const std::string& mock_dir,
              const std::string& out_path, std::ostream& out) {
    if (provider.empty() && mock_dir.empty()) throw ConfigError("pass --provider CONFIG or --mock-dir");
    auto embedder = make_embedder(load_config(provider), mock_dir);
    if (!embedder) throw ConfigError("no embedding provider configured");
    if (graph.empty() || !fs::is_directory(graph)) throw ConfigError("graph directory not found: " + graph);
    const fs::path d(graph);
    auto store = GraphStore::load(d / "nodes.jsonl", d / "edges.csv");
    std::vector<std::string> texts;
    for (const auto& n : store.nodes()) texts.push_back(node_embedding_text(n));
    auto vectors = embedder->embed_many(texts);
    std::vector<EmbeddingRecord> records;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        store.set_embedding(store.nodes()[i].id, vectors[i]);  // validates
        records.emplace_back(store.nodes()[i].id, std::move(vectors[i]));
    }
    const fs::path target = out_path.empty() ? d / "embeddings.bin" : fs::path(out_path);
    write_embeddings(target, records);
    out << "embedded " << records.size() << " nodes (dimension " << store.dimension() << ") -> " << target.string()
        << "\n";
    return kExitOk;
}

int cmd_query(const RunOptions& o, const std::string& query_text, bool show_context, std::ostream& out,
              std::ostream& err) {
    const ojson cfg = load_config(o.config);
    auto embedder = make_embedder(cfg, o.mock_dir);
    if (!embedder) throw ConfigError("query needs an embedding provider (--mock-dir or --config)");
    auto store = load_graph(o.graph, embedder.get(), err);
    Retriever retriever(store, embedder);
    RetrievalQuery q;
    q.query_text = query_text;
    q.k = o.k;
    q.depth = o.d;
    auto ctx = retriever.retrieve(q);
    auto entries = ctx.entries;
    std::stable_sort(entries.begin(), entries.end(), [](const ContextEntry& a, const ContextEntry& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    for (const auto& e : entries) {
        char score[32];
        std::snprintf(score, sizeof score, "%.6f", e.score);
        out << score << "\thop " << e.hop << "\t" << e.id << "\t" << store->node(e.id).title << "\n";
    }
    if (show_context) out << "\n" << ctx.rendered << "\n";
    return kExitOk;
}

int outcome_exit(const ProofOutcome& o) {
    if (o.status != OutcomeStatus::error) return kExitOk;
    if (!o.attempts.empty() && o.attempts.back().verification.status == VerifyStatus::toolchain_error)
        return kExitConfigError;
    return kExitProblemError;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Knowledge-graph guided theorem proving toolkit", "kgprove"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    std::string xml, out_dir = ".";
    auto* ingest = app.add_subcommand("ingest", "Build nodes.jsonl, edges.csv and stats.json from a wiki XML dump");
    ingest->add_option("--xml", xml, "Dump path (.xml or .xml.gz)")->required();
    ingest->add_option("--out", out_dir, "Output directory")->required();

    std::string embed_graph, provider, embed_mock, embed_out;
    auto* embed = app.add_subcommand("embed", "Compute the embeddings.bin sidecar for a graph");
    embed->add_option("--graph", embed_graph, "Graph directory")->required();
    embed->add_option("--provider", provider, "JSON config with an 'embedding' section");
    embed->add_option("--mock-dir", embed_mock, "Directory with embeddings.jsonl");
    embed->add_option("--out", embed_out, "Output path (default GRAPH/embeddings.bin)");

    RunOptions qopt;
    std::string query_text;
    bool show_context = false;
    auto* query = app.add_subcommand("query", "Retrieve graph context for a text");
    query->add_option("--graph", qopt.graph, "Graph directory")->required();
    query->add_option("--text", query_text, "Query text")->required();
    query->add_option("--k", qopt.k, "Top-k per hop")->check(CLI::PositiveNumber);
    query->add_option("--d", qopt.d, "Traversal depth")->check(CLI::NonNegativeNumber);
    query->add_option("--mock-dir", qopt.mock_dir, "Directory with embeddings.jsonl");
    query->add_option("--config", qopt.config, "JSON config with an 'embedding' section");
    query->add_flag("--show-context", show_context, "Also print the rendered context");

    RunOptions popt;
    std::string problem_file, problem_name, prove_out;
    auto* prove_cmd = app.add_subcommand("prove", "Run the prove loop on one problem");
    add_run_options(prove_cmd, popt);
    prove_cmd->add_option("--problem", problem_file, "Problem JSON/JSONL file")->required();
    prove_cmd->add_option("--name", problem_name, "Problem name when the file holds several");
    prove_cmd->add_option("--out", prove_out, "Write the outcome JSON here instead of stdout");

    RunOptions bopt;
    std::string dataset, bench_out = "bench-out", format_hint;
    std::size_t workers = 0, mustard = 0;
    auto* bench = app.add_subcommand("bench", "Run the prove loop over a dataset and write a report");
    add_run_options(bench, bopt);
    bench->add_option("--dataset", dataset, "Dataset JSONL")->required();
    bench->add_option("--out", bench_out, "Report directory");
    bench->add_option("--workers", workers, "Parallel problems (default from config, else 1)");
    bench->add_option("--format", format_hint, "jsonl, minif2f, proofnet or mustard");
    bench->add_option("--subset", mustard, "Seeded subset size (mustard format)");

    RunOptions topt;
    std::string ts_file, ts_name, ts_out;
    std::size_t beam = 2, depth = 2;
    auto* tree = app.add_subcommand("tree-search", "Judged beam search over candidate proofs");
    add_run_options(tree, topt);
    tree->add_option("--beam", beam, "Beam width")->check(CLI::PositiveNumber);
    tree->add_option("--depth", depth, "Search iterations")->check(CLI::PositiveNumber);
    tree->add_option("--problem", ts_file, "Problem JSON/JSONL file")->required();
    tree->add_option("--name", ts_name, "Problem name when the file holds several");
    tree->add_option("--out", ts_out, "Write the search trace here instead of stdout");

    RunOptions nopt;
    std::string bn_file, bn_name, bn_out;
    std::size_t n_candidates = 3;
    auto* bon = app.add_subcommand("best-of-n", "Generate N informal proofs and keep the best judged one");
    add_run_options(bon, nopt);
    bon->add_option("--n", n_candidates, "Candidates")->check(CLI::PositiveNumber);
    bon->add_option("--problem", bn_file, "Problem JSON/JSONL file")->required();
    bon->add_option("--name", bn_name, "Problem name when the file holds several");
    bon->add_option("--out", bn_out, "Write the ranking here instead of stdout");

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* failed = &app;
        for (auto* sub : app.get_subcommands()) failed = sub;
        err << failed->help();
        return kExitConfigError;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(xml, out_dir, out);
        if (embed->parsed()) return cmd_embed(embed_graph, provider, embed_mock, embed_out, out);
        if (query->parsed()) return cmd_query(qopt, query_text, show_context, out, err);
        if (prove_cmd->parsed()) {
            auto problem = pick_problem(problem_file, problem_name);
            auto rt = build_runtime(popt, err);
            auto outcome = prove(problem, run_config(popt, prove_cmd, rt), rt.services());
            write_output(prove_out, to_json(outcome).dump(2) + "\n", out);
            if (outcome.error_message) err << "error: " << *outcome.error_message << "\n";
            return outcome_exit(outcome);
        }
        if (bench->parsed()) {
            auto problems = load_dataset(dataset, format_hint.empty() ? std::nullopt : std::optional(format_hint));
            if (mustard > 0) problems = select_mustard_subset(std::move(problems), mustard);
            auto rt = build_runtime(bopt, err);
            BenchOptions opts;
            opts.workers = workers ? workers : config_workers(bopt.config);
            const std::size_t total = problems.size();
            opts.on_outcome = [&](std::size_t i, const ProofOutcome& o) {
                err << "[" << i + 1 << "/" << total << "] " << o.problem_name << ": " << to_string(o.status);
                if (o.winning_attempt) err << " (attempt " << *o.winning_attempt << ")";
                err << "\n";
            };
            auto report = run_bench(problems, run_config(bopt, bench, rt), rt.services(), opts);
            emit_report(report, bench_out);
            out << render_summary_md(report);
            int code = kExitOk;
            for (const auto& o : report.per_problem) code = std::max(code, outcome_exit(o));
            return code;
        }
        if (tree->parsed()) {
            auto problem = pick_problem(ts_file, ts_name);
            auto rt = build_runtime(topt, err);
            auto cfg = run_config(topt, tree, rt);
            cfg.beam_width = beam;
            cfg.search_depth = depth;
            auto result = tree_search(problem, cfg, rt.services());
            write_output(ts_out, to_json(result).dump(2) + "\n", out);
            return kExitOk;
        }
        if (bon->parsed()) {
            auto problem = pick_problem(bn_file, bn_name);
            auto rt = build_runtime(nopt, err);
            auto cfg = run_config(nopt, bon, rt);
            cfg.n_candidates = n_candidates;
            auto result = best_of_n(problem, cfg, rt.services());
            write_output(bn_out, to_json(result).dump(2) + "\n", out);
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const DatasetError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitProblemError;
    }
    err << app.help();
    return kExitConfigError;
}

}  // namespace kgp
