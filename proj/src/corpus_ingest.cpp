#include <json.hpp>

#include <array>
#include <set>
#include <tuple>
#include <unordered_map>

#include "kgprover/corpus.hpp"
#include "kgprover/error.hpp"
#include "kgprover/text_util.hpp"

namespace kgp {

namespace {

constexpr std::array<std::string_view, 5> kNodeTypeNames = {
    "definition", "theorem", "proof", "axiom", "other",
};

constexpr std::array<std::string_view, kRelTypeCount> kRelTypeNames = {
    "LINK",           "USES_DEFINITION",  "RELATED_DEFINITION", "USES_AXIOM",
    "SIMILAR_PROOF",  "PROOF_DEPENDENCY", "PROOF_TECHNIQUE",
};

constexpr int kMaxRedirectHops = 8;

}  // namespace

std::string_view to_string(NodeType type) { return kNodeTypeNames[static_cast<std::size_t>(type)]; }
std::string_view to_string(RelType type) { return kRelTypeNames[static_cast<std::size_t>(type)]; }

std::optional<NodeType> parse_node_type(std::string_view s) {
    for (std::size_t i = 0; i < kNodeTypeNames.size(); ++i)
        if (kNodeTypeNames[i] == s) return static_cast<NodeType>(i);
    return std::nullopt;
}

std::optional<RelType> parse_rel_type(std::string_view s) {
    for (std::size_t i = 0; i < kRelTypeNames.size(); ++i)
        if (kRelTypeNames[i] == s) return static_cast<RelType>(i);
    return std::nullopt;
}

Corpus build_corpus(std::istream& xml) {
    Corpus corpus;
    auto& stats = corpus.stats;
    std::unordered_map<std::string, NodeId> by_title;
    std::unordered_map<std::string, std::string> redirects;

    DumpReader reader(xml);
    while (auto page = reader.next()) {
        ++stats.pages_seen;
        auto type = page_node_type(*page);
        if (!type) {
            ++stats.pages_dropped_namespace;
            continue;
        }
        if (page->redirect_target) {
            ++stats.redirects;
            redirects.emplace(text::title_key(page->title), *page->redirect_target);
            continue;
        }
        Node node;
        node.id = corpus.nodes.size();
        node.type = *type;
        node.name = extract_name(page->title, page->ns);
        node.title = std::move(page->title);
        node.content = clean_wikitext(page->wikitext);
        by_title.emplace(text::title_key(node.title), node.id);
        corpus.nodes.push_back(std::move(node));
    }
    stats.pages_skipped_untitled = reader.warnings().size();
    stats.pages_seen += stats.pages_skipped_untitled;
    stats.pages_kept = corpus.nodes.size();

    auto resolve = [&](const std::string& title) -> std::optional<NodeId> {
        std::string key = text::title_key(title);
        for (int hop = 0; hop <= kMaxRedirectHops; ++hop) {
            if (auto it = by_title.find(key); it != by_title.end()) return it->second;
            auto r = redirects.find(key);
            if (r == redirects.end()) return std::nullopt;
            key = text::title_key(r->second);
        }
        return std::nullopt;
    };

    std::set<std::tuple<NodeId, NodeId, RelType>> seen;
    for (const auto& node : corpus.nodes) {
        for (const auto& link : extract_links(node.content)) {
            auto target = resolve(link.target_title);
            if (!target) {
                ++stats.edges_dropped_dangling;
                continue;
            }
            if (*target == node.id) {
                ++stats.edges_dropped_self;
                continue;
            }
            const auto& target_title = corpus.nodes[*target].title;
            RelType rel = classify_relationship(node, target_title, link.context_window);
            if (!seen.emplace(node.id, *target, rel).second) {
                ++stats.edges_dropped_duplicate;
                continue;
            }
            corpus.edges.push_back({node.id, *target, rel});
        }
    }
    stats.edges_kept = corpus.edges.size();
    return corpus;
}

std::string node_to_jsonl(const Node& node) {
    nlohmann::ordered_json j;
    j["id"] = node.id;
    j["type"] = to_string(node.type);
    j["title"] = node.title;
    j["name"] = node.name;
    j["content"] = node.content;
    return j.dump() + "\n";
}

std::string edges_csv_header() { return "from_id,to_id,type\n"; }

std::string edge_to_csv(const Edge& edge) {
    return std::to_string(edge.from_id) + "," + std::to_string(edge.to_id) + "," +
           std::string(to_string(edge.type)) + "\n";
}

std::string stats_to_json(const IngestStats& stats) {
    nlohmann::ordered_json j;
    j["pages_seen"] = stats.pages_seen;
    j["pages_kept"] = stats.pages_kept;
    j["edges_kept"] = stats.edges_kept;
    j["edges_dropped_dangling"] = stats.edges_dropped_dangling;
    j["edges_dropped_self"] = stats.edges_dropped_self;
    j["edges_dropped_duplicate"] = stats.edges_dropped_duplicate;
    j["pages_dropped_namespace"] = stats.pages_dropped_namespace;
    j["pages_skipped_untitled"] = stats.pages_skipped_untitled;
    j["redirects"] = stats.redirects;
    return j.dump(2) + "\n";
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string nodes;
    for (const auto& node : corpus.nodes) nodes += node_to_jsonl(node);
    std::string edges = edges_csv_header();
    for (const auto& edge : corpus.edges) edges += edge_to_csv(edge);
    text::write_file(dir / "nodes.jsonl", nodes);
    text::write_file(dir / "edges.csv", edges);
    text::write_file(dir / "stats.json", stats_to_json(corpus.stats));
}

}  // namespace kgp
