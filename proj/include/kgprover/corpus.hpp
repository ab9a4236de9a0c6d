#pragma once

// Wiki dump ingestion: streaming page reader, namespace filter, wikitext
// cleaning, link extraction and typed-relationship classification.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgp {

using NodeId = std::uint64_t;

enum class NodeType { definition, theorem, proof, axiom, other };

enum class RelType {
    LINK,
    USES_DEFINITION,
    RELATED_DEFINITION,
    USES_AXIOM,
    SIMILAR_PROOF,
    PROOF_DEPENDENCY,
    PROOF_TECHNIQUE,
};

inline constexpr std::size_t kRelTypeCount = 7;

std::string_view to_string(NodeType type);
std::string_view to_string(RelType type);
std::optional<NodeType> parse_node_type(std::string_view s);
std::optional<RelType> parse_rel_type(std::string_view s);

struct RawPage {
    std::string title;
    std::string ns;  // namespace name; empty for the main namespace
    std::string wikitext;
    std::optional<std::string> redirect_target;
};

struct Node {
    NodeId id = 0;
    NodeType type = NodeType::other;
    std::string title;
    std::string name;
    std::string content;

    bool operator==(const Node&) const = default;
};

struct Edge {
    NodeId from_id = 0;
    NodeId to_id = 0;
    RelType type = RelType::LINK;

    bool operator==(const Edge&) const = default;
};

/// Pull-based MediaWiki export reader. Holds at most one page plus one
/// parser buffer in memory regardless of dump size.
class DumpReader {
public:
    explicit DumpReader(std::istream& in);
    ~DumpReader();
    DumpReader(const DumpReader&) = delete;
    DumpReader& operator=(const DumpReader&) = delete;

    /// Next page in document order, or nullopt at end of input.
    /// Throws ParseError on malformed XML.
    std::optional<RawPage> next();

    /// Pages skipped for lacking a title, one message each.
    const std::vector<std::string>& warnings() const noexcept;
    std::size_t bytes_consumed() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::vector<RawPage> parse_dump(std::istream& in, std::vector<std::string>* warnings = nullptr);

/// Opens a dump file, transparently inflating gzip (detected by magic bytes).
std::unique_ptr<std::istream> open_dump(const std::filesystem::path& path);

/// Node type implied by a page's namespace and title; nullopt when the page
/// lies outside the definition/axiom/theorem/proof namespaces.
std::optional<NodeType> page_node_type(const RawPage& page);

/// Node type a link target most likely has, judged from its title alone.
NodeType title_node_type(std::string_view title);

struct FilterCounts {
    std::size_t kept = 0;
    std::map<std::string, std::size_t> dropped_by_namespace;
};

std::vector<RawPage> filter_namespaces(std::vector<RawPage> pages, FilterCounts* counts = nullptr);

std::string clean_wikitext(std::string_view raw);

/// Strips the namespace prefix ("Definition:Group" -> "Group").
std::string extract_name(std::string_view title, std::string_view ns);

struct LinkRef {
    std::string target_title;
    std::string context_window;

    bool operator==(const LinkRef&) const = default;
};

std::vector<LinkRef> extract_links(std::string_view content);

RelType classify_relationship(const Node& source, std::string_view target_title,
                              std::string_view context_window);

struct IngestStats {
    std::size_t pages_seen = 0;
    std::size_t pages_kept = 0;
    std::size_t pages_dropped_namespace = 0;
    std::size_t pages_skipped_untitled = 0;
    std::size_t redirects = 0;
    std::size_t edges_kept = 0;
    std::size_t edges_dropped_dangling = 0;
    std::size_t edges_dropped_self = 0;
    std::size_t edges_dropped_duplicate = 0;

    bool operator==(const IngestStats&) const = default;
};

struct Corpus {
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    IngestStats stats;
};

Corpus build_corpus(std::istream& xml);

// Output formats shared with graph_store.
std::string node_to_jsonl(const Node& node);
std::string edges_csv_header();
std::string edge_to_csv(const Edge& edge);
std::string stats_to_json(const IngestStats& stats);

/// Writes nodes.jsonl, edges.csv and stats.json into `dir`.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace kgp
