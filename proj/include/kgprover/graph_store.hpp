#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgprover/corpus.hpp"

namespace kgp {

enum class Direction { out, in, both };

struct Neighbor {
    const Node* node = nullptr;
    RelType rel = RelType::LINK;
    Direction direction = Direction::out;  // out or in, never both
};

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    std::array<std::size_t, kRelTypeCount> per_type{};

    std::size_t count(RelType t) const { return per_type[static_cast<std::size_t>(t)]; }
};

/// Typed property graph over wiki nodes. Built single-threaded, then sealed;
/// a sealed store is immutable and safe to share between reader threads.
///
/// References returned by node() and neighbors() stay valid until the next
/// add_node() call, i.e. for the store's whole lifetime once sealed.
class GraphStore {
public:
    void add_node(Node node);
    /// Both endpoints must already exist.
    void add_edge(const Edge& edge);
    /// Values must be finite with non-zero norm, and match the store-wide
    /// dimension fixed by the first attached vector.
    void set_embedding(NodeId id, std::vector<float> values);

    void seal() noexcept { sealed_ = true; }
    bool sealed() const noexcept { return sealed_; }

    bool contains(NodeId id) const { return index_.contains(id); }
    const Node& node(NodeId id) const;
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// Sorted by neighbor id, then relationship name, then direction (out first).
    std::vector<Neighbor> neighbors(NodeId id, Direction direction,
                                    const std::optional<std::set<RelType>>& types = std::nullopt) const;

    std::optional<std::span<const float>> embedding(NodeId id) const;
    std::size_t dimension() const noexcept { return dimension_; }
    bool has_all_embeddings() const noexcept;

    GraphStats stats() const;

    /// Reads the corpus output formats; referential integrity is re-checked.
    static GraphStore load(const std::filesystem::path& nodes_path,
                           const std::filesystem::path& edges_path);

    /// Structural equality (nodes and edges; embeddings excluded).
    bool same_graph(const GraphStore& other) const {
        return nodes_ == other.nodes_ && edges_ == other.edges_;
    }

private:
    struct Adjacent {
        NodeId neighbor;
        RelType rel;
        Direction direction;
    };

    std::size_t index_of(NodeId id) const;
    void require_unsealed() const;

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::vector<std::vector<Adjacent>> adjacency_;
    std::vector<std::vector<float>> embeddings_;
    std::size_t embedded_count_ = 0;
    std::size_t dimension_ = 0;
    bool sealed_ = false;
};

/// Writes nodes.jsonl and edges.csv into `dir`, byte-compatible with ingest output.
void export_csv(const GraphStore& store, const std::filesystem::path& dir);

// Embedding sidecar: repeated records of (u64 id, u32 dimension, dimension x f32),
// all little-endian.
using EmbeddingRecord = std::pair<NodeId, std::vector<float>>;
void write_embeddings(const std::filesystem::path& path, std::span<const EmbeddingRecord> records);
std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path);

/// Reads a sidecar and attaches every vector; ids must be known and unique.
void attach_embeddings(GraphStore& store, const std::filesystem::path& vectors_path);

}  // namespace kgp
