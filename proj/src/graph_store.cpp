#include "kgprover/graph_store.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "kgprover/error.hpp"
#include "kgprover/text_util.hpp"

namespace kgp {

void GraphStore::require_unsealed() const {
    if (sealed_) throw SealedError();
}

std::size_t GraphStore::index_of(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw NotFoundError("unknown node id " + std::to_string(id));
    return it->second;
}

void GraphStore::add_node(Node node) {
    require_unsealed();
    if (index_.contains(node.id)) throw Error("duplicate node id " + std::to_string(node.id));
    index_.emplace(node.id, nodes_.size());
    nodes_.push_back(std::move(node));
    adjacency_.emplace_back();
    embeddings_.emplace_back();
}

void GraphStore::add_edge(const Edge& edge) {
    require_unsealed();
    auto from = index_of(edge.from_id);
    auto to = index_of(edge.to_id);
    edges_.push_back(edge);
    adjacency_[from].push_back({edge.to_id, edge.type, Direction::out});
    adjacency_[to].push_back({edge.from_id, edge.type, Direction::in});
}

namespace {

void validate_vector(NodeId id, const std::vector<float>& values, std::size_t dimension) {
    if (values.empty()) throw DimensionError("empty embedding for node " + std::to_string(id));
    if (dimension != 0 && values.size() != dimension)
        throw DimensionError("embedding for node " + std::to_string(id) + " has dimension " +
                             std::to_string(values.size()) + ", store dimension is " +
                             std::to_string(dimension));
    double norm = 0.0;
    for (float v : values) {
        if (!std::isfinite(v))
            throw DomainError("non-finite embedding value for node " + std::to_string(id));
        norm += static_cast<double>(v) * v;
    }
    if (norm == 0.0) throw DomainError("zero-norm embedding for node " + std::to_string(id));
}

}  // namespace

void GraphStore::set_embedding(NodeId id, std::vector<float> values) {
    require_unsealed();
    auto idx = index_of(id);
    validate_vector(id, values, dimension_);
    dimension_ = values.size();
    if (embeddings_[idx].empty()) ++embedded_count_;
    embeddings_[idx] = std::move(values);
}

const Node& GraphStore::node(NodeId id) const { return nodes_[index_of(id)]; }

std::vector<Neighbor> GraphStore::neighbors(NodeId id, Direction direction,
                                            const std::optional<std::set<RelType>>& types) const {
    std::vector<Neighbor> out;
    for (const auto& adj : adjacency_[index_of(id)]) {
        if (direction != Direction::both && adj.direction != direction) continue;
        if (types && !types->contains(adj.rel)) continue;
        out.push_back({&nodes_[index_.at(adj.neighbor)], adj.rel, adj.direction});
    }
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.node->id != b.node->id) return a.node->id < b.node->id;
        if (a.rel != b.rel) return to_string(a.rel) < to_string(b.rel);
        return a.direction == Direction::out && b.direction == Direction::in;
    });
    return out;
}

std::optional<std::span<const float>> GraphStore::embedding(NodeId id) const {
    const auto& v = embeddings_[index_of(id)];
    if (v.empty()) return std::nullopt;
    return std::span<const float>(v);
}

bool GraphStore::has_all_embeddings() const noexcept {
    return !nodes_.empty() && embedded_count_ == nodes_.size();
}

GraphStats GraphStore::stats() const {
    GraphStats s;
    s.node_count = nodes_.size();
    s.edge_count = edges_.size();
    for (const auto& e : edges_) ++s.per_type[static_cast<std::size_t>(e.type)];
    return s;
}

namespace {

std::vector<std::string> split_csv_row(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        auto field = text::trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (field.size() >= 2 && field.front() == '"' && field.back() == '"')
            field = field.substr(1, field.size() - 2);
        fields.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

NodeId parse_id(const std::string& s, const std::string& where, std::size_t line) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw FormatError(where, line, "invalid node id '" + s + "'");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw FormatError(where, line, "node id out of range '" + s + "'");
    }
}

}  // namespace

GraphStore GraphStore::load(const std::filesystem::path& nodes_path,
                            const std::filesystem::path& edges_path) {
    GraphStore store;
    const std::string nodes_name = nodes_path.filename().string();
    const std::string edges_name = edges_path.filename().string();

    std::ifstream nodes_in(nodes_path, std::ios::binary);
    if (!nodes_in) throw Error("cannot open " + nodes_path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(nodes_in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(nodes_name, line_no, e.what());
        }
        Node node;
        try {
            node.id = j.at("id").get<NodeId>();
            auto type = parse_node_type(j.at("type").get<std::string>());
            if (!type) throw FormatError(nodes_name, line_no, "unknown node type");
            node.type = *type;
            node.title = j.at("title").get<std::string>();
            node.name = j.value("name", std::string{});
            node.content = j.value("content", std::string{});
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(nodes_name, line_no, e.what());
        }
        if (store.contains(node.id))
            throw FormatError(nodes_name, line_no, "duplicate node id " + std::to_string(node.id));
        store.add_node(std::move(node));
    }

    std::ifstream edges_in(edges_path, std::ios::binary);
    if (!edges_in) throw Error("cannot open " + edges_path.string());
    line_no = 0;
    bool header_seen = false;
    while (std::getline(edges_in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        auto fields = split_csv_row(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() == 3 && fields[0] == "from_id" && fields[1] == "to_id" && fields[2] == "type")
                continue;
            throw FormatError(edges_name, line_no, "expected header 'from_id,to_id,type'");
        }
        if (fields.size() != 3) throw FormatError(edges_name, line_no, "expected 3 fields");
        Edge edge;
        edge.from_id = parse_id(fields[0], edges_name, line_no);
        edge.to_id = parse_id(fields[1], edges_name, line_no);
        auto rel = parse_rel_type(fields[2]);
        if (!rel) throw FormatError(edges_name, line_no, "unknown relationship type '" + fields[2] + "'");
        edge.type = *rel;
        for (NodeId id : {edge.from_id, edge.to_id})
            if (!store.contains(id))
                throw FormatError(edges_name, line_no, "unknown node id " + std::to_string(id));
        store.add_edge(edge);
    }
    return store;
}

void export_csv(const GraphStore& store, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string nodes;
    for (const auto& node : store.nodes()) nodes += node_to_jsonl(node);
    std::string edges = edges_csv_header();
    for (const auto& edge : store.edges()) edges += edge_to_csv(edge);
    text::write_file(dir / "nodes.jsonl", nodes);
    text::write_file(dir / "edges.csv", edges);
}

namespace {

template <typename T>
void put_le(std::string& out, T value) {
    static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
}

template <typename T>
T get_le(std::string_view data, std::size_t& pos, const std::string& where) {
    if (pos + sizeof(T) > data.size())
        throw FormatError(where, 0, "truncated record at byte " + std::to_string(pos));
    T value;
    std::memcpy(&value, data.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

}  // namespace

void write_embeddings(const std::filesystem::path& path, std::span<const EmbeddingRecord> records) {
    std::string out;
    for (const auto& [id, values] : records) {
        put_le<std::uint64_t>(out, id);
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(values.size()));
        for (float v : values) put_le<float>(out, v);
    }
    text::write_file(path, out);
}

std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path) {
    const std::string data = text::read_file(path);
    const std::string where = path.filename().string();
    std::vector<EmbeddingRecord> records;
    std::size_t pos = 0;
    while (pos < data.size()) {
        auto id = get_le<std::uint64_t>(data, pos, where);
        auto dim = get_le<std::uint32_t>(data, pos, where);
        if (static_cast<std::size_t>(dim) * sizeof(float) > data.size() - pos)
            throw FormatError(where, 0, "truncated vector for node " + std::to_string(id));
        std::vector<float> values(dim);
        for (auto& v : values) v = get_le<float>(data, pos, where);
        records.emplace_back(id, std::move(values));
    }
    return records;
}

void attach_embeddings(GraphStore& store, const std::filesystem::path& vectors_path) {
    if (store.sealed()) throw SealedError();
    auto records = read_embeddings(vectors_path);
    // validate everything first so a bad file leaves the store untouched
    std::size_t dimension = store.dimension();
    std::set<NodeId> seen;
    for (const auto& [id, values] : records) {
        if (!store.contains(id))
            throw NotFoundError("embedding for unknown node id " + std::to_string(id));
        if (!seen.insert(id).second)
            throw FormatError(vectors_path.filename().string(), 0,
                              "duplicate embedding for node " + std::to_string(id));
        validate_vector(id, values, dimension);
        dimension = values.size();
    }
    for (auto& [id, values] : records) store.set_embedding(id, std::move(values));
}

}  // namespace kgp
