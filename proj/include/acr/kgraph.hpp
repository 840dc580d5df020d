#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "acr/corpus.hpp"

namespace acr {

struct Entity {
    std::string entity_id;
    std::string name;
    std::vector<std::string> aliases;
};

struct Triple {
    std::string subject;  // entity_id
    std::string predicate;
    std::string object;  // entity_id

    friend bool operator==(const Triple&, const Triple&) = default;
};

/// Triple store with undirected adjacency and a tokenized-name index for
/// entity linking.
class KnowledgeGraph {
public:
    /// Throws on duplicate id or empty name.
    void add_entity(Entity entity);
    /// Throws on unknown endpoints or an empty predicate.
    void add_triple(Triple triple);

    const Entity* entity(std::string_view id) const;
    const std::map<std::string, Entity, std::less<>>& entities() const noexcept { return entities_; }
    const std::vector<Triple>& triples() const noexcept { return triples_; }
    /// Indexes of triples touching `id`, in file order.
    std::span<const std::size_t> incident(std::string_view id) const;
    /// Entity ids whose tokenized name or alias equals `key` (tokens joined by spaces).
    std::span<const std::string> by_name_key(const std::string& key) const;

private:
    std::map<std::string, Entity, std::less<>> entities_;
    std::vector<Triple> triples_;
    std::unordered_map<std::string, std::vector<std::size_t>> adjacency_;
    std::unordered_map<std::string, std::vector<std::string>> name_index_;
};

/// Tab-separated records:
///   E <id> <name> <alias1|alias2|...>
///   T <subject_id> <predicate> <object_id>
/// Blank lines and lines starting with '#' are ignored. Triples may refer to
/// entities declared later in the file.
KnowledgeGraph load_graph(const std::filesystem::path& path);
void save_graph(const KnowledgeGraph& graph, const std::filesystem::path& path);

/// Tokens joined by single spaces; the matching key for names and concepts.
std::string name_key(std::string_view text);

/// Entities whose tokenized name or alias equals a tokenized concept;
/// deduplicated, ascending entity_id.
std::vector<std::string> link_entities(const KnowledgeGraph& graph, std::span<const std::string> concepts);

struct NeighborTriple {
    std::size_t triple = 0;  // index into KnowledgeGraph::triples()
    int distance = 0;        // hops from the nearest seed to the nearer endpoint

    friend bool operator==(const NeighborTriple&, const NeighborTriple&) = default;
};

/// Breadth-first over undirected adjacency. Returns every triple whose two
/// endpoints both lie within `hops` of some seed, in triple file order.
/// Throws on an unknown seed id or negative hops.
std::vector<NeighborTriple> expand_neighborhood(const KnowledgeGraph& graph, std::span<const std::string> seeds,
                                                int hops = 1);

/// Text "{subject name} {predicate} {object name}.", chunk_id "kg#{index}".
Chunk triple_to_evidence(const KnowledgeGraph& graph, std::size_t triple_index);
std::vector<Chunk> triples_to_evidence(const KnowledgeGraph& graph, std::span<const NeighborTriple> triples);

}  // namespace acr
