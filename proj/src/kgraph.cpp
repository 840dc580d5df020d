#include "acr/kgraph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>

#include "acr/error.hpp"
#include "acr/text.hpp"

namespace acr {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

}  // namespace

std::string name_key(std::string_view text) {
    std::string key;
    for (const auto& t : tokenize(text)) {
        if (!key.empty()) key.push_back(' ');
        key += t;
    }
    return key;
}

void KnowledgeGraph::add_entity(Entity entity) {
    if (entity.entity_id.empty()) throw Error("entity id is empty");
    if (entity.name.empty()) throw Error("entity " + entity.entity_id + " has an empty name");
    if (entities_.count(entity.entity_id)) throw Error("duplicate entity_id " + entity.entity_id);

    std::set<std::string> keys;
    keys.insert(name_key(entity.name));
    for (const auto& alias : entity.aliases) keys.insert(name_key(alias));
    for (const auto& key : keys) {
        if (!key.empty()) name_index_[key].push_back(entity.entity_id);
    }
    entities_.emplace(entity.entity_id, std::move(entity));
}

void KnowledgeGraph::add_triple(Triple triple) {
    if (!entities_.count(triple.subject)) throw Error("triple subject " + triple.subject + " is not a known entity");
    if (!entities_.count(triple.object)) throw Error("triple object " + triple.object + " is not a known entity");
    if (triple.predicate.empty()) throw Error("triple predicate is empty");
    const std::size_t index = triples_.size();
    adjacency_[triple.subject].push_back(index);
    if (triple.object != triple.subject) adjacency_[triple.object].push_back(index);
    triples_.push_back(std::move(triple));
}

const Entity* KnowledgeGraph::entity(std::string_view id) const {
    auto it = entities_.find(id);
    return it == entities_.end() ? nullptr : &it->second;
}

std::span<const std::size_t> KnowledgeGraph::incident(std::string_view id) const {
    auto it = adjacency_.find(std::string(id));
    if (it == adjacency_.end()) return {};
    return it->second;
}

std::span<const std::string> KnowledgeGraph::by_name_key(const std::string& key) const {
    auto it = name_index_.find(key);
    if (it == name_index_.end()) return {};
    return it->second;
}

KnowledgeGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open graph file: " + path.string());

    KnowledgeGraph graph;
    std::vector<std::pair<Triple, std::size_t>> pending;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;
        auto fields = split(line, '\t');
        if (fields[0] == "E") {
            if (fields.size() < 3 || fields.size() > 4) throw FormatError("entity line needs 3 or 4 fields", line_no);
            Entity e{fields[1], fields[2], {}};
            if (fields.size() == 4 && !fields[3].empty()) {
                for (auto& alias : split(fields[3], '|')) {
                    if (!alias.empty()) e.aliases.push_back(std::move(alias));
                }
            }
            try {
                graph.add_entity(std::move(e));
            } catch (const FormatError&) {
                throw;
            } catch (const Error& err) {
                throw FormatError(err.what(), line_no);
            }
        } else if (fields[0] == "T") {
            if (fields.size() != 4) throw FormatError("triple line needs 4 fields", line_no);
            pending.push_back({Triple{fields[1], fields[2], fields[3]}, line_no});
        } else {
            throw FormatError("unknown record type '" + fields[0] + "'", line_no);
        }
    }
    for (auto& [triple, line_no] : pending) {
        if (!graph.entity(triple.subject)) throw FormatError("dangling subject reference " + triple.subject, line_no);
        if (!graph.entity(triple.object)) throw FormatError("dangling object reference " + triple.object, line_no);
        if (triple.predicate.empty()) throw FormatError("empty predicate", line_no);
        graph.add_triple(std::move(triple));
    }
    return graph;
}

void save_graph(const KnowledgeGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write graph file: " + path.string());
    for (const auto& [id, e] : graph.entities()) {
        out << "E\t" << e.entity_id << '\t' << e.name << '\t';
        for (std::size_t i = 0; i < e.aliases.size(); ++i) out << (i ? "|" : "") << e.aliases[i];
        out << '\n';
    }
    for (const auto& t : graph.triples()) out << "T\t" << t.subject << '\t' << t.predicate << '\t' << t.object << '\n';
    if (!out) throw Error("failed writing graph file: " + path.string());
}

std::vector<std::string> link_entities(const KnowledgeGraph& graph, std::span<const std::string> concepts) {
    std::set<std::string> linked;
    for (const auto& concept_text : concepts) {
        const auto key = name_key(concept_text);
        if (key.empty()) continue;
        for (const auto& id : graph.by_name_key(key)) linked.insert(id);
    }
    return {linked.begin(), linked.end()};
}

std::vector<NeighborTriple> expand_neighborhood(const KnowledgeGraph& graph, std::span<const std::string> seeds,
                                                int hops) {
    if (hops < 0) throw ConfigError("hops must be >= 0");
    std::unordered_map<std::string, int> dist;
    std::deque<std::string> frontier;
    for (const auto& s : seeds) {
        if (!graph.entity(s)) throw Error("unknown seed entity " + s);
        if (dist.emplace(s, 0).second) frontier.push_back(s);
    }
    while (!frontier.empty()) {
        const std::string current = std::move(frontier.front());
        frontier.pop_front();
        const int d = dist.at(current);
        if (d == hops) continue;
        for (std::size_t ti : graph.incident(current)) {
            const auto& t = graph.triples()[ti];
            const std::string& other = t.subject == current ? t.object : t.subject;
            if (dist.emplace(other, d + 1).second) frontier.push_back(other);
        }
    }

    std::vector<NeighborTriple> out;
    for (std::size_t ti = 0; ti < graph.triples().size(); ++ti) {
        const auto& t = graph.triples()[ti];
        auto s = dist.find(t.subject), o = dist.find(t.object);
        if (s != dist.end() && o != dist.end()) out.push_back({ti, std::min(s->second, o->second)});
    }
    return out;
}

Chunk triple_to_evidence(const KnowledgeGraph& graph, std::size_t triple_index) {
    const auto& t = graph.triples().at(triple_index);
    Chunk c;
    c.doc_id = std::string(kGraphDocId);
    c.ordinal = triple_index;
    c.chunk_id = make_chunk_id(kGraphDocId, triple_index);
    c.text = graph.entity(t.subject)->name + " " + t.predicate + " " + graph.entity(t.object)->name + ".";
    c.char_start = 0;
    c.char_end = scalar_length(c.text);
    return c;
}

std::vector<Chunk> triples_to_evidence(const KnowledgeGraph& graph, std::span<const NeighborTriple> triples) {
    std::vector<Chunk> out;
    out.reserve(triples.size());
    for (const auto& nt : triples) out.push_back(triple_to_evidence(graph, nt.triple));
    return out;
}

}  // namespace acr
