#include "acr/providers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "acr/error.hpp"
#include "acr/text.hpp"

namespace acr {

void ProviderConfig::validate() const {
    if (base_url.empty()) throw ConfigError("provider base_url is empty");
    if (!(timeout_s > 0.0)) throw ConfigError("provider timeout must be positive");
    if (max_retries < 0) throw ConfigError("provider max_retries must be >= 0");
    if (backoff_base_s < 0.0) throw ConfigError("provider backoff must be >= 0");
}

void normalize(Embedding& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq == 0.0) return;
    const double norm = std::sqrt(sq);
    for (double& x : v) x /= norm;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("cosine of vectors with different dimensions");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

// Returns the offset just past "NAME:" if `line` opens the named section.
std::optional<std::size_t> section_start(std::string_view line, std::string_view name) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '*' || line[i] == '#')) ++i;
    if (line.size() - i < name.size()) return std::nullopt;
    if (upper(line.substr(i, name.size())) != upper(name)) return std::nullopt;
    i += name.size();
    while (i < line.size() && (line[i] == ' ' || line[i] == '*')) ++i;
    if (i >= line.size() || line[i] != ':') return std::nullopt;
    ++i;
    while (i < line.size() && line[i] == '*') ++i;
    return i;
}

}  // namespace

std::map<std::string, std::string> parse_sections(std::string_view text, std::span<const std::string_view> names) {
    std::map<std::string, std::string> sections;
    std::string* current = nullptr;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = text.substr(pos, nl - pos);
        bool opened = false;
        for (auto name : names) {
            if (auto start = section_start(line, name)) {
                current = &sections[upper(name)];
                current->clear();
                current->append(line.substr(*start));
                opened = true;
                break;
            }
        }
        if (!opened && current) {
            current->push_back('\n');
            current->append(line);
        }
        pos = nl + 1;
    }
    for (auto& [_, value] : sections) value = trim(value);
    return sections;
}

bool label_less(std::string_view a, std::string_view b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
        const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
        if (da && db) {
            std::size_t ei = i, ej = j;
            while (ei < a.size() && std::isdigit(static_cast<unsigned char>(a[ei]))) ++ei;
            while (ej < b.size() && std::isdigit(static_cast<unsigned char>(b[ej]))) ++ej;
            auto na = a.substr(i, ei - i), nb = b.substr(j, ej - j);
            while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
            while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
            if (na.size() != nb.size()) return na.size() < nb.size();
            if (na != nb) return na < nb;
            i = ei;
            j = ej;
        } else {
            if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
            ++i;
            ++j;
        }
    }
    if ((a.size() - i) != (b.size() - j)) return (a.size() - i) < (b.size() - j);
    return a < b;
}

}  // namespace acr
