#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mlmbias/common.hpp"

namespace mlmbias {

enum class AnimalCategory { farm, companion, other };

inline std::string to_string(AnimalCategory c) {
    switch (c) {
        case AnimalCategory::farm: return "farm";
        case AnimalCategory::companion: return "companion";
        case AnimalCategory::other: return "other";
    }
    throw Error("bad category");
}

inline AnimalCategory category_from_string(std::string_view s) {
    if (s == "farm") return AnimalCategory::farm;
    if (s == "companion") return AnimalCategory::companion;
    if (s == "other") return AnimalCategory::other;
    throw Error("unknown category: " + std::string(s));
}

struct AnimalEntry {
    std::string name;                 // lowercase, single word
    AnimalCategory category = AnimalCategory::other;
    std::uint64_t corpus_frequency = 0;
};

inline void validate_name(std::string_view name) {
    require(!name.empty(), "animal name is empty");
    for (unsigned char c : name) {
        require(!std::isspace(c), "animal name contains whitespace: " + std::string(name));
        require(!std::isupper(c), "animal name must be lowercase: " + std::string(name));
    }
}

struct AnimalLexicon {
    std::vector<AnimalEntry> entries;  // descending frequency
    std::uint64_t threshold = 0;

    bool contains(std::string_view name) const {
        for (const auto& e : entries)
            if (e.name == name) return true;
        return false;
    }
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.name);
        return out;
    }
};

// Streams word tokens out of arbitrary text: maximal runs of word characters.
// Tokens are reported lowercased.
template <typename Fn>
inline void for_each_word(std::istream& in, Fn&& fn) {
    std::string tok;
    char buf[1 << 16];
    for (;;) {
        in.read(buf, sizeof(buf));
        std::streamsize n = in.gcount();
        if (n <= 0) break;
        for (std::streamsize i = 0; i < n; ++i) {
            unsigned char c = static_cast<unsigned char>(buf[i]);
            if (is_word_char(c)) {
                tok.push_back(static_cast<char>(std::tolower(c)));
            } else if (!tok.empty()) {
                fn(tok);
                tok.clear();
            }
        }
    }
    if (!tok.empty()) fn(tok);
}

// Case-insensitive whole-word count. Additive across corpus shards.
inline std::uint64_t count_name_frequency(std::istream& corpus, std::string_view name) {
    require(!name.empty(), "empty name");
    std::string lname = to_lower(name);
    std::uint64_t count = 0;
    for_each_word(corpus, [&](const std::string& tok) {
        if (tok == lname) ++count;
    });
    return count;
}

// One-pass count of several candidates at once.
inline std::map<std::string, std::uint64_t>
count_candidates(std::istream& corpus, const std::vector<std::string>& candidates) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& c : candidates) counts[to_lower(c)] = 0;
    for_each_word(corpus, [&](const std::string& tok) {
        auto it = counts.find(tok);
        if (it != counts.end()) ++it->second;
    });
    return counts;
}

inline std::map<std::string, std::uint64_t>
merge_counts(std::map<std::string, std::uint64_t> a,
             const std::map<std::string, std::uint64_t>& b) {
    for (const auto& [k, v] : b) a[k] += v;
    return a;
}

// Keeps candidates with frequency strictly above the threshold, sorted by
// descending frequency (name ascending on ties, for stable output).
inline AnimalLexicon
build_lexicon(const std::map<std::string, std::uint64_t>& counts,
              std::uint64_t threshold,
              const std::map<std::string, AnimalCategory>& categories) {
    require(!counts.empty(), "no candidates");
    AnimalLexicon lex;
    lex.threshold = threshold;
    for (const auto& [name, freq] : counts) {
        if (freq <= threshold) continue;
        validate_name(name);
        auto cat = categories.find(name);
        require(cat != categories.end(), "surviving name missing a category tag: " + name);
        lex.entries.push_back({name, cat->second, freq});
    }
    std::sort(lex.entries.begin(), lex.entries.end(), [](const auto& a, const auto& b) {
        if (a.corpus_frequency != b.corpus_frequency)
            return a.corpus_frequency > b.corpus_frequency;
        return a.name < b.name;
    });
    return lex;
}

inline AnimalLexicon
build_lexicon(const std::vector<std::string>& candidates, std::istream& corpus,
              std::uint64_t threshold,
              const std::map<std::string, AnimalCategory>& categories) {
    require(!candidates.empty(), "no candidates");
    return build_lexicon(count_candidates(corpus, candidates), threshold, categories);
}

// --- persistence: name<TAB>category<TAB>frequency ---

inline void save_lexicon(const AnimalLexicon& lex, const std::filesystem::path& path) {
    std::ofstream out(path);
    require(out.good(), "cannot write lexicon: " + path.string());
    for (const auto& e : lex.entries)
        out << e.name << '\t' << to_string(e.category) << '\t' << e.corpus_frequency << '\n';
}

inline AnimalLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot read lexicon: " + path.string());
    AnimalLexicon lex;
    std::set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cols = split(line, '\t');
        require(cols.size() == 3, "bad lexicon row: " + line);
        validate_name(cols[0]);
        require(seen.insert(cols[0]).second, "duplicate lexicon name: " + cols[0]);
        auto freq = parse_int(cols[2]);
        require(freq.has_value() && *freq >= 0, "bad frequency in row: " + line);
        lex.entries.push_back({cols[0], category_from_string(cols[1]),
                               static_cast<std::uint64_t>(*freq)});
    }
    return lex;
}

inline std::vector<std::string> load_candidates(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot read candidates: " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (!t.empty()) out.push_back(to_lower(t));
    }
    return out;
}

} // namespace mlmbias
