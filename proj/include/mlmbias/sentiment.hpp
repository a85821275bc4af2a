#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "mlmbias/shift.hpp"
#include "mlmbias/upgma.hpp"

namespace mlmbias {

// Word valence lookup, conventionally in [-4, 4]; absent words score 0.
class SentimentLexicon {
public:
    SentimentLexicon() = default;
    explicit SentimentLexicon(std::map<std::string, double> scores)
        : scores_(std::move(scores)) {}

    // token<TAB>mean_valence, extra columns ignored.
    static SentimentLexicon load(const std::filesystem::path& path) {
        std::ifstream in(path);
        require(in.good(), "cannot read sentiment lexicon: " + path.string());
        std::map<std::string, double> scores;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto cols = split(line, '\t');
            if (cols.size() < 2) continue;
            auto v = parse_double(cols[1]);
            if (v) scores[cols[0]] = *v;
        }
        require(!scores.empty(), "sentiment lexicon is empty: " + path.string());
        return SentimentLexicon(std::move(scores));
    }

    // Valence of a word, 0 if out of lexicon. Subword continuation markers
    // ("##...") are stripped first; the lexicon holds surface words only.
    double score_word(std::string_view word) const {
        require(!word.empty(), "empty word");
        std::string w(word);
        if (w.size() > 2 && w[0] == '#' && w[1] == '#') w = w.substr(2);
        auto it = scores_.find(w);
        if (it == scores_.end()) {
            it = scores_.find(to_lower(w));
            if (it == scores_.end()) return 0.0;
        }
        return it->second;
    }

    std::size_t size() const { return scores_.size(); }

private:
    std::map<std::string, double> scores_;
};

struct SentimentProfile {
    std::string model_id;
    std::size_t cluster = 0;
    ShiftDirection direction = ShiftDirection::object;
    double negative = 0.0;
    double neutral = 0.0;
    double positive = 0.0;
    std::size_t word_count = 0;
};

// Buckets a word group by valence sign and returns the three ratios.
inline SentimentProfile profile_group(const SentimentLexicon& lex,
                                      const std::vector<std::string>& words) {
    SentimentProfile p;
    p.word_count = words.size();
    if (words.empty()) return p;
    std::size_t neg = 0, neu = 0, pos = 0;
    for (const auto& w : words) {
        double s = lex.score_word(w);
        if (s < 0) ++neg;
        else if (s > 0) ++pos;
        else ++neu;
    }
    double n = static_cast<double>(words.size());
    p.negative = neg / n;
    p.neutral = neu / n;
    p.positive = pos / n;
    return p;
}

// Per cluster (dendrogram cut into n_clusters) and per shift direction, the
// sentiment ratios of all shifted words of that cluster's animals. Empty
// groups are omitted.
inline std::vector<SentimentProfile>
profile(const SentimentLexicon& lex, const std::vector<ShiftedWordSet>& sets,
        const Dendrogram& dendrogram, std::size_t n_clusters,
        const std::string& model_id) {
    require(sets.size() == dendrogram.n_leaves, "sets / dendrogram size mismatch");
    std::vector<std::size_t> labels = dendrogram.cut(n_clusters);

    std::map<std::pair<std::size_t, ShiftDirection>, std::vector<std::string>> groups;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (const auto& [word, ratio] : sets[i].signed_ratios) {
            if (ratio > 0)
                groups[{labels[i], ShiftDirection::object}].push_back(word);
            else if (ratio < 0)
                groups[{labels[i], ShiftDirection::human}].push_back(word);
        }
    }
    std::vector<SentimentProfile> out;
    for (const auto& [key, words] : groups) {
        SentimentProfile p = profile_group(lex, words);
        p.model_id = model_id;
        p.cluster = key.first;
        p.direction = key.second;
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace mlmbias
