#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mlmbias/templates.hpp"

namespace mlmbias {

struct LogRatioTable {
    std::string animal;
    std::map<std::string, double> ratios;  // log(p_mean_o / p_mean_h), both > 0
};

struct ShiftedWordSet {
    std::string animal;
    std::set<std::string> words;
    std::map<std::string, double> signed_ratios;  // >0 object-shifted, <0 human-shifted

    bool empty() const { return words.empty(); }
};

enum class ShiftDirection { object, human };

// log(p_o(w) / p_h(w)) per vocabulary word; words with either probability
// exactly zero have no defined ratio and are skipped.
inline LogRatioTable log_ratio(const MeanDistributionPair& pair,
                               const std::vector<std::string>& vocab) {
    require(pair.p_mean_o.size() == vocab.size() && pair.p_mean_h.size() == vocab.size(),
            "distribution / vocabulary size mismatch");
    LogRatioTable table;
    table.animal = pair.animal;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        double po = pair.p_mean_o[i];
        double ph = pair.p_mean_h[i];
        if (po > 0.0 && ph > 0.0)
            table.ratios[vocab[i]] = std::log(po / ph);
    }
    return table;
}

struct FilterOptions {
    bool probability_floor = true;  // drop words with both means below 1/|V|
    double z_threshold = 1.96;      // drop |z| below this; 0 disables
};

// Two-stage filter: (a) drop words whose object and human mean probabilities
// are both under the uniform floor 1/|V|; (b) over the survivors, drop words
// whose log-ratio z-score (population sigma) is under the threshold. A
// degenerate survivor population (sigma = 0) yields the empty set.
inline ShiftedWordSet filter_words(const LogRatioTable& table,
                                   const MeanDistributionPair& pair,
                                   const std::vector<std::string>& vocab,
                                   FilterOptions opts = {}) {
    require(table.animal == pair.animal, "table/pair animal mismatch");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < vocab.size(); ++i) index[vocab[i]] = i;

    ShiftedWordSet out;
    out.animal = table.animal;

    double floor = 1.0 / static_cast<double>(vocab.size());
    std::vector<std::pair<std::string, double>> survivors;
    survivors.reserve(table.ratios.size());
    for (const auto& [word, ratio] : table.ratios) {
        std::size_t i = index.at(word);
        if (opts.probability_floor &&
            pair.p_mean_o[i] < floor && pair.p_mean_h[i] < floor)
            continue;
        survivors.emplace_back(word, ratio);
    }
    if (survivors.empty()) return out;

    if (opts.z_threshold > 0.0) {
        double mu = 0.0;
        for (const auto& [w, r] : survivors) mu += r;
        mu /= static_cast<double>(survivors.size());
        double var = 0.0;
        for (const auto& [w, r] : survivors) var += (r - mu) * (r - mu);
        var /= static_cast<double>(survivors.size());
        double sigma = std::sqrt(var);
        if (sigma == 0.0) return out;  // no word deviates
        for (const auto& [word, ratio] : survivors) {
            double z = (ratio - mu) / sigma;
            if (std::abs(z) >= opts.z_threshold) {
                out.words.insert(word);
                out.signed_ratios[word] = ratio;
            }
        }
    } else {
        for (const auto& [word, ratio] : survivors) {
            out.words.insert(word);
            out.signed_ratios[word] = ratio;
        }
    }
    return out;
}

// |a n b| / min(|a|, |b|). Undefined when either set is empty.
inline double token_match_rate(const ShiftedWordSet& a, const ShiftedWordSet& b) {
    require(!a.words.empty() && !b.words.empty(),
            "token_match_rate undefined for empty sets");
    std::size_t inter = 0;
    const auto& small = a.words.size() <= b.words.size() ? a.words : b.words;
    const auto& large = a.words.size() <= b.words.size() ? b.words : a.words;
    for (const auto& w : small)
        if (large.count(w)) ++inter;
    return static_cast<double>(inter) /
           static_cast<double>(std::min(a.words.size(), b.words.size()));
}

struct TMRMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> tmr;         // symmetric, in [0,1]
    std::vector<std::vector<std::uint8_t>> missing;  // undefined pairs (empty sets)

    std::size_t size() const { return names.size(); }
    // Distance used for clustering: 1 - TMR; undefined pairs get distance 1.
    double distance(std::size_t i, std::size_t j) const {
        if (missing[i][j]) return 1.0;
        return 1.0 - tmr[i][j];
    }
    std::size_t missing_pairs() const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = i + 1; j < size(); ++j)
                if (missing[i][j]) ++n;
        return n;
    }
};

inline TMRMatrix build_tmr_matrix(const std::vector<ShiftedWordSet>& sets) {
    TMRMatrix m;
    m.names.reserve(sets.size());
    for (const auto& s : sets) m.names.push_back(s.animal);
    std::size_t n = sets.size();
    m.tmr.assign(n, std::vector<double>(n, 0.0));
    m.missing.assign(n, std::vector<std::uint8_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            if (sets[i].empty() || sets[j].empty()) {
                m.missing[i][j] = m.missing[j][i] = 1;
                continue;
            }
            double t = (i == j) ? 1.0 : token_match_rate(sets[i], sets[j]);
            m.tmr[i][j] = m.tmr[j][i] = t;
        }
    }
    return m;
}

// k strongest words of the requested sign, by |ratio| descending (word
// ascending on ties). Fewer than k available returns them all.
inline std::vector<std::string> top_k_shifted(const ShiftedWordSet& set,
                                              ShiftDirection direction,
                                              std::size_t k = 5) {
    std::vector<std::pair<std::string, double>> matching;
    for (const auto& [word, ratio] : set.signed_ratios) {
        if (direction == ShiftDirection::object ? ratio > 0.0 : ratio < 0.0)
            matching.emplace_back(word, std::abs(ratio));
    }
    std::sort(matching.begin(), matching.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (matching.size() > k) matching.resize(k);
    std::vector<std::string> out;
    out.reserve(matching.size());
    for (auto& [w, r] : matching) out.push_back(std::move(w));
    return out;
}

} // namespace mlmbias
