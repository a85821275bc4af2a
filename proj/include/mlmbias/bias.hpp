#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mlmbias/common.hpp"

namespace mlmbias {

// Probabilities of the five relative pronouns at one masked slot.
struct PronounProbabilities {
    double p_that = 0.0;
    double p_which = 0.0;
    double p_who = 0.0;
    double p_whose = 0.0;
    double p_whom = 0.0;
};

inline constexpr const char* kObjectPronouns[] = {"that", "which"};
inline constexpr const char* kHumanPronouns[] = {"who", "whose", "whom"};
inline constexpr const char* kAllPronouns[] = {"that", "which", "who", "whose", "whom"};

// p_object = max(that, which); p_human = max(who, whose, whom).
inline std::pair<double, double> class_scores(const PronounProbabilities& p) {
    double p_object = std::max(p.p_that, p.p_which);
    double p_human = std::max({p.p_who, p.p_whose, p.p_whom});
    return {p_object, p_human};
}

struct BiasScore {
    std::string animal;
    double bias = 0.0;       // in [-1, 1]
    std::size_t n_human = 0;   // |H|
    std::size_t n_object = 0;  // |O|
};

// Error-direction indicator means: over human sentences, the rate of the
// model preferring an object pronoun, minus, over object sentences, the rate
// of it preferring a human pronoun. Exact ties count for neither term.
inline BiasScore bias_from_scores(const std::string& animal,
                                  const std::vector<PronounProbabilities>& human_sentences,
                                  const std::vector<PronounProbabilities>& object_sentences) {
    require(!human_sentences.empty() && !object_sentences.empty(),
            "bias undefined without both sentence classes for: " + animal);
    std::size_t object_wins_in_h = 0;
    for (const auto& p : human_sentences) {
        auto [po, ph] = class_scores(p);
        if (po > ph) ++object_wins_in_h;
    }
    std::size_t human_wins_in_o = 0;
    for (const auto& p : object_sentences) {
        auto [po, ph] = class_scores(p);
        if (ph > po) ++human_wins_in_o;
    }
    BiasScore out;
    out.animal = animal;
    out.n_human = human_sentences.size();
    out.n_object = object_sentences.size();
    out.bias = static_cast<double>(object_wins_in_h) / static_cast<double>(out.n_human) -
               static_cast<double>(human_wins_in_o) / static_cast<double>(out.n_object);
    return out;
}

// Share of object-related pronoun references among all five, per animal.
// counts order: that, which, who, whose, whom.
inline double frequency_skew(const std::array<std::uint64_t, 5>& counts) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    require(total > 0, "frequency skew undefined for zero total");
    return static_cast<double>(counts[0] + counts[1]) / static_cast<double>(total);
}

// Product-moment correlation; requires two non-constant vectors.
inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size(), "pearson_r: length mismatch");
    require(x.size() >= 2, "pearson_r: need at least 2 points");
    double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    require(sxx > 0.0 && syy > 0.0, "pearson_r undefined for a constant vector");
    return sxy / std::sqrt(sxx * syy);
}

} // namespace mlmbias
