#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "mlmbias/model.hpp"

namespace mlmbias {

namespace detail {

inline std::vector<std::size_t> mask_positions(const std::vector<int>& ids, int mask_id) {
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == mask_id) pos.push_back(i);
    return pos;
}

inline void check_length(const MaskedModel& model, const Encoded& enc,
                         std::string_view sentence) {
    require(enc.ids.size() <= model.max_sequence_length(),
            "sentence exceeds max sequence length: " + std::string(sentence));
}

} // namespace detail

// Distribution over the vocabulary at the single masked slot of `sentence`.
// The mask placeholder is the model's own mask token.
inline MaskDistribution mask_distribution(const MaskedModel& model, std::string_view sentence) {
    Encoded enc = model.encode(sentence);
    detail::check_length(model, enc, sentence);
    auto pos = detail::mask_positions(enc.ids, model.mask_id());
    require(pos.size() == 1, "expected exactly one mask placeholder, found " +
                                 std::to_string(pos.size()) + " in: " + std::string(sentence));
    auto rows = model.predict({MaskQuery{enc.ids, {pos[0]}}});
    return MaskDistribution{std::move(rows[0][0]), pos[0]};
}

// Probability of `word` filling the masked slot. Single-token words read the
// mask distribution directly. A word tokenizing to k > 1 pieces is scored as
// the product over k slots: slot j masked while the other slots hold the
// word's remaining pieces.
inline double score_word_at_mask(const MaskedModel& model, std::string_view sentence,
                                 std::string_view word) {
    require(!word.empty(), "empty word");
    std::vector<int> wids = model.word_ids(word);
    require(!wids.empty(), "word tokenizes to zero tokens: " + std::string(word));

    Encoded enc = model.encode(sentence);
    detail::check_length(model, enc, sentence);
    auto pos = detail::mask_positions(enc.ids, model.mask_id());
    require(pos.size() == 1, "expected exactly one mask placeholder in: " + std::string(sentence));
    std::size_t slot = pos[0];

    if (wids.size() == 1) {
        auto rows = model.predict({MaskQuery{enc.ids, {slot}}});
        return rows[0][0][static_cast<std::size_t>(wids[0])];
    }

    // Expand the single slot to k slots filled with the candidate's pieces.
    std::vector<int> expanded;
    expanded.reserve(enc.ids.size() + wids.size() - 1);
    expanded.insert(expanded.end(), enc.ids.begin(), enc.ids.begin() + static_cast<long>(slot));
    expanded.insert(expanded.end(), wids.begin(), wids.end());
    expanded.insert(expanded.end(), enc.ids.begin() + static_cast<long>(slot) + 1, enc.ids.end());

    std::vector<MaskQuery> queries;
    queries.reserve(wids.size());
    for (std::size_t j = 0; j < wids.size(); ++j) {
        MaskQuery q{expanded, {slot + j}};
        q.ids[slot + j] = model.mask_id();
        queries.push_back(std::move(q));
    }
    auto rows = model.predict(queries);
    double p = 1.0;
    for (std::size_t j = 0; j < wids.size(); ++j)
        p *= rows[j][0][static_cast<std::size_t>(wids[j])];
    return p;
}

// Sum over non-special positions t of log p(w_t | sentence with t masked).
inline SentenceScore pseudo_log_likelihood(const MaskedModel& model, std::string_view sentence) {
    require(!trim(sentence).empty(), "empty sentence");
    Encoded enc = model.encode(sentence);
    detail::check_length(model, enc, sentence);

    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < enc.ids.size(); ++i)
        if (!enc.is_special[i]) targets.push_back(i);
    require(!targets.empty(), "sentence has no scorable tokens: " + std::string(sentence));

    std::vector<MaskQuery> queries;
    queries.reserve(targets.size());
    for (std::size_t t : targets) {
        MaskQuery q{enc.ids, {t}};
        q.ids[t] = model.mask_id();
        queries.push_back(std::move(q));
    }
    auto rows = model.predict(queries);

    double pll = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k)
        pll += std::log(rows[k][0][static_cast<std::size_t>(enc.ids[targets[k]])]);
    return SentenceScore{pll, targets.size()};
}

// exp(-sum(pll) / N) with per-token normalization: N = total scored tokens.
inline double pseudo_perplexity(const MaskedModel& model,
                                const std::vector<std::string>& sentences) {
    require(!sentences.empty(), "empty sentence list");
    double total_pll = 0.0;
    std::size_t total_tokens = 0;
    for (const auto& s : sentences) {
        SentenceScore sc = pseudo_log_likelihood(model, s);
        total_pll += sc.pll;
        total_tokens += sc.token_count;
    }
    return std::exp(-total_pll / static_cast<double>(total_tokens));
}

} // namespace mlmbias
