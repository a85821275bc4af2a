#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mlmbias/common.hpp"

namespace mlmbias {

using Distribution = std::vector<double>;  // probabilities over the vocabulary

inline double distribution_sum(const Distribution& d) {
    double s = 0.0;
    for (double p : d) s += p;
    return s;
}

struct MaskDistribution {
    Distribution probs;
    std::size_t position = 0;  // index of the masked slot in the token sequence
};

struct SentenceScore {
    double pll = 0.0;            // pseudo-log-likelihood, nats
    std::size_t token_count = 0; // scored (non-special) positions
};

// Tokenized text. Special tokens added by the model (e.g. sequence
// delimiters) are flagged so scoring can skip them.
struct Encoded {
    std::vector<int> ids;
    std::vector<std::uint8_t> is_special;
};

// One inference request: a token sequence and the positions at which the
// full vocabulary distribution is wanted.
struct MaskQuery {
    std::vector<int> ids;
    std::vector<std::size_t> positions;
};

// Uniform interface over fill-mask models. Implementations are immutable
// after construction; all member functions are safe to call concurrently.
class MaskedModel {
public:
    MaskedModel(std::string model_id, std::vector<std::string> vocab,
                std::string mask_token, std::size_t max_sequence_length)
        : model_id_(std::move(model_id)),
          vocab_(std::move(vocab)),
          mask_token_(std::move(mask_token)),
          max_sequence_length_(max_sequence_length) {
        require(!vocab_.empty(), "vocabulary is empty");
        mask_id_ = -1;
        for (std::size_t i = 0; i < vocab_.size(); ++i) {
            if (vocab_[i] == mask_token_) {
                require(mask_id_ < 0, "vocabulary entries are not unique: " + mask_token_);
                mask_id_ = static_cast<int>(i);
            }
        }
        require(mask_id_ >= 0, "vocabulary lacks the mask token " + mask_token_);
    }
    virtual ~MaskedModel() = default;

    const std::string& model_id() const { return model_id_; }
    const std::vector<std::string>& vocab() const { return vocab_; }
    std::size_t vocab_size() const { return vocab_.size(); }
    const std::string& mask_token() const { return mask_token_; }
    int mask_id() const { return mask_id_; }
    std::size_t max_sequence_length() const { return max_sequence_length_; }

    // Tokenize raw text. Occurrences of mask_token() map to mask_id().
    virtual Encoded encode(std::string_view text) const = 0;

    // Token ids of a single word as it would appear mid-sentence.
    virtual std::vector<int> word_ids(std::string_view word) const = 0;

    // Full-vocabulary distributions at the requested positions of each query.
    // Result[q][k] corresponds to queries[q].positions[k]. Deterministic for
    // identical inputs within one process.
    virtual std::vector<std::vector<Distribution>>
    predict(const std::vector<MaskQuery>& queries) const = 0;

private:
    std::string model_id_;
    std::vector<std::string> vocab_;
    std::string mask_token_;
    std::size_t max_sequence_length_;
    int mask_id_ = -1;
};

namespace detail {

// Whitespace tokenizer shared by the stub models; unknown words map to id 0.
// Punctuation is peeled off token edges unless the token (e.g. "[MASK]")
// appears verbatim in the vocabulary.
inline Encoded whitespace_encode(std::string_view text,
                                 const std::map<std::string, int>& index) {
    Encoded enc;
    auto push = [&](const std::string& w) {
        auto it = index.find(w);
        enc.ids.push_back(it == index.end() ? 0 : it->second);
        enc.is_special.push_back(0);
    };
    std::function<void(std::string)> emit = [&](std::string word) {
        if (word.empty()) return;
        if (index.count(word)) { push(word); return; }
        auto is_punct = [](char c) {
            return std::ispunct(static_cast<unsigned char>(c));
        };
        if (is_punct(word.back()) && word.size() > 1) {
            emit(word.substr(0, word.size() - 1));
            push(std::string(1, word.back()));
            return;
        }
        if (is_punct(word.front()) && word.size() > 1) {
            push(std::string(1, word.front()));
            emit(word.substr(1));
            return;
        }
        push(word);
    };
    std::string word;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            emit(word);
            word.clear();
        } else {
            word.push_back(c);
        }
    }
    emit(word);
    return enc;
}

inline std::map<std::string, int> build_index(const std::vector<std::string>& vocab) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < vocab.size(); ++i) index[vocab[i]] = static_cast<int>(i);
    return index;
}

} // namespace detail

// Base for test doubles: whitespace tokenization, punctuation kept attached
// unless the caller separates it. Subclasses provide the distributions.
class StubModel : public MaskedModel {
public:
    StubModel(std::string id, std::vector<std::string> vocab, std::string mask_token)
        : MaskedModel(std::move(id), std::move(vocab), std::move(mask_token), 512),
          index_(detail::build_index(this->vocab())) {}

    Encoded encode(std::string_view text) const override {
        return detail::whitespace_encode(text, index_);
    }
    std::vector<int> word_ids(std::string_view word) const override {
        require(!word.empty(), "empty word");
        auto it = index_.find(std::string(word));
        require(it != index_.end(), "word not in stub vocabulary: " + std::string(word));
        return {it->second};
    }

protected:
    std::map<std::string, int> index_;
};

// Every position gets the uniform distribution.
class UniformStubModel : public StubModel {
public:
    UniformStubModel(std::vector<std::string> vocab, std::string mask_token = "[MASK]")
        : StubModel("stub:uniform", std::move(vocab), std::move(mask_token)) {}

    std::vector<std::vector<Distribution>>
    predict(const std::vector<MaskQuery>& queries) const override {
        Distribution u(vocab_size(), 1.0 / static_cast<double>(vocab_size()));
        std::vector<std::vector<Distribution>> out;
        out.reserve(queries.size());
        for (const auto& q : queries)
            out.emplace_back(q.positions.size(), u);
        return out;
    }
};

// Distributions configured per position, with a fallback. Lets tests pin
// exact probabilities at chosen slots.
class TableStubModel : public StubModel {
public:
    TableStubModel(std::vector<std::string> vocab, std::string mask_token = "[MASK]")
        : StubModel("stub:table", std::move(vocab), std::move(mask_token)) {
        fallback_.assign(vocab_size(), 1.0 / static_cast<double>(vocab_size()));
    }

    void set_fallback(Distribution d) { fallback_ = std::move(d); }
    void set_at_position(std::size_t pos, Distribution d) { by_position_[pos] = std::move(d); }
    // Convenience: distribution with the named words at given probabilities,
    // remaining mass spread over all other tokens.
    Distribution make_distribution(const std::vector<std::pair<std::string, double>>& probs) const {
        Distribution d(vocab_size(), 0.0);
        double used = 0.0;
        for (const auto& [w, p] : probs) {
            auto it = index_.find(w);
            require(it != index_.end(), "word not in stub vocabulary: " + w);
            d[static_cast<std::size_t>(it->second)] = p;
            used += p;
        }
        require(used <= 1.0 + 1e-12, "probabilities exceed 1");
        std::size_t rest = vocab_size() - probs.size();
        if (rest > 0) {
            double fill = (1.0 - used) / static_cast<double>(rest);
            for (std::size_t i = 0; i < d.size(); ++i)
                if (d[i] == 0.0) d[i] = fill;
        }
        return d;
    }

    std::vector<std::vector<Distribution>>
    predict(const std::vector<MaskQuery>& queries) const override {
        std::vector<std::vector<Distribution>> out;
        out.reserve(queries.size());
        for (const auto& q : queries) {
            std::vector<Distribution> rows;
            rows.reserve(q.positions.size());
            for (std::size_t pos : q.positions) {
                auto it = by_position_.find(pos);
                rows.push_back(it == by_position_.end() ? fallback_ : it->second);
            }
            out.push_back(std::move(rows));
        }
        return out;
    }

private:
    Distribution fallback_;
    std::map<std::size_t, Distribution> by_position_;
};

// Distributions supplied by an arbitrary function of (query, position); the
// most flexible test double.
class FunctionStubModel : public StubModel {
public:
    using Fn = std::function<Distribution(const MaskQuery&, std::size_t position)>;

    FunctionStubModel(std::vector<std::string> vocab, Fn fn,
                      std::string mask_token = "[MASK]")
        : StubModel("stub:function", std::move(vocab), std::move(mask_token)),
          fn_(std::move(fn)) {}

    std::vector<std::vector<Distribution>>
    predict(const std::vector<MaskQuery>& queries) const override {
        std::vector<std::vector<Distribution>> out;
        out.reserve(queries.size());
        for (const auto& q : queries) {
            std::vector<Distribution> rows;
            rows.reserve(q.positions.size());
            for (std::size_t pos : q.positions) rows.push_back(fn_(q, pos));
            out.push_back(std::move(rows));
        }
        return out;
    }

    int id_of(const std::string& word) const { return index_.at(word); }

private:
    Fn fn_;
};

// Deterministic pseudo-random distributions derived from the query content.
// Useful for property tests: arbitrary-looking but reproducible.
class HashStubModel : public StubModel {
public:
    HashStubModel(std::vector<std::string> vocab, std::uint64_t seed = 0,
                  std::string mask_token = "[MASK]")
        : StubModel("stub:hash", std::move(vocab), std::move(mask_token)), seed_(seed) {}

    std::vector<std::vector<Distribution>>
    predict(const std::vector<MaskQuery>& queries) const override {
        std::vector<std::vector<Distribution>> out;
        out.reserve(queries.size());
        for (const auto& q : queries) {
            std::uint64_t h = seed_ ^ 0x9e3779b97f4a7c15ull;
            for (int id : q.ids) h = mix(h + static_cast<std::uint64_t>(id) + 1);
            std::vector<Distribution> rows;
            for (std::size_t pos : q.positions) {
                std::uint64_t hp = mix(h ^ (pos + 0x51ull));
                Distribution d(vocab_size());
                double sum = 0.0;
                for (std::size_t i = 0; i < d.size(); ++i) {
                    hp = mix(hp);
                    d[i] = 1.0 + static_cast<double>(hp % 1000);
                    sum += d[i];
                }
                for (double& p : d) p /= sum;
                rows.push_back(std::move(d));
            }
            out.push_back(std::move(rows));
        }
        return out;
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 33; x *= 0xff51afd7ed558ccdull;
        x ^= x >> 33; x *= 0xc4ceb9fe1a85ec53ull;
        x ^= x >> 33; return x;
    }
    std::uint64_t seed_;
};

} // namespace mlmbias
