#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlmbias/bias.hpp"
#include "mlmbias/lexicon.hpp"
#include "mlmbias/model.hpp"

namespace mlmbias {

struct ExtractedSentence {
    std::string text;
    std::string animal;        // lexicon name ("human" for the human class)
    std::string pronoun;       // that | which | who | whose | whom
    std::size_t span_begin = 0;  // byte offsets of the pronoun in text
    std::size_t span_end = 0;
    std::string source_id;

    bool pronoun_is_human_class() const {
        return pronoun == "who" || pronoun == "whose" || pronoun == "whom";
    }
};

inline void validate_extracted(const ExtractedSentence& s) {
    require(s.span_end > s.span_begin && s.span_end <= s.text.size(),
            "pronoun span out of bounds");
    require(to_lower(s.text.substr(s.span_begin, s.span_end - s.span_begin)) == s.pronoun,
            "recorded span does not hold the pronoun: " + s.text);
}

// ---------------------------------------------------------------------------
// Sentence segmentation: terminal punctuation with an abbreviation list.
// Input documents are raw text with hard-wrapped lines; emitted sentences are
// whitespace-normalized.
// ---------------------------------------------------------------------------

namespace detail {

inline const std::set<std::string>& abbreviations() {
    static const std::set<std::string> abbr = {
        "mr", "mrs", "ms", "dr", "st", "prof", "capt", "col", "gen", "lt",
        "rev", "hon", "jr", "sr", "vs", "etc", "e.g", "i.e", "no", "vol",
        "fig", "ch", "pp", "ed", "op", "cf", "al",
    };
    return abbr;
}

inline bool ends_with_abbreviation(std::string_view text, std::size_t dot) {
    std::size_t end = dot;
    std::size_t start = end;
    while (start > 0 && (std::isalpha(static_cast<unsigned char>(text[start - 1])) ||
                         text[start - 1] == '.'))
        --start;
    if (start == end) return false;
    std::string word = to_lower(text.substr(start, end - start));
    while (!word.empty() && word.back() == '.') word.pop_back();
    if (word.size() == 1) return true;  // single-letter initials ("J. Smith")
    return abbreviations().count(word) > 0;
}

inline std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            in_space = false;
            out.push_back(c);
        }
    }
    return out;
}

} // namespace detail

inline std::vector<std::string> split_sentences(std::string_view text,
                                                std::size_t max_chars = 1500) {
    std::vector<std::string> out;
    std::size_t start = 0;
    auto emit = [&](std::size_t end) {
        if (end <= start) return;
        std::string s = detail::normalize_whitespace(text.substr(start, end - start));
        if (!s.empty() && s.size() <= max_chars) out.push_back(std::move(s));
        start = end;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.' || c == '!' || c == '?') {
            if (c == '.' && detail::ends_with_abbreviation(text, i)) continue;
            std::size_t j = i + 1;
            while (j < text.size() && (text[j] == '"' || text[j] == '\'' ||
                                       text[j] == ')' || text[j] == ']'))
                ++j;
            if (j >= text.size()) { emit(j); i = j; continue; }
            if (!std::isspace(static_cast<unsigned char>(text[j]))) continue;
            emit(j);
            i = j;
        } else if (c == '\n') {
            // Blank line = paragraph boundary regardless of punctuation.
            std::size_t j = i + 1;
            while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
            if (j < text.size() && text[j] == '\n') {
                emit(i);
                start = j + 1;
                i = j;
            }
        }
    }
    emit(text.size());
    return out;
}

// ---------------------------------------------------------------------------
// Word tokens with byte spans, for antecedent matching.
// ---------------------------------------------------------------------------

struct WordSpan {
    std::string word;  // lowercased
    std::size_t begin = 0;
    std::size_t end = 0;
};

inline std::vector<WordSpan> word_spans(std::string_view text) {
    std::vector<WordSpan> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isalpha(static_cast<unsigned char>(text[i]))) {
            std::size_t b = i;
            while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
            out.push_back({to_lower(text.substr(b, i - b)), b, i});
        } else {
            ++i;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Extraction backends.
// ---------------------------------------------------------------------------

enum class BackendKind { heuristic, preparsed_ingest };

struct ExtractionBackend {
    BackendKind kind = BackendKind::heuristic;
    bool match_plurals = true;     // "dogs who ..." maps to "dog"
    std::size_t max_sentence_chars = 1500;
};

namespace detail {

// Lexicon surface forms: singular, regular plurals, and the few irregulars
// that occur among common animal names. "person"/"people" map to "human".
inline std::map<std::string, std::string>
surface_forms(const AnimalLexicon& lexicon, bool plurals) {
    std::map<std::string, std::string> forms;
    for (const auto& e : lexicon.entries) {
        forms[e.name] = e.name;
        if (!plurals) continue;
        forms[e.name + "s"] = e.name;
        if (e.name.ends_with("s") || e.name.ends_with("x") || e.name.ends_with("ch") ||
            e.name.ends_with("sh"))
            forms[e.name + "es"] = e.name;
        if (e.name.size() > 1 && e.name.back() == 'y' &&
            std::string("aeiou").find(e.name[e.name.size() - 2]) == std::string::npos)
            forms[e.name.substr(0, e.name.size() - 1) + "ies"] = e.name;
        if (e.name == "mouse") forms["mice"] = e.name;
        if (e.name == "wolf") forms["wolves"] = e.name;
        if (e.name == "fly") forms["flies"] = e.name;
    }
    if (lexicon.contains("human")) {
        forms["person"] = "human";
        if (plurals) {
            forms["persons"] = "human";
            forms["people"] = "human";
        }
    }
    return forms;
}

inline bool is_pronoun(std::string_view w) {
    for (const char* p : kAllPronouns)
        if (w == p) return true;
    return false;
}

// Nouns that commonly follow determiner-"that" ("that day"); extraction
// skips such hits to stay precision-first.
inline const std::set<std::string>& that_determiner_nouns() {
    static const std::set<std::string> nouns = {
        "day", "night", "time", "morning", "evening", "afternoon", "moment",
        "instant", "hour", "year", "week", "month", "season", "way", "place",
        "man", "woman", "one", "thing", "kind", "sort",
    };
    return nouns;
}

// The only material allowed between antecedent and pronoun: nothing, or a
// single comma (non-restrictive clause), with optional quotes.
inline bool clean_gap(std::string_view text, std::size_t from, std::size_t to) {
    int commas = 0;
    for (std::size_t i = from; i < to; ++i) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == ',') {
            if (++commas > 1) return false;
            continue;
        }
        if (c == '"' || c == '\'') continue;
        return false;
    }
    return true;
}

} // namespace detail

// Scans one sentence for relative pronouns whose immediate antecedent is a
// lexicon animal. Precision-first: the antecedent must directly precede the
// pronoun (one comma allowed), and determiner-like "that" hits are skipped.
inline std::vector<ExtractedSentence>
extract_from_sentence(const std::string& sentence,
                      const std::map<std::string, std::string>& forms,
                      const std::string& source_id) {
    std::vector<ExtractedSentence> out;
    auto tokens = word_spans(sentence);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
        const auto& tok = tokens[t];
        if (!detail::is_pronoun(tok.word)) continue;
        const auto& prev = tokens[t - 1];
        auto it = forms.find(prev.word);
        if (it == forms.end()) continue;
        if (!detail::clean_gap(sentence, prev.end, tok.begin)) continue;
        if (tok.word == "that") {
            if (t + 1 >= tokens.size()) continue;  // trailing "that" is not a clause
            if (detail::that_determiner_nouns().count(tokens[t + 1].word)) continue;
            if (!detail::clean_gap(sentence, tok.end, tokens[t + 1].begin)) continue;
        }
        ExtractedSentence s;
        s.text = sentence;
        s.animal = it->second;
        s.pronoun = tok.word;
        s.span_begin = tok.begin;
        s.span_end = tok.end;
        s.source_id = source_id;
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Document streaming.
// ---------------------------------------------------------------------------

struct Document {
    std::string id;
    std::string text;
};

class DocumentStream {
public:
    virtual ~DocumentStream() = default;
    virtual std::optional<Document> next() = 0;
};

// Walks a directory of UTF-8 .txt files in sorted order.
class DirectoryStream : public DocumentStream {
public:
    explicit DirectoryStream(const std::filesystem::path& dir) {
        require(std::filesystem::is_directory(dir), "not a directory: " + dir.string());
        for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
            if (e.is_regular_file() && e.path().extension() == ".txt")
                files_.push_back(e.path());
        }
        std::sort(files_.begin(), files_.end());
    }
    std::optional<Document> next() override {
        while (index_ < files_.size()) {
            const auto& p = files_[index_++];
            std::ifstream in(p, std::ios::binary);
            if (!in.good()) { ++skipped_; continue; }
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            return Document{p.filename().string(), std::move(text)};
        }
        return std::nullopt;
    }
    std::size_t skipped() const { return skipped_; }

private:
    std::vector<std::filesystem::path> files_;
    std::size_t index_ = 0;
    std::size_t skipped_ = 0;
};

struct ExtractionStats {
    std::uint64_t documents = 0;
    std::uint64_t sentences = 0;
    std::uint64_t extracted = 0;
    std::uint64_t malformed_documents = 0;
};

// Streams a corpus through the heuristic backend; bounded memory regardless
// of corpus size. The consumer receives each ExtractedSentence exactly once.
template <typename Consumer>
inline ExtractionStats extract(DocumentStream& docs, const AnimalLexicon& lexicon,
                               const ExtractionBackend& backend, Consumer&& consumer) {
    require(!lexicon.entries.empty(), "empty lexicon");
    require(backend.kind == BackendKind::heuristic,
            "preparsed backends are consumed via extract_preparsed");
    auto forms = detail::surface_forms(lexicon, backend.match_plurals);
    ExtractionStats stats;
    while (auto doc = docs.next()) {
        ++stats.documents;
        try {
            for (auto& sentence : split_sentences(doc->text, backend.max_sentence_chars)) {
                ++stats.sentences;
                for (auto& ex : extract_from_sentence(sentence, forms, doc->id)) {
                    validate_extracted(ex);
                    ++stats.extracted;
                    consumer(std::move(ex));
                }
            }
        } catch (const std::exception&) {
            ++stats.malformed_documents;  // skipped, never fatal
        }
    }
    return stats;
}

// Preparsed ingest: one JSON object per line with externally produced
// annotations {sentence, pronoun_span, antecedent_span, antecedent_lemma}.
template <typename Consumer>
inline ExtractionStats extract_preparsed(std::istream& in, const AnimalLexicon& lexicon,
                                         Consumer&& consumer,
                                         const std::string& source_id = "preparsed") {
    ExtractionStats stats;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        ++stats.sentences;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            ExtractedSentence s;
            s.text = j.at("sentence").get<std::string>();
            s.span_begin = j.at("pronoun_span").at(0).get<std::size_t>();
            s.span_end = j.at("pronoun_span").at(1).get<std::size_t>();
            s.pronoun = to_lower(s.text.substr(s.span_begin, s.span_end - s.span_begin));
            s.animal = to_lower(j.at("antecedent_lemma").get<std::string>());
            s.source_id = j.value("source_id", source_id + ":" + std::to_string(lineno));
            require(detail::is_pronoun(s.pronoun), "span is not a relative pronoun");
            require(lexicon.contains(s.animal), "antecedent not in lexicon: " + s.animal);
            validate_extracted(s);
            ++stats.extracted;
            consumer(std::move(s));
        } catch (const std::exception&) {
            ++stats.malformed_documents;
        }
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Frequency table (per animal x pronoun) with shard-associative merge.
// ---------------------------------------------------------------------------

inline std::size_t pronoun_index(std::string_view p) {
    for (std::size_t i = 0; i < 5; ++i)
        if (p == kAllPronouns[i]) return i;
    throw Error("unknown pronoun: " + std::string(p));
}

struct FrequencyTable {
    std::map<std::string, std::array<std::uint64_t, 5>> counts;  // animal -> per pronoun

    void add(const ExtractedSentence& s) {
        auto& row = counts.try_emplace(s.animal, std::array<std::uint64_t, 5>{}).first->second;
        ++row[pronoun_index(s.pronoun)];
    }
    void merge(const FrequencyTable& other) {
        for (const auto& [animal, row] : other.counts) {
            auto& mine = counts.try_emplace(animal, std::array<std::uint64_t, 5>{}).first->second;
            for (std::size_t i = 0; i < 5; ++i) mine[i] += row[i];
        }
    }
    std::array<std::uint64_t, 5> totals() const {
        std::array<std::uint64_t, 5> t{};
        for (const auto& [animal, row] : counts)
            for (std::size_t i = 0; i < 5; ++i) t[i] += row[i];
        return t;
    }
    std::array<std::uint64_t, 5> totals_minus_human() const {
        std::array<std::uint64_t, 5> t = totals();
        auto it = counts.find("human");
        if (it != counts.end())
            for (std::size_t i = 0; i < 5; ++i) t[i] -= it->second[i];
        return t;
    }
};

template <typename Iterable>
inline FrequencyTable tabulate(const Iterable& sentences) {
    FrequencyTable t;
    for (const auto& s : sentences) t.add(s);
    return t;
}

// ---------------------------------------------------------------------------
// Pronoun masking.
// ---------------------------------------------------------------------------

// Replaces the recorded pronoun span with the model's mask token; the rest of
// the text is byte-identical.
inline std::string mask_pronoun(const ExtractedSentence& s, const MaskedModel& model) {
    require(s.span_end > s.span_begin && s.span_end <= s.text.size(), "span out of bounds");
    std::string out = s.text.substr(0, s.span_begin);
    out += model.mask_token();
    out += s.text.substr(s.span_end);
    return out;
}

// Inverse of mask_pronoun given the original sentence's span; for round-trip
// checks.
inline std::string unmask(const std::string& masked, const ExtractedSentence& original,
                          const MaskedModel& model) {
    std::size_t at = masked.find(model.mask_token());
    require(at != std::string::npos, "mask token not found");
    std::string out = masked.substr(0, at);
    out += original.text.substr(original.span_begin, original.span_end - original.span_begin);
    out += masked.substr(at + model.mask_token().size());
    return out;
}

// ---------------------------------------------------------------------------
// Seeded per-pronoun reservoir sample for manual validation.
// ---------------------------------------------------------------------------

class ValidationSampler {
public:
    ValidationSampler(std::size_t per_pronoun, std::uint64_t seed)
        : per_pronoun_(per_pronoun) {
        for (std::size_t i = 0; i < 5; ++i) {
            rngs_.emplace_back(seed * 6364136223846793005ull + i + 1);
            seen_[i] = 0;
        }
    }
    void add(const ExtractedSentence& s) {
        std::size_t c = pronoun_index(s.pronoun);
        ++seen_[c];
        if (reservoirs_[c].size() < per_pronoun_) {
            reservoirs_[c].push_back(s);
        } else {
            std::uniform_int_distribution<std::uint64_t> pick(0, seen_[c] - 1);
            std::uint64_t k = pick(rngs_[c]);
            if (k < per_pronoun_) reservoirs_[c][static_cast<std::size_t>(k)] = s;
        }
    }
    // Stable order: pronoun class, then source id, then span.
    std::vector<ExtractedSentence> result() const {
        std::vector<ExtractedSentence> out;
        for (std::size_t c = 0; c < 5; ++c) {
            auto v = reservoirs_[c];
            std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
                return std::tie(a.source_id, a.span_begin, a.text) <
                       std::tie(b.source_id, b.span_begin, b.text);
            });
            out.insert(out.end(), v.begin(), v.end());
        }
        return out;
    }

private:
    std::size_t per_pronoun_;
    std::array<std::vector<ExtractedSentence>, 5> reservoirs_;
    std::array<std::uint64_t, 5> seen_{};
    std::vector<std::mt19937_64> rngs_;
};

template <typename Iterable>
inline std::vector<ExtractedSentence>
sample_for_validation(const Iterable& sentences, std::size_t per_pronoun = 10,
                      std::uint64_t seed = 0) {
    ValidationSampler s(per_pronoun, seed);
    for (const auto& e : sentences) s.add(e);
    return s.result();
}

// ---------------------------------------------------------------------------
// JSONL persistence.
// ---------------------------------------------------------------------------

inline void write_extracted_jsonl(const std::vector<ExtractedSentence>& sentences,
                                  std::ostream& out) {
    for (const auto& s : sentences) {
        nlohmann::json j;
        j["text"] = s.text;
        j["animal"] = s.animal;
        j["pronoun"] = s.pronoun;
        j["span"] = {s.span_begin, s.span_end};
        j["source_id"] = s.source_id;
        out << j.dump() << '\n';
    }
}

inline std::vector<ExtractedSentence> read_extracted_jsonl(std::istream& in) {
    std::vector<ExtractedSentence> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        ExtractedSentence s;
        s.text = j.at("text").get<std::string>();
        s.animal = j.at("animal").get<std::string>();
        s.pronoun = j.at("pronoun").get<std::string>();
        s.span_begin = j.at("span").at(0).get<std::size_t>();
        s.span_end = j.at("span").at(1).get<std::size_t>();
        s.source_id = j.value("source_id", "");
        validate_extracted(s);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace mlmbias
