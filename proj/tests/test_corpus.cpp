#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "mlmbias/corpus.hpp"

using namespace mlmbias;

namespace {

AnimalLexicon study_lexicon() {
    return load_lexicon(std::filesystem::path(MLMBIAS_DATA) / "animal_lexicon.tsv");
}

std::vector<ExtractedSentence> run_heuristic(const std::string& text,
                                             const AnimalLexicon& lex) {
    auto forms = detail::surface_forms(lex, true);
    std::vector<ExtractedSentence> out;
    for (const auto& s : split_sentences(text))
        for (auto& e : extract_from_sentence(s, forms, "test"))
            out.push_back(std::move(e));
    return out;
}

class VectorStream : public DocumentStream {
public:
    explicit VectorStream(std::vector<Document> docs) : docs_(std::move(docs)) {}
    std::optional<Document> next() override {
        if (i_ >= docs_.size()) return std::nullopt;
        return docs_[i_++];
    }

private:
    std::vector<Document> docs_;
    std::size_t i_ = 0;
};

} // namespace

TEST_CASE("sentence splitting") {
    auto s = split_sentences("The dog barked. The cat slept! Did the bird sing? Yes.");
    REQUIRE(s.size() == 4);
    CHECK(s[0] == "The dog barked.");
    CHECK(s[2] == "Did the bird sing?");

    SECTION("abbreviations do not split") {
        auto t = split_sentences("Mr. Smith fed the dog. Dr. Jones agreed.");
        REQUIRE(t.size() == 2);
        CHECK(t[0] == "Mr. Smith fed the dog.");
    }
    SECTION("hard-wrapped lines are joined") {
        auto t = split_sentences("The horse\nwhich ran away\nwas found.");
        REQUIRE(t.size() == 1);
        CHECK(t[0] == "The horse which ran away was found.");
    }
    SECTION("blank line is a boundary") {
        auto t = split_sentences("A heading without punctuation\n\nThe cow grazed.");
        REQUIRE(t.size() == 2);
        CHECK(t[1] == "The cow grazed.");
    }
    SECTION("overlong sentences are dropped") {
        std::string longtext(3000, 'x');
        CHECK(split_sentences(longtext).empty());
    }
}

TEST_CASE("textbook extraction cases") {
    auto lex = study_lexicon();
    SECTION("adjacent antecedent") {
        auto out = run_heuristic("The dog who barked was mine.", lex);
        REQUIRE(out.size() == 1);
        CHECK(out[0].animal == "dog");
        CHECK(out[0].pronoun == "who");
        CHECK(out[0].text.substr(out[0].span_begin, out[0].span_end - out[0].span_begin) == "who");
    }
    SECTION("no relative pronoun, no emission") {
        CHECK(run_heuristic("He saw a cat.", lex).empty());
    }
    SECTION("plural forms map to the singular name") {
        auto out = run_heuristic("The wolves that howled kept us awake.", lex);
        REQUIRE(out.size() == 1);
        CHECK(out[0].animal == "wolf");
    }
    SECTION("capitalized pronoun spans keep original bytes") {
        auto out = run_heuristic("The cows, which grazed, were calm.", lex);
        REQUIRE(out.size() == 1);
        CHECK(out[0].animal == "cow");
        CHECK(out[0].pronoun == "which");
    }
}

TEST_CASE("gold file precision") {
    auto lex = study_lexicon();
    std::ifstream in(std::filesystem::path(MLMBIAS_TEST_DATA) / "extraction_gold.jsonl");
    REQUIRE(in.good());

    std::size_t n_sentences = 0, n_extracted = 0, n_correct = 0, n_expected = 0, n_found = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++n_sentences;
        auto j = nlohmann::json::parse(line);
        std::string text = j.at("text").get<std::string>();
        std::set<std::pair<std::string, std::string>> expected;
        for (const auto& e : j.at("expect"))
            expected.insert({e.at("animal").get<std::string>(), e.at("pronoun").get<std::string>()});
        n_expected += expected.size();

        auto got = run_heuristic(text, lex);
        n_extracted += got.size();
        for (const auto& g : got) {
            if (expected.count({g.animal, g.pronoun})) {
                ++n_correct;
                ++n_found;
            }
        }
    }
    REQUIRE(n_sentences == 50);
    REQUIRE(n_extracted > 0);
    double precision = static_cast<double>(n_correct) / static_cast<double>(n_extracted);
    double recall = static_cast<double>(n_found) / static_cast<double>(n_expected);
    INFO("precision=" << precision << " recall=" << recall
                      << " extracted=" << n_extracted << " expected=" << n_expected);
    CHECK(precision >= 0.9);
    CHECK(recall >= 0.9);  // the gold positives follow the adjacency rule
}

TEST_CASE("extract streams over documents with stats") {
    auto lex = study_lexicon();
    VectorStream docs({{"d1", "The dog who barked was mine. He saw a cat."},
                       {"d2", "A chicken that escaped returned."}});
    std::vector<ExtractedSentence> got;
    ExtractionBackend backend;
    auto stats = extract(docs, lex, backend, [&](ExtractedSentence s) { got.push_back(std::move(s)); });
    CHECK(stats.documents == 2);
    CHECK(stats.sentences == 3);
    CHECK(stats.extracted == 2);
    REQUIRE(got.size() == 2);
    CHECK(got[0].source_id == "d1");
    CHECK(got[1].animal == "chicken");
}

TEST_CASE("preparsed ingest consumes external annotations") {
    auto lex = study_lexicon();
    std::string jsonl =
        R"({"sentence": "The dog who barked was mine.", "pronoun_span": [8, 11], "antecedent_span": [4, 7], "antecedent_lemma": "dog"})"
        "\n"
        R"({"sentence": "broken json)" "\n"
        R"({"sentence": "The table which stood there.", "pronoun_span": [10, 15], "antecedent_span": [4, 9], "antecedent_lemma": "table"})"
        "\n";
    std::istringstream in(jsonl);
    std::vector<ExtractedSentence> got;
    auto stats = extract_preparsed(in, lex, [&](ExtractedSentence s) { got.push_back(std::move(s)); });
    REQUIRE(got.size() == 1);  // bad json and non-lexicon antecedent skipped
    CHECK(got[0].animal == "dog");
    CHECK(got[0].pronoun == "who");
    CHECK(stats.malformed_documents == 2);
}

TEST_CASE("tabulate counts and shard-associative merge") {
    auto lex = study_lexicon();
    auto all = run_heuristic(
        "The dog who barked was mine. The dog that bit me fled. "
        "A cat which purred sat here. People who smiled left.", lex);
    REQUIRE(all.size() == 4);

    auto table = tabulate(all);
    CHECK(table.counts.at("dog")[pronoun_index("who")] == 1);
    CHECK(table.counts.at("dog")[pronoun_index("that")] == 1);
    CHECK(table.counts.at("cat")[pronoun_index("which")] == 1);
    CHECK(table.counts.at("human")[pronoun_index("who")] == 1);

    auto totals = table.totals();
    CHECK(totals[pronoun_index("who")] == 2);
    auto minus_human = table.totals_minus_human();
    CHECK(minus_human[pronoun_index("who")] == 1);

    SECTION("merge(tabulate(A), tabulate(B)) == tabulate(A+B)") {
        std::vector<ExtractedSentence> a(all.begin(), all.begin() + 2);
        std::vector<ExtractedSentence> b(all.begin() + 2, all.end());
        auto ta = tabulate(a);
        ta.merge(tabulate(b));
        CHECK(ta.counts == table.counts);
    }
    SECTION("empty stream gives all-zero table") {
        auto t = tabulate(std::vector<ExtractedSentence>{});
        CHECK(t.counts.empty());
        CHECK(t.totals() == std::array<std::uint64_t, 5>{});
    }
}

TEST_CASE("mask_pronoun") {
    UniformStubModel model({"[UNK]", "[MASK]", "the", "dog", "barked"});
    ExtractedSentence s;
    s.text = "The dog who barked was mine.";
    s.animal = "dog";
    s.pronoun = "who";
    s.span_begin = 8;
    s.span_end = 11;
    s.source_id = "t";

    SECTION("direct substitution, rest byte-identical") {
        CHECK(mask_pronoun(s, model) == "The dog [MASK] barked was mine.");
    }
    SECTION("round-trip restores the original text") {
        CHECK(unmask(mask_pronoun(s, model), s, model) == s.text);
    }
    SECTION("pronoun at sentence start") {
        ExtractedSentence t = s;
        t.text = "Who barked was never known.";
        t.span_begin = 0;
        t.span_end = 3;
        CHECK(mask_pronoun(t, model) == "[MASK] barked was never known.");
    }
    SECTION("span out of bounds") {
        ExtractedSentence bad = s;
        bad.span_end = bad.text.size() + 5;
        CHECK_THROWS_AS(mask_pronoun(bad, model), Error);
    }
}

TEST_CASE("round-trip through masking for every extracted sentence") {
    auto lex = study_lexicon();
    UniformStubModel model({"[UNK]", "[MASK]"});
    auto all = run_heuristic(
        "The dog who barked was mine. A chicken that escaped returned. "
        "The horse which won was fast. A wolf whose howl echoed scared us. "
        "The monkey whom they taught saluted.", lex);
    REQUIRE(all.size() == 5);
    for (const auto& s : all)
        CHECK(unmask(mask_pronoun(s, model), s, model) == s.text);
}

TEST_CASE("validation sampling") {
    std::vector<ExtractedSentence> pool;
    auto add = [&](std::string pronoun, int i) {
        ExtractedSentence s;
        s.text = pronoun + " sentence " + std::to_string(i);
        s.animal = "dog";
        s.pronoun = pronoun;
        s.span_begin = 0;
        s.span_end = pronoun.size();
        s.source_id = "doc" + std::to_string(i);
        // make the span hold the pronoun
        s.text = pronoun + s.text.substr(pronoun.size());
        pool.push_back(s);
    };
    for (int i = 0; i < 40; ++i) add("that", i);
    for (int i = 0; i < 25; ++i) add("who", 100 + i);
    for (int i = 0; i < 3; ++i) add("whom", 200 + i);

    SECTION("deterministic for a fixed seed") {
        auto a = sample_for_validation(pool, 10, 7);
        auto b = sample_for_validation(pool, 10, 7);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].text == b[i].text);
    }
    SECTION("per-pronoun caps and scarcity") {
        auto got = sample_for_validation(pool, 10, 1);
        std::map<std::string, int> by;
        for (const auto& s : got) by[s.pronoun]++;
        CHECK(by["that"] == 10);
        CHECK(by["who"] == 10);
        CHECK(by["whom"] == 3);  // only 3 available
        CHECK(got.size() <= 50);
    }
}

TEST_CASE("extracted sentence JSONL round-trip") {
    auto lex = study_lexicon();
    auto all = run_heuristic("The dog who barked was mine. A cat which purred sat.", lex);
    std::ostringstream out;
    write_extracted_jsonl(all, out);
    std::istringstream in(out.str());
    auto back = read_extracted_jsonl(in);
    REQUIRE(back.size() == all.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].text == all[i].text);
        CHECK(back[i].animal == all[i].animal);
        CHECK(back[i].pronoun == all[i].pronoun);
        CHECK(back[i].span_begin == all[i].span_begin);
    }
}
