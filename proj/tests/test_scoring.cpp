#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mlmbias/scoring.hpp"

using namespace mlmbias;

namespace {

std::vector<std::string> vocab() {
    return {"[UNK]", "[MASK]", "she", "is", "a", "cat", "who", "nice", "very", "."};
}

} // namespace

TEST_CASE("mask_distribution") {
    UniformStubModel model(vocab());
    SECTION("uniform stub gives 1/|V| everywhere") {
        auto d = mask_distribution(model, "she is a cat who is [MASK] .");
        CHECK(d.position == 6);
        for (double p : d.probs) CHECK(p == Catch::Approx(0.1));
        CHECK(distribution_sum(d.probs) == Catch::Approx(1.0).margin(1e-4));
    }
    SECTION("zero or multiple masks are errors") {
        CHECK_THROWS_AS(mask_distribution(model, "she is a cat"), Error);
        CHECK_THROWS_AS(mask_distribution(model, "[MASK] is a [MASK]"), Error);
    }
    SECTION("over-length sentence is an error") {
        std::string s = "[MASK]";
        for (int i = 0; i < 600; ++i) s += " cat";
        CHECK_THROWS_AS(mask_distribution(model, s), Error);
    }
    SECTION("repeated calls are bitwise identical") {
        HashStubModel h(vocab(), 5);
        auto a = mask_distribution(h, "she is a cat who is [MASK] .");
        auto b = mask_distribution(h, "she is a cat who is [MASK] .");
        REQUIRE(a.probs.size() == b.probs.size());
        for (std::size_t i = 0; i < a.probs.size(); ++i)
            CHECK(a.probs[i] == b.probs[i]);  // exact equality intended
    }
}

TEST_CASE("score_word_at_mask") {
    SECTION("uniform stub scores any single-token word 1/|V|") {
        UniformStubModel model(vocab());
        CHECK(score_word_at_mask(model, "she is [MASK]", "cat") == Catch::Approx(0.1));
    }
    SECTION("direct lookup of a configured probability") {
        TableStubModel model(vocab());
        model.set_fallback(model.make_distribution({{"who", 0.3}}));
        CHECK(score_word_at_mask(model, "she is a cat [MASK] is nice", "who") ==
              Catch::Approx(0.3));
    }
    SECTION("single-token score equals the distribution entry exactly") {
        HashStubModel model(vocab(), 9);
        auto d = mask_distribution(model, "she is a [MASK] .");
        auto enc = model.encode("cat");
        double direct = d.probs[static_cast<std::size_t>(enc.ids[0])];
        CHECK(score_word_at_mask(model, "she is a [MASK] .", "cat") == direct);
    }
    SECTION("two-token word multiplies per-slot probabilities") {
        // "very nice" as a two-token candidate: slots get 0.5 and 0.2.
        auto v = vocab();
        class TwoTokenStub : public StubModel {
        public:
            explicit TwoTokenStub(std::vector<std::string> vocab)
                : StubModel("stub:two", std::move(vocab), "[MASK]") {}
            std::vector<int> word_ids(std::string_view word) const override {
                if (word == "verynice") return {index_.at("very"), index_.at("nice")};
                return StubModel::word_ids(word);
            }
            std::vector<std::vector<Distribution>>
            predict(const std::vector<MaskQuery>& queries) const override {
                std::vector<std::vector<Distribution>> out;
                for (const auto& q : queries) {
                    std::vector<Distribution> rows;
                    for (std::size_t pos : q.positions) {
                        Distribution d(vocab_size(), 0.0);
                        // first candidate slot favors "very" at 0.5, second "nice" at 0.2
                        d[static_cast<std::size_t>(index_.at("very"))] = 0.5;
                        d[static_cast<std::size_t>(index_.at("nice"))] =
                            (pos > 0 && q.ids[pos - 1] == index_.at("very")) ? 0.2 : 0.05;
                        double used = d[static_cast<std::size_t>(index_.at("very"))] +
                                      d[static_cast<std::size_t>(index_.at("nice"))];
                        double rest = (1.0 - used) / static_cast<double>(vocab_size() - 2);
                        for (std::size_t i = 0; i < d.size(); ++i)
                            if (d[i] == 0.0) d[i] = rest;
                        rows.push_back(std::move(d));
                    }
                    out.push_back(std::move(rows));
                }
                return out;
            }
        };
        TwoTokenStub model(v);
        // slot 0 masked: p(very)=0.5; slot 1 masked with "very" before it: p(nice)=0.2
        double got = score_word_at_mask(model, "she is [MASK] .", "verynice");
        CHECK(got == Catch::Approx(0.5 * 0.2));
    }
    SECTION("empty word is an error") {
        UniformStubModel model(vocab());
        CHECK_THROWS_AS(score_word_at_mask(model, "she is [MASK]", ""), Error);
    }
}

TEST_CASE("pseudo_log_likelihood") {
    SECTION("uniform stub: pll = n log(1/|V|)") {
        UniformStubModel model(vocab());
        auto s = pseudo_log_likelihood(model, "she is a cat");
        CHECK(s.token_count == 4);
        CHECK(s.pll == Catch::Approx(4.0 * std::log(0.1)).epsilon(1e-12));
        CHECK(s.pll <= 0.0);
    }
    SECTION("perfect model: pll = 0") {
        TableStubModel model(vocab());
        // one-hot at the original token of each position of "she is a cat"
        auto enc = model.encode("she is a cat");
        for (std::size_t t = 0; t < enc.ids.size(); ++t) {
            Distribution d(model.vocab_size(), 0.0);
            d[static_cast<std::size_t>(enc.ids[t])] = 1.0;
            model.set_at_position(t, d);
        }
        auto s = pseudo_log_likelihood(model, "she is a cat");
        CHECK(s.pll == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("hand sum of logs: 0.5, 0.25, 0.8 -> ln 0.1") {
        TableStubModel model(vocab());
        auto enc = model.encode("she is nice");
        double probs[3] = {0.5, 0.25, 0.8};
        for (std::size_t t = 0; t < 3; ++t) {
            Distribution d(model.vocab_size(), 0.0);
            d[static_cast<std::size_t>(enc.ids[t])] = probs[t];
            double rest = (1.0 - probs[t]) / static_cast<double>(model.vocab_size() - 1);
            for (std::size_t i = 0; i < d.size(); ++i)
                if (i != static_cast<std::size_t>(enc.ids[t])) d[i] = rest;
            model.set_at_position(t, d);
        }
        auto s = pseudo_log_likelihood(model, "she is nice");
        CHECK(s.pll == Catch::Approx(std::log(0.1)).epsilon(1e-12));
        CHECK(s.token_count == 3);
    }
    SECTION("empty sentence is an error") {
        UniformStubModel model(vocab());
        CHECK_THROWS_AS(pseudo_log_likelihood(model, "   "), Error);
    }
}

TEST_CASE("pseudo_perplexity") {
    SECTION("perfect model gives exactly 1") {
        TableStubModel model(vocab());
        auto enc = model.encode("she is a cat");
        for (std::size_t t = 0; t < enc.ids.size(); ++t) {
            Distribution d(model.vocab_size(), 0.0);
            d[static_cast<std::size_t>(enc.ids[t])] = 1.0;
            model.set_at_position(t, d);
        }
        CHECK(pseudo_perplexity(model, {"she is a cat"}) == Catch::Approx(1.0));
    }
    SECTION("uniform stub gives exactly |V| under per-token normalization") {
        UniformStubModel model(vocab());
        CHECK(pseudo_perplexity(model, {"she is a cat", "who is nice"}) ==
              Catch::Approx(10.0).epsilon(1e-12));
    }
    SECTION("empty input list is an error") {
        UniformStubModel model(vocab());
        CHECK_THROWS_AS(pseudo_perplexity(model, {}), Error);
    }
}
