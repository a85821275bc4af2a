#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlmbias/model.hpp"
#include "mlmbias/scoring.hpp"

namespace mlmbias {

constexpr const char* kAnimalSlot = "[ANIMAL]";
constexpr const char* kMaskSlot = "[MASK]";

enum class SentenceKind { human, object };

struct TemplateFamily {
    std::vector<std::string> human_patterns;   // "She is a [ANIMAL] who is [MASK]."
    std::vector<std::string> object_patterns;  // {this,that,it} x {which,that}
};

struct ConcreteSentence {
    std::string text;  // still contains the [MASK] placeholder
    SentenceKind kind = SentenceKind::object;
};

struct MeanDistributionPair {
    std::string animal;
    Distribution p_mean_h;
    Distribution p_mean_o;
};

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
    std::size_t at = 0;
    while ((at = s.find(from, at)) != std::string::npos) {
        s.replace(at, from.size(), to);
        at += to.size();
    }
}

inline void validate_pattern(const std::string& p) {
    require(p.find(kAnimalSlot) != std::string::npos, "pattern lacks [ANIMAL]: " + p);
    require(p.find(kMaskSlot) != std::string::npos, "pattern lacks [MASK]: " + p);
}

// The probe family used throughout: 2 human patterns (she/he + who) and the
// 6 object patterns ({this,that,it} x {which,that}).
inline TemplateFamily default_template_family() {
    TemplateFamily f;
    f.human_patterns = {
        "She is a [ANIMAL] who is [MASK].",
        "He is a [ANIMAL] who is [MASK].",
    };
    f.object_patterns = {
        "This is a [ANIMAL] which is [MASK].",
        "That is a [ANIMAL] which is [MASK].",
        "It is a [ANIMAL] which is [MASK].",
        "This is a [ANIMAL] that is [MASK].",
        "That is a [ANIMAL] that is [MASK].",
        "It is a [ANIMAL] that is [MASK].",
    };
    return f;
}

inline TemplateFamily load_template_family(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot read template family: " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    TemplateFamily f;
    for (const auto& p : j.at("human")) f.human_patterns.push_back(p.get<std::string>());
    for (const auto& p : j.at("object")) f.object_patterns.push_back(p.get<std::string>());
    for (const auto& p : f.human_patterns) validate_pattern(p);
    for (const auto& p : f.object_patterns) validate_pattern(p);
    require(!f.human_patterns.empty() && !f.object_patterns.empty(),
            "template family needs both human and object patterns");
    return f;
}

inline void save_template_family(const TemplateFamily& f, const std::filesystem::path& path) {
    nlohmann::json j;
    j["human"] = f.human_patterns;
    j["object"] = f.object_patterns;
    std::ofstream out(path);
    require(out.good(), "cannot write template family: " + path.string());
    out << j.dump(2) << '\n';
}

// "a" is kept verbatim even before vowels, matching the probe's fixed
// article; set an_agreement to switch to a/an.
inline std::string fill_animal(std::string pattern, std::string_view animal,
                               bool an_agreement = false) {
    if (an_agreement && !animal.empty()) {
        char c = animal.front();
        if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') {
            replace_all(pattern, std::string(" a ") + kAnimalSlot,
                        std::string(" an ") + kAnimalSlot);
        }
    }
    replace_all(pattern, kAnimalSlot, animal);
    return pattern;
}

inline std::vector<ConcreteSentence>
generate_templates(const TemplateFamily& family, std::string_view animal,
                   bool an_agreement = false) {
    require(!animal.empty(), "empty animal name");
    std::vector<ConcreteSentence> out;
    out.reserve(family.human_patterns.size() + family.object_patterns.size());
    for (const auto& p : family.human_patterns)
        out.push_back({fill_animal(p, animal, an_agreement), SentenceKind::human});
    for (const auto& p : family.object_patterns)
        out.push_back({fill_animal(p, animal, an_agreement), SentenceKind::object});
    return out;
}

// Mean of the mask-slot distributions over one template set (Eq. 1 style):
// p_mean = (1/|T|) sum_s p(w | s). The placeholder [MASK] is replaced by the
// model's own mask token before encoding.
inline Distribution mean_distribution_over(const MaskedModel& model,
                                           const std::vector<std::string>& sentences) {
    require(!sentences.empty(), "no sentences to average");
    Distribution mean(model.vocab_size(), 0.0);
    for (const auto& s : sentences) {
        std::string concrete = s;
        replace_all(concrete, kMaskSlot, model.mask_token());
        MaskDistribution d = mask_distribution(model, concrete);
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += d.probs[i];
    }
    for (double& p : mean) p /= static_cast<double>(sentences.size());
    return mean;
}

inline MeanDistributionPair
mean_mask_distribution(const MaskedModel& model, const TemplateFamily& family,
                       std::string_view animal, bool an_agreement = false) {
    MeanDistributionPair pair;
    pair.animal = std::string(animal);
    std::vector<std::string> human, object;
    for (const auto& s : generate_templates(family, animal, an_agreement)) {
        (s.kind == SentenceKind::human ? human : object).push_back(s.text);
    }
    pair.p_mean_h = mean_distribution_over(model, human);
    pair.p_mean_o = mean_distribution_over(model, object);
    return pair;
}

} // namespace mlmbias
