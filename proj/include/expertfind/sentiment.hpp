#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "error.hpp"
#include "text.hpp"

namespace expertfind {

/// Splits after '.', '!' or '?' when followed by whitespace or the end of
/// the text. Segments are trimmed; empty ones are dropped.
inline std::vector<std::string> split_sentences(std::string_view text)
{
    constexpr std::string_view ws = " \t\r\n\v\f";
    std::vector<std::string> out;
    auto emit = [&](std::string_view seg) {
        auto b = seg.find_first_not_of(ws);
        if (b == std::string_view::npos) {
            return;
        }
        auto e = seg.find_last_not_of(ws);
        out.emplace_back(seg.substr(b, e - b + 1));
    };
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c != '.' && c != '!' && c != '?') {
            continue;
        }
        if (i + 1 == text.size() || ws.find(text[i + 1]) != std::string_view::npos) {
            emit(text.substr(start, i + 1 - start));
            start = i + 1;
        }
    }
    if (start < text.size()) {
        emit(text.substr(start));
    }
    return out;
}

struct SentimentLexicon {
    std::unordered_map<std::string, double> valence;
    std::unordered_set<std::string> negators;
    std::unordered_map<std::string, double> intensifiers;

    /// A small general-purpose word list so the pipeline runs without
    /// external files. Load the full reference lexicon for real use.
    static SentimentLexicon builtin()
    {
        SentimentLexicon lex;
        lex.valence = {
            {"good", 1.9},       {"great", 3.1},     {"excellent", 2.7},   {"helpful", 1.7},  {"thanks", 1.9},
            {"thank", 1.5},      {"happy", 2.7},     {"glad", 2.0},        {"best", 3.2},     {"useful", 1.9},
            {"hope", 1.9},       {"love", 3.2},      {"appreciate", 2.3},  {"appreciated", 2.3}, {"awesome", 3.1},
            {"nice", 1.8},       {"fine", 0.8},      {"clear", 1.6},       {"easy", 1.9},     {"success", 2.7},
            {"successful", 2.8}, {"protect", 1.6},   {"protected", 1.6},   {"safe", 1.9},     {"relief", 2.1},
            {"lucky", 1.8},      {"fortunately", 1.9}, {"benefit", 2.0},   {"wonderful", 2.7}, {"perfect", 2.7},
            {"bad", -2.5},       {"terrible", -2.1}, {"horrible", -2.5},   {"worst", -3.1},   {"sad", -2.1},
            {"angry", -2.3},     {"problem", -1.7},  {"problems", -1.7},   {"wrong", -2.1},   {"fail", -2.5},
            {"failed", -2.3},    {"lose", -1.3},     {"lost", -1.3},       {"risk", -1.1},    {"unfortunately", -1.5},
            {"sorry", -0.3},     {"worry", -1.9},    {"worried", -1.2},    {"afraid", -2.0},  {"difficult", -1.5},
            {"penalty", -1.7},   {"fraud", -2.8},    {"useless", -1.8},    {"hate", -2.7},    {"awful", -2.0},
            {"trouble", -1.7},   {"stressful", -1.8}, {"denied", -1.7},    {"unfair", -2.1},  {"sucks", -1.5},
        };
        lex.negators = {"not",     "no",     "never",  "none",     "nobody", "nothing",  "neither", "nor",
                        "cannot",  "cant",   "dont",   "doesnt",   "didnt",  "isnt",     "wasnt",   "arent",
                        "werent",  "wont",   "wouldnt", "shouldnt", "couldnt", "aint",   "without", "nowhere"};
        lex.intensifiers = {
            {"very", 0.293},      {"really", 0.293},  {"extremely", 0.293}, {"absolutely", 0.293},
            {"completely", 0.293}, {"highly", 0.293}, {"so", 0.293},        {"totally", 0.293},
            {"incredibly", 0.293}, {"most", 0.293},   {"especially", 0.293}, {"truly", 0.293},
            {"barely", -0.293},   {"hardly", -0.293}, {"slightly", -0.293}, {"somewhat", -0.293},
            {"marginally", -0.293}, {"occasionally", -0.293},
        };
        return lex;
    }

    /// `token<TAB>valence[<TAB>...]` lines; extra columns are ignored.
    static SentimentLexicon load(const std::filesystem::path& valence_file,
                                 const std::filesystem::path& negator_file = {},
                                 const std::filesystem::path& intensifier_file = {})
    {
        SentimentLexicon lex;
        for_each_line(valence_file, [&](const std::vector<std::string>& cols, std::size_t lineno) {
            if (cols.size() < 2) {
                throw Error(valence_file.string() + ":" + std::to_string(lineno) + ": expected token<TAB>valence");
            }
            double v = std::stod(cols[1]);
            if (v < -4.0 || v > 4.0) {
                throw Error(valence_file.string() + ":" + std::to_string(lineno) + ": valence out of [-4, 4]");
            }
            lex.valence[lowercase(cols[0])] = v;
        });
        if (!negator_file.empty()) {
            for_each_line(negator_file, [&](const std::vector<std::string>& cols, std::size_t) {
                lex.negators.insert(lowercase(cols[0]));
            });
        }
        if (!intensifier_file.empty()) {
            for_each_line(intensifier_file, [&](const std::vector<std::string>& cols, std::size_t lineno) {
                if (cols.size() < 2) {
                    throw Error(intensifier_file.string() + ":" + std::to_string(lineno)
                                + ": expected token<TAB>boost");
                }
                lex.intensifiers[lowercase(cols[0])] = std::stod(cols[1]);
            });
        }
        return lex;
    }

  private:
    static std::string lowercase(const std::string& s)
    {
        std::string out;
        std::size_t pos = 0;
        while (pos < s.size()) {
            utf8::encode(utf8::to_lower(utf8::decode(s, pos)), out);
        }
        return out;
    }

    template <typename Fn>
    static void for_each_line(const std::filesystem::path& path, Fn&& fn)
    {
        std::ifstream in(path);
        if (!in) {
            throw Error("cannot open " + path.string());
        }
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty() || line[0] == '#') {
                continue;
            }
            std::vector<std::string> cols;
            std::stringstream ss(line);
            std::string col;
            while (std::getline(ss, col, '\t')) {
                cols.push_back(col);
            }
            fn(cols, lineno);
        }
    }
};

enum class SentimentLabel { negative, neutral, positive };

struct SentenceSentiment {
    double compound = 0.0;
    SentimentLabel label = SentimentLabel::neutral;
};

struct SentimentRules {
    std::size_t negation_window = 3;
    double negation_scalar = -0.74;
    double alpha = 15.0;
    double threshold = 0.05;
};

inline SentimentLabel label_for(double compound, double threshold = 0.05)
{
    if (compound >= threshold) {
        return SentimentLabel::positive;
    }
    if (compound <= -threshold) {
        return SentimentLabel::negative;
    }
    return SentimentLabel::neutral;
}

/// Lexicon-and-rules sentence scorer. Each matched valence is boosted by
/// intensifiers in the preceding window (toward its sign), flipped and damped
/// by a preceding negator, and the sum S is squashed to S / sqrt(S^2 + alpha).
class SentimentScorer {
  public:
    SentimentScorer(SentimentLexicon lexicon, Analyzer analyzer = {}, SentimentRules rules = {})
        : lexicon_(std::move(lexicon)), analyzer_(std::move(analyzer)), rules_(rules)
    {}

    [[nodiscard]] const SentimentLexicon& lexicon() const noexcept { return lexicon_; }
    [[nodiscard]] const SentimentRules& rules() const noexcept { return rules_; }

    /// Raw valence sum before squashing.
    [[nodiscard]] double raw_sum(std::string_view sentence) const
    {
        const auto tokens = analyzer_.tokens(sentence);
        double sum = 0.0;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            auto it = lexicon_.valence.find(tokens[i]);
            if (it == lexicon_.valence.end()) {
                continue;
            }
            double v = it->second;
            const double sign = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
            bool negated = false;
            for (std::size_t j = 1; j <= rules_.negation_window && j <= i; ++j) {
                const auto& prev = tokens[i - j];
                if (auto boost = lexicon_.intensifiers.find(prev); boost != lexicon_.intensifiers.end()) {
                    v += sign * boost->second;
                }
                negated = negated || lexicon_.negators.contains(prev);
            }
            if (negated) {
                v *= rules_.negation_scalar;
            }
            sum += v;
        }
        return sum;
    }

    [[nodiscard]] double normalize(double sum) const { return sum / std::sqrt(sum * sum + rules_.alpha); }

    [[nodiscard]] SentenceSentiment score(std::string_view sentence) const
    {
        const double c = normalize(raw_sum(sentence));
        return {c, label_for(c, rules_.threshold)};
    }

  private:
    SentimentLexicon lexicon_;
    Analyzer analyzer_;
    SentimentRules rules_;
};

}  // namespace expertfind
