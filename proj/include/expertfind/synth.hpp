#pragma once

#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "random.hpp"

namespace expertfind {

/// Parameters of the planted-expert corpus generator.
struct SynthConfig {
    std::size_t n_lawyers = 120;
    std::size_t n_questions = 420;
    std::size_t n_tags = 10;
    std::size_t experts_per_tag = 3;
    /// Tag text -> topic tokens. Generated when empty (n_tags entries).
    std::map<std::string, std::vector<std::string>> topic_vocab;
    /// Probability that a planted expert's word is on-topic and that their
    /// answer is marked best.
    double expert_skill = 0.9;
    double noise_skill = 0.1;
    /// Probability that a planted expert answers a question on their tag.
    double expert_answer_rate = 0.6;
    std::size_t noise_answers_min = 2;
    std::size_t noise_answers_max = 4;
    double comment_rate = 0.5;
    double secondary_tag_rate = 0.3;
    std::string category = "bankruptcy";
    std::vector<std::string> cities{"los angeles", "san diego", "san francisco", "sacramento"};
    std::uint64_t seed = 42;
};

struct SynthCorpus {
    Corpus corpus;
    /// Tag text -> planted experts.
    std::map<std::string, std::set<std::string>> planted;

    /// One query per tag with the planted experts as relevant set, ids S001...
    [[nodiscard]] std::vector<QueryTopic> planted_queries() const
    {
        std::vector<QueryTopic> out;
        for (const auto& [tag, experts] : planted) {
            char id[16];
            std::snprintf(id, sizeof id, "S%03zu", out.size() + 1);
            out.push_back({id, tag, experts});
        }
        return out;
    }
};

namespace synth_detail {

/// Pronounceable word spelled from the decimal digits of n.
inline std::string word(std::size_t n)
{
    static constexpr const char* syllables[] = {"ba", "ke", "li", "mo", "nu", "ra", "se", "ti", "vo", "zu"};
    std::string digits = std::to_string(n);
    std::string out;
    for (char d : digits) {
        out += syllables[d - '0'];
    }
    return out;
}

inline constexpr const char* positive_words[] = {"glad", "good", "helpful", "hope", "protect", "benefit", "safe"};
inline constexpr const char* negative_words[] = {"unfortunately", "risk", "problem", "difficult", "lose", "penalty"};

inline constexpr const char* positive_comments[] = {
    "Thank you so much, this was very helpful.",
    "Thanks, great answer about the %s question.",
    "This is excellent advice, I appreciate it.",
    "Thank you, the %s explanation is clear now.",
};
inline constexpr const char* other_comments[] = {
    "I still do not understand what to do.",
    "Can you explain the %s part again?",
    "That is not what I asked, unfortunately.",
    "Ok.",
};

template <std::size_t N>
const char* pick(const char* const (&items)[N], Rng& rng)
{
    return items[uniform_below(rng, N)];
}

inline std::size_t between(Rng& rng, std::size_t lo, std::size_t hi)
{
    return lo + uniform_below(rng, hi - lo + 1);
}

}  // namespace synth_detail

/// Bag-of-words corpus in one category with planted experts per tag: experts
/// write on-topic text with probability expert_skill, win best answer at that
/// rate and attract positive comments; everyone else does so at noise_skill.
inline SynthCorpus generate(SynthConfig config)
{
    using namespace synth_detail;
    if (config.expert_skill <= config.noise_skill) {
        throw InvalidArgument("synth: expert_skill must exceed noise_skill");
    }
    for (double r : {config.expert_skill, config.noise_skill, config.comment_rate, config.expert_answer_rate,
                     config.secondary_tag_rate}) {
        if (r < 0.0 || r > 1.0) {
            throw InvalidArgument("synth: rates must lie in [0, 1]");
        }
    }
    if (config.noise_answers_min > config.noise_answers_max) {
        throw InvalidArgument("synth: noise_answers_min > noise_answers_max");
    }
    if (config.cities.empty()) {
        throw InvalidArgument("synth: need at least one city");
    }

    if (config.topic_vocab.empty()) {
        for (std::size_t t = 0; t < config.n_tags; ++t) {
            std::vector<std::string> vocab;
            for (std::size_t j = 0; j < 12; ++j) {
                vocab.push_back(word(1000 + t * 50 + j));
            }
            config.topic_vocab[vocab[0] + " " + vocab[1]] = std::move(vocab);
        }
    }
    {
        std::map<std::string, std::string> owner;
        for (const auto& [tag, vocab] : config.topic_vocab) {
            if (vocab.empty()) {
                throw InvalidArgument("synth: tag '" + tag + "' has an empty vocabulary");
            }
            for (const auto& w : vocab) {
                auto [it, fresh] = owner.emplace(w, tag);
                if (!fresh && it->second != tag) {
                    throw InvalidArgument("synth: token '" + w + "' is in the vocabularies of both '" + it->second
                                          + "' and '" + tag + "'");
                }
            }
        }
    }
    if (config.n_questions == 0) {
        return {};
    }
    std::vector<std::string> tags;
    for (const auto& [tag, vocab] : config.topic_vocab) {
        tags.push_back(tag);
    }
    const std::size_t n_planted = tags.size() * config.experts_per_tag;
    if (config.n_lawyers < n_planted + config.noise_answers_max) {
        throw InvalidArgument("synth: not enough lawyers for planted experts and noise answerers");
    }
    std::vector<std::string> background;
    for (std::size_t j = 0; j < 60; ++j) {
        background.push_back(word(5000 + j));
    }

    Rng rng(derive_seed(config.seed, "synth"));

    std::vector<LawyerRef> lawyers;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < config.n_lawyers; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "L%04zu", i + 1);
        ids.emplace_back(id);
        lawyers.push_back({id, config.cities[i % config.cities.size()], "california"});
    }
    std::vector<std::string> order = ids;
    shuffle(std::span(order), rng);

    SynthCorpus out;
    std::map<std::string, std::vector<std::string>> experts_of;
    for (std::size_t t = 0; t < tags.size(); ++t) {
        for (std::size_t e = 0; e < config.experts_per_tag; ++e) {
            const auto& l = order[t * config.experts_per_tag + e];
            experts_of[tags[t]].push_back(l);
            out.planted[tags[t]].insert(l);
        }
    }
    const std::vector<std::string> noise_pool(order.begin() + static_cast<std::ptrdiff_t>(n_planted), order.end());

    auto sentence = [&](const std::vector<std::string>& topic, double on_topic, double p_pos, double p_neg) {
        std::vector<std::string> words;
        const auto n = between(rng, 6, 12);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& vocab = bernoulli(rng, on_topic) ? topic : background;
            words.push_back(vocab[uniform_below(rng, vocab.size())]);
        }
        if (bernoulli(rng, p_pos)) {
            words.insert(words.begin() + static_cast<std::ptrdiff_t>(uniform_below(rng, words.size() + 1)),
                         pick(positive_words, rng));
        } else if (bernoulli(rng, p_neg)) {
            words.insert(words.begin() + static_cast<std::ptrdiff_t>(uniform_below(rng, words.size() + 1)),
                         pick(negative_words, rng));
        }
        std::string s;
        for (const auto& w : words) {
            s += (s.empty() ? "" : " ") + w;
        }
        s[0] = static_cast<char>(s[0] - 'a' + 'A');
        return s + ".";
    };

    std::vector<Question> questions;
    std::vector<Answer> answers;
    std::vector<Comment> comments;
    const Timestamp base = 1467331200;  // 2016-07-01
    for (std::size_t qi = 0; qi < config.n_questions; ++qi) {
        const auto& primary = tags[qi % tags.size()];
        const auto& topic = config.topic_vocab.at(primary);
        Question q;
        char qid[16];
        std::snprintf(qid, sizeof qid, "q%06zu", qi + 1);
        q.id = qid;
        q.category = config.category;
        q.tags = {primary};
        if (tags.size() > 1 && bernoulli(rng, config.secondary_tag_rate)) {
            auto other = tags[uniform_below(rng, tags.size())];
            if (other != primary) {
                q.tags.push_back(other);
            }
        }
        q.city = config.cities[uniform_below(rng, config.cities.size())];
        q.state = "california";
        q.timestamp = base + static_cast<Timestamp>(qi) * 3600 * 4;
        q.text = sentence(topic, 0.3, 0.0, 0.3);

        std::vector<std::pair<std::string, bool>> answerers;  // lawyer, is planted expert
        for (const auto& e : experts_of[primary]) {
            if (bernoulli(rng, config.expert_answer_rate)) {
                answerers.emplace_back(e, true);
            }
        }
        std::set<std::string> used;
        const auto n_noise = between(rng, config.noise_answers_min, config.noise_answers_max);
        while (used.size() < n_noise) {
            const auto& l = noise_pool[uniform_below(rng, noise_pool.size())];
            if (used.insert(l).second) {
                answerers.emplace_back(l, false);
            }
        }

        for (const auto& [lawyer, expert] : answerers) {
            const double skill = expert ? config.expert_skill : config.noise_skill;
            Answer a;
            char aid[16];
            std::snprintf(aid, sizeof aid, "a%06zu", answers.size() + 1);
            a.id = aid;
            a.question_id = q.id;
            a.lawyer_id = lawyer;
            a.timestamp = q.timestamp + 60 + static_cast<Timestamp>(uniform_below(rng, 48 * 3600));
            const auto n_sent = between(rng, 3, 6);
            for (std::size_t s = 0; s < n_sent; ++s) {
                a.text += (s == 0 ? "" : " ") + sentence(topic, skill, expert ? 0.5 : 0.2, expert ? 0.1 : 0.3);
            }
            a.is_best = bernoulli(rng, skill);
            if (bernoulli(rng, config.comment_rate)) {
                Comment c;
                char cid[16];
                std::snprintf(cid, sizeof cid, "c%06zu", comments.size() + 1);
                c.id = cid;
                c.answer_id = a.id;
                c.timestamp = a.timestamp + 60 + static_cast<Timestamp>(uniform_below(rng, 24 * 3600));
                const char* tmpl = bernoulli(rng, skill) ? pick(positive_comments, rng) : pick(other_comments, rng);
                char buf[256];
                std::snprintf(buf, sizeof buf, tmpl, topic[uniform_below(rng, topic.size())].c_str());
                c.text = std::string(buf) + " " + sentence(topic, skill * 0.5, 0.0, 0.0);
                comments.push_back(std::move(c));
            }
            answers.push_back(std::move(a));
        }
        questions.push_back(std::move(q));
    }

    out.corpus = Corpus::build(std::move(questions), std::move(answers), std::move(comments), std::move(lawyers));
    return out;
}

}  // namespace expertfind
