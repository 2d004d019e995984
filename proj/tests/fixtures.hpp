#pragma once

#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "expertfind/expertfind.hpp"

namespace fixture {

using namespace expertfind;

inline Question question(std::string id, std::vector<std::string> tags, Timestamp ts,
                         std::string category = "bankruptcy", std::string text = "question text")
{
    return Question{std::move(id), std::move(text), std::move(category), std::move(tags), "los angeles", "california",
                    ts};
}

inline Answer answer(std::string id, std::string question_id, std::string lawyer, std::string text, bool best = false,
                     Timestamp ts = 100)
{
    return Answer{std::move(id), std::move(question_id), std::move(lawyer), std::move(text), best, ts};
}

inline LawyerRef lawyer(std::string id, std::string city = "los angeles")
{
    return LawyerRef{std::move(id), std::move(city), "california"};
}

/// Three lawyers, two answers each, two questions.
inline Corpus toy_corpus()
{
    std::vector<Question> qs{question("q1", {"debt"}, 10), question("q2", {"tax"}, 20)};
    std::vector<Answer> as{
        answer("a1", "q1", "A", "tax debt discharge tax", true, 11),
        answer("a2", "q2", "A", "chapter seven filing", false, 21),
        answer("a3", "q2", "B", "tax return", false, 22),
        answer("a4", "q1", "B", "debt collector calls debt debt", false, 12),
        answer("a5", "q1", "C", "discharge of student loans", false, 13),
        answer("a6", "q2", "C", "foreclosure on home mortgage tax", true, 23),
    };
    std::vector<LawyerRef> ls{lawyer("A", "los angeles"), lawyer("B", "san diego"), lawyer("C", "los angeles")};
    return Corpus::build(std::move(qs), std::move(as), {}, std::move(ls));
}

/// ASCII tokenizer written independently of the library analyzer.
inline std::vector<std::string> ascii_tokens(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string chunk;
    while (ss >> chunk) {
        std::string tok;
        for (char c : chunk) {
            if (std::isalnum(static_cast<unsigned char>(c))) {
                tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            }
        }
        if (!tok.empty()) {
            out.push_back(tok);
        }
    }
    return out;
}

/// Scratch directory removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& name)
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path()
            / ("expertfind-" + name + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content)
{
    std::ofstream out(p, std::ios::binary);
    out << content;
}

}  // namespace fixture
