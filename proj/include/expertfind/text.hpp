#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace expertfind {

namespace utf8 {

inline constexpr char32_t replacement = 0xFFFD;

/// Decodes one code point starting at `pos` and advances `pos`. Invalid
/// sequences consume one byte and yield U+FFFD.
inline char32_t decode(std::string_view s, std::size_t& pos)
{
    auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    unsigned char lead = byte(pos);
    if (lead < 0x80) {
        ++pos;
        return lead;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        ++pos;
        return replacement;
    }
    if (pos + len > s.size()) {
        ++pos;
        return replacement;
    }
    for (std::size_t i = 1; i < len; ++i) {
        unsigned char c = byte(pos + i);
        if ((c & 0xC0) != 0x80) {
            ++pos;
            return replacement;
        }
        cp = (cp << 6) | (c & 0x3F);
    }
    pos += len;
    return cp;
}

inline void encode(char32_t cp, std::string& out)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline bool is_space(char32_t cp)
{
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\v' || cp == U'\f'
        || cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x2028 || cp == 0x2029
        || cp == 0x3000;
}

/// Letters and digits. Outside ASCII this is a block-level approximation:
/// punctuation, symbol and emoji blocks are excluded, everything else counts.
inline bool is_alnum(char32_t cp)
{
    if (cp < 0x80) {
        return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || (cp >= U'0' && cp <= U'9');
    }
    if (cp == replacement) {
        return false;
    }
    if (cp <= 0xBF) {
        return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
    }
    if (cp == 0xD7 || cp == 0xF7) {
        return false;
    }
    if ((cp >= 0x2000 && cp <= 0x2BFF) || (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xFE30 && cp <= 0xFE4F)
        || (cp >= 0xFF00 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) || cp >= 0x1F000) {
        return false;
    }
    return true;
}

/// Simple case folding for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
inline char32_t to_lower(char32_t cp)
{
    if (cp >= U'A' && cp <= U'Z') {
        return cp + 0x20;
    }
    if (cp < 0xC0) {
        return cp;
    }
    if (cp <= 0xDE && cp != 0xD7) {
        return cp + 0x20;
    }
    if ((cp >= 0x100 && cp <= 0x12F) || (cp >= 0x132 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
        return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) {
        return cp + 0x20;
    }
    if (cp >= 0x410 && cp <= 0x42F) {
        return cp + 0x20;
    }
    if (cp >= 0x400 && cp <= 0x40F) {
        return cp + 0x50;
    }
    return cp;
}

}  // namespace utf8

/// Byte range of a token's whitespace-delimited chunk in the analyzed text.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct AnalyzerOptions {
    bool lowercase = true;
    std::unordered_set<std::string> stopwords;
};

/// Splits on whitespace, strips every non-alphanumeric code point from each
/// chunk and lowercases it. Chunks that end up empty (or are stopwords) are
/// dropped. No stemming.
class Analyzer {
  public:
    Analyzer() = default;
    explicit Analyzer(AnalyzerOptions options) : options_(std::move(options)) {}

    [[nodiscard]] const AnalyzerOptions& options() const noexcept { return options_; }

    /// Calls `fn(std::string token, TokenSpan span)` for every token in order.
    template <typename Fn>
    void analyze(std::string_view text, Fn&& fn) const
    {
        std::size_t pos = 0;
        std::string token;
        std::size_t chunk_begin = 0;
        bool in_chunk = false;
        auto flush = [&](std::size_t chunk_end) {
            if (in_chunk && !token.empty() && !options_.stopwords.contains(token)) {
                fn(std::move(token), TokenSpan{chunk_begin, chunk_end});
            }
            token.clear();
            in_chunk = false;
        };
        while (pos < text.size()) {
            std::size_t start = pos;
            char32_t cp = utf8::decode(text, pos);
            if (utf8::is_space(cp)) {
                flush(start);
                continue;
            }
            if (!in_chunk) {
                in_chunk = true;
                chunk_begin = start;
            }
            if (utf8::is_alnum(cp)) {
                utf8::encode(options_.lowercase ? utf8::to_lower(cp) : cp, token);
            }
        }
        flush(text.size());
    }

    [[nodiscard]] std::vector<std::string> tokens(std::string_view text) const
    {
        std::vector<std::string> out;
        analyze(text, [&](std::string tok, TokenSpan) { out.push_back(std::move(tok)); });
        return out;
    }

    [[nodiscard]] std::size_t count(std::string_view text) const
    {
        std::size_t n = 0;
        analyze(text, [&](const std::string&, TokenSpan) { ++n; });
        return n;
    }

    /// Longest prefix of `text` holding at most `max_tokens` tokens, cut right
    /// after the last kept token's chunk.
    [[nodiscard]] std::string_view truncate(std::string_view text, std::size_t max_tokens) const
    {
        std::size_t n = 0;
        std::size_t cut = 0;
        bool done = false;
        analyze(text, [&](const std::string&, TokenSpan span) {
            if (done) {
                return;
            }
            if (n == max_tokens) {
                done = true;
                return;
            }
            ++n;
            cut = span.end;
        });
        return done ? text.substr(0, cut) : text;
    }

  private:
    AnalyzerOptions options_;
};

}  // namespace expertfind
