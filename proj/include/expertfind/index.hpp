#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "text.hpp"

namespace expertfind {

/// Dense document number; one document per answer, in corpus order.
using DocId = std::uint32_t;

struct Posting {
    DocId doc = 0;
    std::uint32_t tf = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

/// Inverted index over answers plus the authorship and location metadata the
/// rankers need. Immutable once built.
class IndexedCollection {
  public:
    static constexpr std::uint32_t format_version = 1;

    IndexedCollection() = default;

    static IndexedCollection build(const Corpus& corpus, const Analyzer& analyzer)
    {
        IndexedCollection ix;
        ix.analyzer_ = analyzer;
        for (const auto& l : corpus.lawyers()) {
            ix.lawyer_city_[l.lawyer_id] = l.city;
        }
        std::map<std::string, std::vector<Posting>> postings;
        for (const auto& a : corpus.answers()) {
            const auto doc = static_cast<DocId>(ix.doc_name_.size());
            ix.doc_name_.push_back(a.id);
            ix.doc_author_.push_back(a.lawyer_id);
            ix.doc_city_.push_back(ix.lawyer_city_[a.lawyer_id]);
            std::map<std::string, std::uint32_t> tf;
            std::uint32_t len = 0;
            analyzer.analyze(a.text, [&](std::string tok, TokenSpan) {
                ++tf[std::move(tok)];
                ++len;
            });
            ix.doc_len_.push_back(len);
            for (auto& [term, count] : tf) {
                postings[term].push_back({doc, count});
            }
        }
        for (auto& [term, list] : postings) {
            ix.terms_.push_back(term);
            ix.postings_.push_back(std::move(list));
        }
        ix.finalize();
        return ix;
    }

    [[nodiscard]] const Analyzer& analyzer() const noexcept { return analyzer_; }

    [[nodiscard]] std::size_t doc_count() const noexcept { return doc_name_.size(); }
    [[nodiscard]] const std::string& doc_name(DocId d) const { return doc_name_.at(d); }
    [[nodiscard]] const std::string& doc_author(DocId d) const { return doc_author_.at(d); }
    [[nodiscard]] const std::string& doc_city(DocId d) const { return doc_city_.at(d); }
    [[nodiscard]] std::uint32_t doc_len(DocId d) const { return doc_len_.at(d); }
    [[nodiscard]] std::uint64_t collection_len() const noexcept { return collection_len_; }

    [[nodiscard]] double mean_doc_len() const noexcept
    {
        return doc_len_.empty() ? 0.0 : static_cast<double>(collection_len_) / static_cast<double>(doc_len_.size());
    }

    [[nodiscard]] std::optional<DocId> find_doc(std::string_view answer_id) const
    {
        auto it = doc_by_name_.find(std::string(answer_id));
        if (it == doc_by_name_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    /// Sorted vocabulary.
    [[nodiscard]] const std::vector<std::string>& terms() const noexcept { return terms_; }

    [[nodiscard]] const std::vector<Posting>& postings(std::string_view term) const
    {
        static const std::vector<Posting> none;
        auto it = term_index_.find(std::string(term));
        return it == term_index_.end() ? none : postings_[it->second];
    }

    [[nodiscard]] std::uint32_t tf(std::string_view term, DocId d) const
    {
        const auto& list = postings(term);
        auto it = std::lower_bound(list.begin(), list.end(), d,
                                   [](const Posting& p, DocId doc) { return p.doc < doc; });
        return it != list.end() && it->doc == d ? it->tf : 0;
    }

    [[nodiscard]] std::uint64_t collection_freq(std::string_view term) const
    {
        auto it = term_index_.find(std::string(term));
        return it == term_index_.end() ? 0 : cf_[it->second];
    }

    [[nodiscard]] std::size_t doc_freq(std::string_view term) const { return postings(term).size(); }

    /// p(t|d) = tf(t,d) / |d|; zero for empty documents.
    [[nodiscard]] double term_prob_doc(std::string_view term, DocId d) const
    {
        const auto len = doc_len(d);
        return len == 0 ? 0.0 : static_cast<double>(tf(term, d)) / static_cast<double>(len);
    }

    /// p(t) = cf(t) / |C|.
    [[nodiscard]] double collection_prob(std::string_view term) const
    {
        if (collection_len_ == 0) {
            throw InvalidArgument("collection_prob on an empty collection");
        }
        return static_cast<double>(collection_freq(term)) / static_cast<double>(collection_len_);
    }

    /// Lawyers with at least one indexed answer, ascending id.
    [[nodiscard]] const std::vector<std::string>& candidates() const noexcept { return candidates_; }

    [[nodiscard]] const std::vector<DocId>& author_docs(std::string_view lawyer_id) const
    {
        static const std::vector<DocId> none;
        auto it = author_docs_.find(std::string(lawyer_id));
        return it == author_docs_.end() ? none : it->second;
    }

    /// Empty optional when the lawyer is unknown.
    [[nodiscard]] std::optional<std::string> lawyer_city(std::string_view lawyer_id) const
    {
        auto it = lawyer_city_.find(std::string(lawyer_id));
        if (it == lawyer_city_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    [[nodiscard]] bool knows_city(std::string_view city) const
    {
        return std::any_of(lawyer_city_.begin(), lawyer_city_.end(),
                           [&](const auto& kv) { return kv.second == city; });
    }

    // -- serialization ------------------------------------------------------
    //
    // Layout (little endian): magic "EXFIDX\0\0", u32 version, analyzer
    // options, documents, lawyer cities, terms with postings. Strings are
    // u32 length + bytes.

    void save(std::ostream& out) const
    {
        out.write(magic.data(), magic.size());
        put_u32(out, format_version);
        put_u32(out, analyzer_.options().lowercase ? 1 : 0);
        std::set<std::string> stop(analyzer_.options().stopwords.begin(), analyzer_.options().stopwords.end());
        put_u32(out, static_cast<std::uint32_t>(stop.size()));
        for (const auto& s : stop) {
            put_str(out, s);
        }
        put_u32(out, static_cast<std::uint32_t>(doc_name_.size()));
        for (std::size_t d = 0; d < doc_name_.size(); ++d) {
            put_str(out, doc_name_[d]);
            put_str(out, doc_author_[d]);
            put_str(out, doc_city_[d]);
            put_u32(out, doc_len_[d]);
        }
        put_u32(out, static_cast<std::uint32_t>(lawyer_city_.size()));
        for (const auto& [lawyer, city] : lawyer_city_) {
            put_str(out, lawyer);
            put_str(out, city);
        }
        put_u32(out, static_cast<std::uint32_t>(terms_.size()));
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            put_str(out, terms_[t]);
            put_u32(out, static_cast<std::uint32_t>(postings_[t].size()));
            for (const auto& p : postings_[t]) {
                put_u32(out, p.doc);
                put_u32(out, p.tf);
            }
        }
        if (!out) {
            throw Error("failed writing index");
        }
    }

    static IndexedCollection load(std::istream& in)
    {
        std::array<char, 8> m{};
        in.read(m.data(), m.size());
        if (!in || m != magic) {
            throw Error("not an index file (bad magic)");
        }
        if (auto v = get_u32(in); v != format_version) {
            throw Error("unsupported index version " + std::to_string(v));
        }
        IndexedCollection ix;
        AnalyzerOptions opts;
        opts.lowercase = get_u32(in) != 0;
        for (auto n = get_u32(in); n > 0; --n) {
            opts.stopwords.insert(get_str(in));
        }
        ix.analyzer_ = Analyzer(std::move(opts));
        for (auto n = get_u32(in); n > 0; --n) {
            ix.doc_name_.push_back(get_str(in));
            ix.doc_author_.push_back(get_str(in));
            ix.doc_city_.push_back(get_str(in));
            ix.doc_len_.push_back(get_u32(in));
        }
        for (auto n = get_u32(in); n > 0; --n) {
            auto lawyer = get_str(in);
            ix.lawyer_city_[lawyer] = get_str(in);
        }
        for (auto n = get_u32(in); n > 0; --n) {
            ix.terms_.push_back(get_str(in));
            std::vector<Posting> list(get_u32(in));
            for (auto& p : list) {
                p.doc = get_u32(in);
                p.tf = get_u32(in);
                if (p.doc >= ix.doc_name_.size()) {
                    throw Error("corrupt index: posting references unknown document");
                }
            }
            ix.postings_.push_back(std::move(list));
        }
        ix.finalize();
        return ix;
    }

    /// Human-readable term and document counts.
    void write_stats(std::ostream& out, std::size_t top_terms = 20) const
    {
        out << "documents\t" << doc_count() << '\n';
        out << "candidates\t" << candidates_.size() << '\n';
        out << "terms\t" << terms_.size() << '\n';
        out << "collection_len\t" << collection_len_ << '\n';
        out << "mean_doc_len\t" << mean_doc_len() << '\n';
        out << "empty_documents\t" << std::count(doc_len_.begin(), doc_len_.end(), 0U) << '\n';
        std::vector<std::size_t> order(terms_.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cf_[a] > cf_[b]; });
        order.resize(std::min(order.size(), top_terms));
        for (auto t : order) {
            out << "term\t" << terms_[t] << '\t' << cf_[t] << '\t' << postings_[t].size() << '\n';
        }
    }

  private:
    static constexpr std::array<char, 8> magic{'E', 'X', 'F', 'I', 'D', 'X', '\0', '\0'};

    void finalize()
    {
        collection_len_ = 0;
        for (auto len : doc_len_) {
            collection_len_ += len;
        }
        doc_by_name_.clear();
        author_docs_.clear();
        for (std::size_t d = 0; d < doc_name_.size(); ++d) {
            doc_by_name_[doc_name_[d]] = static_cast<DocId>(d);
            author_docs_[doc_author_[d]].push_back(static_cast<DocId>(d));
        }
        candidates_.clear();
        for (const auto& [lawyer, docs] : author_docs_) {
            candidates_.push_back(lawyer);
        }
        term_index_.clear();
        cf_.assign(terms_.size(), 0);
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            term_index_[terms_[t]] = t;
            for (const auto& p : postings_[t]) {
                cf_[t] += p.tf;
            }
        }
    }

    static void put_u32(std::ostream& out, std::uint32_t v)
    {
        std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
        out.write(b.data(), b.size());
    }

    static void put_str(std::ostream& out, const std::string& s)
    {
        put_u32(out, static_cast<std::uint32_t>(s.size()));
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

    static std::uint32_t get_u32(std::istream& in)
    {
        std::array<unsigned char, 4> b{};
        in.read(reinterpret_cast<char*>(b.data()), b.size());
        if (!in) {
            throw Error("truncated index file");
        }
        return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    static std::string get_str(std::istream& in)
    {
        std::string s(get_u32(in), '\0');
        in.read(s.data(), static_cast<std::streamsize>(s.size()));
        if (!in) {
            throw Error("truncated index file");
        }
        return s;
    }

    Analyzer analyzer_;
    std::vector<std::string> doc_name_;
    std::vector<std::string> doc_author_;
    std::vector<std::string> doc_city_;
    std::vector<std::uint32_t> doc_len_;
    std::uint64_t collection_len_ = 0;
    std::map<std::string, std::string> lawyer_city_;
    std::vector<std::string> terms_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::uint64_t> cf_;
    std::unordered_map<std::string, std::size_t> term_index_;
    std::unordered_map<std::string, DocId> doc_by_name_;
    std::map<std::string, std::vector<DocId>> author_docs_;
    std::vector<std::string> candidates_;
};

}  // namespace expertfind
