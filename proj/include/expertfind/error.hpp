#pragma once

#include <stdexcept>
#include <string>

namespace expertfind {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file, dangling reference or duplicate id during ingestion.
class IngestError : public Error {
  public:
    using Error::Error;
};

/// A precondition of an operation was violated by its arguments.
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// Failure while talking to a pair scorer.
class ScorerError : public Error {
  public:
    ScorerError(std::string scorer_id, std::string query, std::string text, const std::string& what)
        : Error("scorer '" + scorer_id + "': " + what), scorer_id_(std::move(scorer_id)),
          query_(std::move(query)), text_(std::move(text))
    {}

    [[nodiscard]] const std::string& scorer_id() const noexcept { return scorer_id_; }
    [[nodiscard]] const std::string& query() const noexcept { return query_; }
    [[nodiscard]] const std::string& text() const noexcept { return text_; }

  private:
    std::string scorer_id_;
    std::string query_;
    std::string text_;
};

}  // namespace expertfind
