#pragma once

#include <chrono>
#include <future>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "error.hpp"
#include "rerank.hpp"

namespace expertfind {

struct RemoteScorerOptions {
    /// Base URL, e.g. "http://localhost:8080". A trailing "/score" is accepted.
    std::string endpoint;
    std::chrono::milliseconds timeout{30000};
    std::size_t batch_size = 32;
    std::size_t max_in_flight = 1;
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{100};
};

/// Client for the scoring service: POST /score with
/// `{"model": ..., "pairs": [{"query": ..., "text": ...}]}`, answered by
/// `{"scores": [...]}` in request order. Connection failures and 5xx replies
/// are retried with exponential backoff; 4xx replies and malformed responses
/// fail immediately.
class RemoteScorer final : public PairScorer {
  public:
    explicit RemoteScorer(RemoteScorerOptions options) : options_(std::move(options))
    {
        if (options_.batch_size == 0) {
            throw InvalidArgument("remote scorer batch_size must be >= 1");
        }
        if (options_.max_in_flight == 0) {
            options_.max_in_flight = 1;
        }
        base_ = options_.endpoint;
        auto trim_slashes = [this] {
            while (!base_.empty() && base_.back() == '/') {
                base_.pop_back();
            }
        };
        trim_slashes();
        constexpr std::string_view suffix = "/score";
        if (base_.size() >= suffix.size() && base_.compare(base_.size() - suffix.size(), suffix.size(), suffix) == 0) {
            base_.resize(base_.size() - suffix.size());
        }
        trim_slashes();
    }

    [[nodiscard]] std::string scorer_id() const override { return "remote:" + options_.endpoint; }

    [[nodiscard]] std::size_t requests_sent() const noexcept { return requests_sent_; }

    std::vector<double> score_batch(std::string_view model, std::span<const TextPair> pairs) override
    {
        std::vector<double> out(pairs.size());
        if (pairs.empty()) {
            return out;
        }
        std::vector<std::span<const TextPair>> batches;
        for (std::size_t i = 0; i < pairs.size(); i += options_.batch_size) {
            batches.push_back(pairs.subspan(i, std::min(options_.batch_size, pairs.size() - i)));
        }
        for (std::size_t first = 0; first < batches.size(); first += options_.max_in_flight) {
            const std::size_t last = std::min(batches.size(), first + options_.max_in_flight);
            std::vector<std::future<std::vector<double>>> inflight;
            for (std::size_t b = first; b < last; ++b) {
                inflight.push_back(std::async(std::launch::async, [this, model, batch = batches[b]] {
                    return send(model, batch);
                }));
            }
            for (std::size_t b = first; b < last; ++b) {
                auto scores = inflight[b - first].get();
                std::copy(scores.begin(), scores.end(),
                          out.begin() + static_cast<std::ptrdiff_t>(b * options_.batch_size));
            }
            requests_sent_ += last - first;
        }
        return out;
    }

  private:
    std::vector<double> send(std::string_view model, std::span<const TextPair> batch) const
    {
        nlohmann::json body{{"model", std::string(model)}, {"pairs", nlohmann::json::array()}};
        for (const auto& p : batch) {
            body["pairs"].push_back({{"query", p.query}, {"text", p.text}});
        }
        const auto payload = body.dump();

        auto fail = [&](const std::string& why) {
            return ScorerError(scorer_id(), batch.front().query, batch.front().text, options_.endpoint + ": " + why);
        };

        auto backoff = options_.initial_backoff;
        std::string last_error;
        for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
            httplib::Client client(base_);
            const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
            const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
            client.set_connection_timeout(secs.count(), usecs.count());
            client.set_read_timeout(secs.count(), usecs.count());
            client.set_write_timeout(secs.count(), usecs.count());
            auto res = client.Post("/score", payload, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200) {
                throw fail("HTTP " + std::to_string(res->status) + ": " + res->body);
            }
            nlohmann::json reply;
            try {
                reply = nlohmann::json::parse(res->body);
            } catch (const std::exception& e) {
                throw fail(std::string("protocol error: ") + e.what());
            }
            if (!reply.is_object() || !reply.contains("scores") || !reply["scores"].is_array()) {
                throw fail("protocol error: response has no 'scores' array");
            }
            const auto& scores = reply["scores"];
            if (scores.size() != batch.size()) {
                throw fail("protocol error: expected " + std::to_string(batch.size()) + " scores, got "
                           + std::to_string(scores.size()));
            }
            std::vector<double> out;
            out.reserve(scores.size());
            for (const auto& s : scores) {
                if (!s.is_number()) {
                    throw fail("protocol error: non-numeric score");
                }
                out.push_back(s.get<double>());
            }
            return out;
        }
        throw fail("giving up after " + std::to_string(options_.max_retries) + " retries: " + last_error);
    }

    RemoteScorerOptions options_;
    std::string base_;
    std::size_t requests_sent_ = 0;
};

inline RemoteScorer remote_scorer(std::string endpoint, std::chrono::milliseconds timeout, std::size_t batch_size)
{
    RemoteScorerOptions options;
    options.endpoint = std::move(endpoint);
    options.timeout = timeout;
    options.batch_size = batch_size;
    return RemoteScorer(std::move(options));
}

}  // namespace expertfind
