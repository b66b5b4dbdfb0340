#include "maskfill/remote_filler.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <semaphore>
#include <shared_mutex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "maskfill/masked_corpus.hpp"
#include "maskfill/unicode.hpp"

namespace maskfill {
namespace {

using nlohmann::json;

constexpr std::size_t kExcerptBytes = 160;
constexpr std::ptrdiff_t kMaxConnections = 1024;

/// Printable excerpt of a payload; bytes outside printable ASCII are escaped.
std::string excerpt(std::string_view payload) {
  std::string out;
  for (std::size_t i = 0; i < payload.size() && i < kExcerptBytes; ++i) {
    const auto c = static_cast<unsigned char>(payload[i]);
    if (c >= 0x20 && c < 0x7f) {
      out.push_back(static_cast<char>(c));
    } else {
      static constexpr char kHex[] = "0123456789abcdef";
      out += "\\x";
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  if (payload.size() > kExcerptBytes) out += "...";
  return out;
}

json parse_body(const std::string& body) {
  if (unicode::find_invalid_utf8(body)) {
    throw ProtocolError("response is not valid UTF-8", excerpt(body));
  }
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed JSON response (") + e.what() + ")", excerpt(body));
  }
}

const json& require(const json& object, const char* key, json::value_t type,
                    const std::string& body) {
  if (!object.is_object() || !object.contains(key)) {
    throw ProtocolError(std::string("response lacks '") + key + "'", excerpt(body));
  }
  const json& value = object.at(key);
  const bool ok = type == json::value_t::number_float ? value.is_number() : value.type() == type;
  if (!ok) throw ProtocolError(std::string("response field '") + key + "' has the wrong type", excerpt(body));
  return value;
}

bool has_whitespace(std::string_view token) {
  return token.find_first_of(" \t\n\r\v\f") != std::string_view::npos;
}

void default_warning(std::string_view message) {
  std::cerr << "maskfill: warning: " << message << '\n';
}

}  // namespace

namespace wire {

std::string fill_request(std::span<const Token> left, std::span<const Token> right, std::size_t k,
                         const std::string& model_version) {
  const json body = {{"left", std::vector<Token>(left.begin(), left.end())},
                     {"right", std::vector<Token>(right.begin(), right.end())},
                     {"k", k},
                     {"model_version", model_version}};
  return body.dump();
}

std::string finetune_request(const Corpus& corpus) {
  std::vector<std::string> sentences;
  sentences.reserve(corpus.size());
  for (const auto& s : corpus) sentences.push_back(MaskedSentence(s.tokens).text());
  return json{{"corpus", sentences}, {"task", "mlm"}}.dump();
}

std::string generate_request(const Prompt& prompt, const std::string& model_version) {
  return json{{"instruction", prompt.instruction},
              {"input", prompt.input},
              {"model_version", model_version}}
      .dump();
}

}  // namespace wire

struct RemoteFiller::Channel {
  Channel(ServiceEndpoint ep, WarningSink sink)
      : endpoint(std::move(ep)),
        warn(sink ? std::move(sink) : WarningSink(default_warning)),
        slots(static_cast<std::ptrdiff_t>(
            std::clamp<std::size_t>(endpoint.max_connections, 1, kMaxConnections))) {}

  enum class Phase { kShared, kExclusive };

  std::string request(const std::string& method, const std::string& path,
                      const std::string& body, Phase phase) {
    std::shared_lock<std::shared_mutex> shared(phase_mutex, std::defer_lock);
    std::unique_lock<std::shared_mutex> exclusive(phase_mutex, std::defer_lock);
    if (phase == Phase::kShared) {
      shared.lock();
    } else {
      exclusive.lock();
    }
    slots.acquire();
    struct Release {
      std::counting_semaphore<kMaxConnections>& s;
      ~Release() { s.release(); }
    } release{slots};

    const std::size_t attempts = std::size_t{endpoint.retries} + 1;
    std::string last_failure;
    for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
      httplib::Client client(endpoint.base_url);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());
      client.set_keep_alive(false);

      auto result = method == "GET" ? client.Get(path)
                                    : client.Post(path, body, "application/json");
      if (!result) {
        last_failure = httplib::to_string(result.error());
        continue;
      }
      const int status = result->status;
      if (status >= 200 && status < 300) return result->body;

      std::string message = result->body;
      try {
        const json err = json::parse(result->body);
        if (err.is_object() && err.contains("error") && err["error"].is_string()) {
          message = err["error"].get<std::string>();
        }
      } catch (const json::exception&) {
        message = excerpt(result->body);
      }
      if (status == 503) {
        last_failure = "HTTP 503: " + message;
        continue;
      }
      throw ServiceError(status, message);
    }
    throw FillerUnavailable(method + " " + path + " failed after " + std::to_string(attempts) +
                                " attempt(s): " + last_failure,
                            attempts);
  }

  ServiceEndpoint endpoint;
  WarningSink warn;
  std::shared_mutex phase_mutex;
  std::counting_semaphore<kMaxConnections> slots;
};

RemoteFiller::RemoteFiller(ServiceEndpoint endpoint, std::string model_version, WarningSink warn)
    : RemoteFiller(std::make_shared<Channel>(std::move(endpoint), std::move(warn)),
                   std::move(model_version)) {}

RemoteFiller::RemoteFiller(std::shared_ptr<Channel> channel, std::string model_version)
    : channel_(std::move(channel)), model_version_(std::move(model_version)) {
  if (channel_->endpoint.timeout.count() <= 0) {
    throw std::invalid_argument("service timeout must be positive");
  }
}

std::shared_ptr<const RemoteFiller> RemoteFiller::connect(ServiceEndpoint endpoint,
                                                          WarningSink warn) {
  auto channel = std::make_shared<Channel>(std::move(endpoint), std::move(warn));
  const std::string body = channel->request("GET", "/health", {}, Channel::Phase::kShared);
  const json health = parse_body(body);
  const auto& status = require(health, "status", json::value_t::string, body);
  if (status.get<std::string>() != "ok") {
    throw FillerUnavailable("service reports status '" + status.get<std::string>() + "'", 1);
  }
  auto version = require(health, "model_version", json::value_t::string, body).get<std::string>();
  return std::shared_ptr<const RemoteFiller>(new RemoteFiller(std::move(channel), std::move(version)));
}

const ServiceEndpoint& RemoteFiller::endpoint() const noexcept { return channel_->endpoint; }

std::vector<FillCandidate> RemoteFiller::candidates(std::span<const Token> left,
                                                    std::span<const Token> right,
                                                    std::size_t k) const {
  if (k == 0) return {};
  const std::string body = channel_->request(
      "POST", "/fill", wire::fill_request(left, right, k, model_version_), Channel::Phase::kShared);
  const json response = parse_body(body);
  const auto& list = require(response, "candidates", json::value_t::array, body);
  if (response.contains("model_version")) {
    const auto& v = response["model_version"];
    if (!v.is_string()) throw ProtocolError("response field 'model_version' is not a string", excerpt(body));
    if (v.get<std::string>() != model_version_) {
      channel_->warn("fill answered by model_version '" + v.get<std::string>() + "', requested '" +
                     model_version_ + "'");
    }
  }

  std::vector<FillCandidate> out;
  out.reserve(list.size());
  for (const auto& item : list) {
    const auto& token = require(item, "token", json::value_t::string, body).get<std::string>();
    const double score = require(item, "score", json::value_t::number_float, body).get<double>();
    if (!std::isfinite(score) || score <= 0.0) {
      throw ProtocolError("candidate score must be finite and positive", excerpt(body));
    }
    if (token.empty() || is_mask(token) || has_whitespace(token)) {
      channel_->warn("dropped invalid candidate token '" + excerpt(token) + "'");
      continue;
    }
    out.push_back({unicode::nfc(token), score});
  }
  if (!is_ranked(out)) {
    channel_->warn("fill candidates arrived unsorted; re-sorting");
    sort_candidates(out);
  }
  if (out.size() > k) {
    channel_->warn("fill returned " + std::to_string(out.size()) + " candidates for k=" +
                   std::to_string(k) + "; truncating");
    out.resize(k);
  }
  return out;
}

std::string RemoteFiller::remote_finetune(const Corpus& corpus) const {
  if (corpus.empty()) throw std::invalid_argument("refusing to fine-tune on an empty corpus");
  const std::string body = channel_->request("POST", "/finetune", wire::finetune_request(corpus),
                                             Channel::Phase::kExclusive);
  const json response = parse_body(body);
  auto version = require(response, "model_version", json::value_t::string, body).get<std::string>();
  if (version.empty() || version == model_version_) {
    throw ProtocolError("fine-tune did not produce a new model_version", excerpt(body));
  }
  return version;
}

std::shared_ptr<const RemoteFiller> RemoteFiller::with_version(std::string model_version) const {
  return std::shared_ptr<const RemoteFiller>(new RemoteFiller(channel_, std::move(model_version)));
}

FillerPtr RemoteFiller::finetune(const Corpus& corpus) const {
  return with_version(remote_finetune(corpus));
}

std::string RemoteFiller::generate(const Prompt& prompt) const {
  const std::string body =
      channel_->request("POST", "/generate", wire::generate_request(prompt, model_version_),
                        Channel::Phase::kExclusive);
  const json response = parse_body(body);
  return require(response, "text", json::value_t::string, body).get<std::string>();
}

}  // namespace maskfill
