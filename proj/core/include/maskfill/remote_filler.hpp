#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "maskfill/corpus.hpp"
#include "maskfill/error.hpp"
#include "maskfill/mask_filler.hpp"
#include "maskfill/prompts.hpp"

namespace maskfill {

struct ServiceEndpoint {
  /// "http://host:port"
  std::string base_url;
  std::chrono::milliseconds timeout{10000};
  /// Extra attempts after the first one for transport failures and 503s.
  unsigned retries = 2;
  /// Concurrent requests allowed through one client.
  std::size_t max_connections = 4;
};

/// The service could not be reached (or kept answering 503) after every retry.
class FillerUnavailable : public Error {
 public:
  FillerUnavailable(const std::string& what, std::size_t attempts)
      : Error(what), attempts_(attempts) {}
  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t attempts_;
};

/// The service answered with something that violates the wire schema.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, std::string excerpt)
      : Error(what + ": " + excerpt), excerpt_(std::move(excerpt)) {}
  const std::string& excerpt() const noexcept { return excerpt_; }

 private:
  std::string excerpt_;
};

/// The service answered with a non-2xx status and an {"error": ...} body.
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string server_message)
      : Error("service returned HTTP " + std::to_string(status) + ": " + server_message),
        status_(status),
        server_message_(std::move(server_message)) {}
  int status() const noexcept { return status_; }
  const std::string& server_message() const noexcept { return server_message_; }

 private:
  int status_;
  std::string server_message_;
};

using WarningSink = std::function<void(std::string_view)>;

/// Canonical (sorted keys, compact) JSON bodies for the fill-mask protocol.
namespace wire {
std::string fill_request(std::span<const Token> left, std::span<const Token> right, std::size_t k,
                         const std::string& model_version);
std::string finetune_request(const Corpus& corpus);
std::string generate_request(const Prompt& prompt, const std::string& model_version);
}  // namespace wire

/// MaskFiller backed by the HTTP fill-mask service. Each instance is pinned to
/// one model_version; finetune() returns a new instance pinned to the version
/// the service hands back. Instances derived from one another share a
/// connection budget, and fine-tune/generate calls run exclusively of
/// candidate traffic.
class RemoteFiller final : public MaskFiller {
 public:
  RemoteFiller(ServiceEndpoint endpoint, std::string model_version, WarningSink warn = {});

  /// Asks GET /health for the serving model_version.
  static std::shared_ptr<const RemoteFiller> connect(ServiceEndpoint endpoint,
                                                     WarningSink warn = {});

  std::vector<FillCandidate> candidates(std::span<const Token> left, std::span<const Token> right,
                                        std::size_t k) const override;

  bool supports_finetune() const override { return true; }
  FillerPtr finetune(const Corpus& corpus) const override;

  /// Blocking POST /finetune; returns the new model_version, which must
  /// differ from this filler's.
  std::string remote_finetune(const Corpus& corpus) const;
  std::shared_ptr<const RemoteFiller> with_version(std::string model_version) const;

  /// POST /generate; the raw text is meant for parse_generation().
  std::string generate(const Prompt& prompt) const;

  std::string version() const override { return model_version_; }
  const ServiceEndpoint& endpoint() const noexcept;

 private:
  struct Channel;
  RemoteFiller(std::shared_ptr<Channel> channel, std::string model_version);

  std::shared_ptr<Channel> channel_;
  std::string model_version_;
};

}  // namespace maskfill
