#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace maskfill {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Corpus I/O or validation failure. `line()` is 1-based when known.
class CorpusError : public Error {
 public:
  explicit CorpusError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : Error(line ? what + " (line " + std::to_string(*line) + ")" : what), line_(line) {}

  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

class MaskingError : public Error {
 public:
  MaskingError(const std::string& what, std::size_t sentence_index)
      : Error("sentence " + std::to_string(sentence_index) + ": " + what),
        sentence_index_(sentence_index) {}

  std::size_t sentence_index() const noexcept { return sentence_index_; }

 private:
  std::size_t sentence_index_;
};

class LmError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace maskfill
