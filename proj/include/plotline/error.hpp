#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plotline {

// Base of every error the library throws. Each subsystem derives its own
// kinds so callers can catch as narrowly as they like.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// corpus
class InvalidPattern : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class OrderError : public Error {
 public:
  using Error::Error;
};

// graph
class MalformedTree : public Error {
 public:
  MalformedTree(std::size_t sentence, const std::string& what)
      : Error("sentence " + std::to_string(sentence) + ": " + what), sentence_(sentence) {}
  std::size_t sentence() const noexcept { return sentence_; }

 private:
  std::size_t sentence_;
};

class MissingEntry : public Error {
 public:
  using Error::Error;
};

class ProviderFailure : public Error {
 public:
  using Error::Error;
};

// gat
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(int epoch, const std::string& what)
      : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

// boundary
class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class EmptyGrid : public Error {
 public:
  using Error::Error;
};

// summarize
class MissingSegment : public Error {
 public:
  using Error::Error;
};

// eval
class MismatchedItems : public Error {
 public:
  using Error::Error;
};

class IoFailure : public Error {
 public:
  using Error::Error;
};

// cli
class ConfigError : public Error {
 public:
  using Error::Error;
};

class MissingArtifact : public Error {
 public:
  MissingArtifact(const std::string& file, const std::string& producer)
      : Error("missing artifact " + file + " (produced by stage '" + producer + "')"),
        file_(file),
        producer_(producer) {}
  const std::string& file() const noexcept { return file_; }
  const std::string& producer() const noexcept { return producer_; }

 private:
  std::string file_;
  std::string producer_;
};

}  // namespace plotline
