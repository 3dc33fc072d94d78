#pragma once

#include <stdexcept>
#include <string>

namespace legalarg {

// Base of every error thrown by the library. Callers that only need to
// distinguish "our" failures from std:: ones catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CatalogFormatError : public Error {
 public:
  CatalogFormatError(std::size_t line, const std::string& what)
      : Error("catalog line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownFactorError : public Error {
 public:
  explicit UnknownFactorError(int id)
      : Error("unknown factor F" + std::to_string(id)), id_(id) {}
  int id() const noexcept { return id_; }

 private:
  int id_;
};

class TokenParseError : public Error {
 public:
  using Error::Error;
};

class FactorMismatchError : public Error {
 public:
  using Error::Error;
};

class InfeasibleParametersError : public Error {
 public:
  using Error::Error;
};

class UnclassifiableTripleError : public Error {
 public:
  using Error::Error;
};

class InvalidTripleError : public Error {
 public:
  using Error::Error;
};

class DatasetFormatError : public Error {
 public:
  DatasetFormatError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

// Model output that does not contain a usable object at all.
class MalformedOutputError : public Error {
 public:
  using Error::Error;
};

class MissingKeyError : public MalformedOutputError {
 public:
  MissingKeyError(std::string key)
      : MalformedOutputError("missing key \"" + key + "\""), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class AmbiguousAttributionError : public Error {
 public:
  AmbiguousAttributionError(std::size_t sentences)
      : Error(std::to_string(sentences) +
              " sentence(s) name factors without naming a case"),
        sentences_(sentences) {}
  std::size_t sentences() const noexcept { return sentences_; }

 private:
  std::size_t sentences_;
};

class MalformedReportError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class AuthenticationError : public TransportError {
 public:
  using TransportError::TransportError;
};

class OverLengthError : public TransportError {
 public:
  using TransportError::TransportError;
};

// An agent kept violating its output protocol after the allowed reprompt.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class EmptyCellError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MalformedTranscriptError : public Error {
 public:
  MalformedTranscriptError(std::string file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line),
        detail_(what) {}
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string detail_;
};

// Factor extraction or scoring could not be completed.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace legalarg
