#pragma once

#include <stdexcept>
#include <string>

namespace garboost {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- corpus / file format errors -------------------------------------------

class IoError : public Error {
 public:
  using Error::Error;
};

class MalformedRecord : public Error {
 public:
  MalformedRecord(const std::string& path, size_t line, const std::string& detail)
      : Error(path + ":" + std::to_string(line) + ": " + detail),
        line_number(line) {}
  size_t line_number;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id)
      : Error("duplicate id: " + id), id(id) {}
  std::string id;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class DuplicateJudgment : public Error {
 public:
  using Error::Error;
};

class InvalidGrade : public Error {
 public:
  using Error::Error;
};

class BundleValidationError : public Error {
 public:
  using Error::Error;
};

// --- numeric / model errors ------------------------------------------------

class DimMismatch : public Error {
 public:
  using Error::Error;
};

class WeightError : public Error {
 public:
  using Error::Error;
};

class CandidateNotInPool : public Error {
 public:
  using Error::Error;
};

class EmptyPool : public Error {
 public:
  using Error::Error;
};

class NotEnoughCandidates : public Error {
 public:
  using Error::Error;
};

class NoExtractableQuery : public Error {
 public:
  using Error::Error;
};

class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

// --- backend errors ---------------------------------------------------------

class TransportError : public Error {
 public:
  using Error::Error;
};

class GenerationEmpty : public Error {
 public:
  using Error::Error;
};

class JudgeUnparseable : public Error {
 public:
  JudgeUnparseable(const std::string& raw)
      : Error("unparseable judge verdict: \"" + raw + "\""), raw_text(raw) {}
  std::string raw_text;
};

class RankParseError : public Error {
 public:
  RankParseError(const std::string& msg, std::string raw)
      : Error(msg), raw_text(std::move(raw)) {}
  std::string raw_text;
};

class NoNetwork : public Error {
 public:
  using Error::Error;
};

// --- pipeline errors ---------------------------------------------------------

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ConfigHashMismatch : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class EmptyTrainingSet : public Error {
 public:
  using Error::Error;
};

}  // namespace garboost
