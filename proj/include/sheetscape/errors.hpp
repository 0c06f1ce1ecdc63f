#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sheetscape {

/// Stable machine-readable error codes. The string form (error_code_name) is
/// what travels over the wire in service error messages.
enum class ErrorCode {
  RangeOutOfBounds,
  EncodingError,
  EmptyInput,
  NotAZip,
  MissingSheet,
  MalformedPart,
  EmptyView,
  NoNumericCells,
  ConfigMismatch,
  SeriesTooShort,
  SceneTooLarge,
  StaleRevision,
  UnknownGlyph,
  UnknownSession,
  BadMessage,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Base for every failure raised while turning bytes into a CellGrid.
class IngestError : public Error {
 public:
  using Error::Error;
};

class RangeOutOfBounds : public Error {
 public:
  explicit RangeOutOfBounds(const std::string& message)
      : Error(ErrorCode::RangeOutOfBounds, message) {}
};

class EncodingError : public IngestError {
 public:
  explicit EncodingError(const std::string& message)
      : IngestError(ErrorCode::EncodingError, message) {}
};

class EmptyInput : public IngestError {
 public:
  explicit EmptyInput(const std::string& message)
      : IngestError(ErrorCode::EmptyInput, message) {}
};

class NotAZip : public IngestError {
 public:
  explicit NotAZip(const std::string& message)
      : IngestError(ErrorCode::NotAZip, message) {}
};

class MissingSheet : public IngestError {
 public:
  explicit MissingSheet(std::string sheet)
      : IngestError(ErrorCode::MissingSheet, "missing sheet: " + sheet),
        sheet_(std::move(sheet)) {}
  const std::string& sheet() const noexcept { return sheet_; }

 private:
  std::string sheet_;
};

class MalformedPart : public IngestError {
 public:
  MalformedPart(std::string part, const std::string& detail)
      : IngestError(ErrorCode::MalformedPart,
                    "malformed part " + part + ": " + detail),
        part_(std::move(part)) {}
  const std::string& part() const noexcept { return part_; }

 private:
  std::string part_;
};

class EmptyView : public Error {
 public:
  explicit EmptyView(const std::string& message)
      : Error(ErrorCode::EmptyView, message) {}
};

class NoNumericCells : public Error {
 public:
  explicit NoNumericCells(const std::string& message)
      : Error(ErrorCode::NoNumericCells, message) {}
};

class ConfigMismatch : public Error {
 public:
  explicit ConfigMismatch(const std::string& message)
      : Error(ErrorCode::ConfigMismatch, message) {}
};

class SeriesTooShort : public Error {
 public:
  explicit SeriesTooShort(const std::string& message)
      : Error(ErrorCode::SeriesTooShort, message) {}
};

class SceneTooLarge : public Error {
 public:
  explicit SceneTooLarge(const std::string& message)
      : Error(ErrorCode::SceneTooLarge, message) {}
};

class StaleRevision : public Error {
 public:
  explicit StaleRevision(const std::string& message)
      : Error(ErrorCode::StaleRevision, message) {}
};

class UnknownGlyph : public Error {
 public:
  explicit UnknownGlyph(const std::string& message)
      : Error(ErrorCode::UnknownGlyph, message) {}
};

class UnknownSession : public Error {
 public:
  explicit UnknownSession(const std::string& message)
      : Error(ErrorCode::UnknownSession, message) {}
};

class BadMessage : public Error {
 public:
  explicit BadMessage(const std::string& message)
      : Error(ErrorCode::BadMessage, message) {}
};

}  // namespace sheetscape
