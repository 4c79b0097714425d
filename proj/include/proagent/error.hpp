#pragma once

#include <stdexcept>
#include <string>

namespace proagent {

// Base for every error the library throws. `code()` is a stable identifier
// used in run reports and CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define PROAGENT_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

PROAGENT_DEFINE_ERROR(InvalidScore);
PROAGENT_DEFINE_ERROR(InvalidThreshold);
PROAGENT_DEFINE_ERROR(InvalidIdentifier);
PROAGENT_DEFINE_ERROR(InvariantViolation);
PROAGENT_DEFINE_ERROR(AllPartsMissing);
PROAGENT_DEFINE_ERROR(UnknownTool);
PROAGENT_DEFINE_ERROR(InvalidArguments);
PROAGENT_DEFINE_ERROR(SimulatedFailure);
PROAGENT_DEFINE_ERROR(DecodeError);
PROAGENT_DEFINE_ERROR(UnresolvedReference);
PROAGENT_DEFINE_ERROR(FieldMissing);
PROAGENT_DEFINE_ERROR(BackendUnavailable);
PROAGENT_DEFINE_ERROR(TranscriptMiss);
PROAGENT_DEFINE_ERROR(CredentialMissing);
PROAGENT_DEFINE_ERROR(ConfigError);
PROAGENT_DEFINE_ERROR(ClientUnavailable);
PROAGENT_DEFINE_ERROR(UnsupportedMedia);
PROAGENT_DEFINE_ERROR(UnknownScenario);
PROAGENT_DEFINE_ERROR(IdMismatch);
PROAGENT_DEFINE_ERROR(IoError);
PROAGENT_DEFINE_ERROR(ValidationFailed);

#undef PROAGENT_DEFINE_ERROR

// Raised for `$RESULT(` arguments that do not match the reference grammar.
// `call_index` is set when the error surfaced while parsing a whole chain.
class MalformedReference : public Error {
 public:
  explicit MalformedReference(const std::string& message, int call_index = -1)
      : Error("MalformedReference", message), call_index_(call_index) {}

  int call_index() const noexcept { return call_index_; }

 private:
  int call_index_;
};

}  // namespace proagent
