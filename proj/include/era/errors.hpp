#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace era {

// Root of every error the library throws. Callers that only care about
// "something in the protocol stack failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ERA_DECLARE_ERROR(Name)          \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

ERA_DECLARE_ERROR(DomainError);          // value outside the operation's domain
ERA_DECLARE_ERROR(RandomnessError);      // Paillier randomness not a unit mod n
ERA_DECLARE_ERROR(DecryptionError);      // ciphertext not a unit mod n^2
ERA_DECLARE_ERROR(ConsistencyError);     // decryption with the wrong randomness
ERA_DECLARE_ERROR(KeyError);             // key mismatch or non-invertible key
ERA_DECLARE_ERROR(GenerationError);      // prime / parameter generation gave up
ERA_DECLARE_ERROR(EncodingError);        // OT message outside [1, p-1]
ERA_DECLARE_ERROR(ProtocolError);        // a party deviated or a message is unusable
ERA_DECLARE_ERROR(ConfigError);          // bad world / bid-space configuration
ERA_DECLARE_ERROR(CapacityError);        // mapped range too small for the bid space
ERA_DECLARE_ERROR(ParameterError);       // range-proof parameters out of bounds
ERA_DECLARE_ERROR(UnprovableError);      // no honest range proof exists
ERA_DECLARE_ERROR(AuthorizationError);   // author may not post to the board
ERA_DECLARE_ERROR(SigningError);         // signing key does not match registration
ERA_DECLARE_ERROR(LookupError);          // unknown sequence number / record
ERA_DECLARE_ERROR(HarnessError);         // misuse of the fault-injection harness

#undef ERA_DECLARE_ERROR

// Raised while loading a persisted log; carries the 1-based line number of the
// first offending line.
class LoadError : public Error {
 public:
  LoadError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace era
