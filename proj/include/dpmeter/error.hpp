#pragma once

#include <stdexcept>
#include <string>

namespace dpmeter {

// Error taxonomy. Every failure raised by the library carries one of these
// codes so the CLI can map domain failures to exit code 1 and usage/parse
// problems to exit code 2 without string matching.
enum class Errc {
  kInvalidParameter,       // bad privacy parameters (eps <= 0, odd support, ...)
  kInvalidArgument,        // bad call arguments (empty dataset, non-integer x, ...)
  kUnsupportedMechanism,   // unknown mechanism tag
  kParse,                  // malformed input file (CSV row, JSONL record)
  kIo,                     // file missing / unreadable / unwritable
  kValidation,             // profile or chain fails structural validation
  kDuplicateTransaction,   // resubmitted (meter_id, timestamp, nonce)
  kNothingToMine,          // mine_block on an empty pool
  kNoStake,                // miner election with zero total stake
  kNotVerified,            // append_block without majority approval
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace dpmeter
