#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dpmeter/crypto.hpp"
#include "dpmeter/rng.hpp"

namespace dpmeter::ledger {

// Carries only the protected value, fixed-point milliwatt-hours. Originals
// and error traces never reach the ledger.
struct Transaction {
  std::string meter_id;
  int timestamp_min = 0;
  std::int64_t protected_mwh = 0;
  std::uint64_t nonce = 0;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct Vote {
  std::string node_id;
  bool approve = false;
};

// votes are runtime verification artifacts: they are not part of the hashed
// bytes and are not serialized into chain exports.
struct Block {
  std::uint64_t height = 0;
  Hash256 prev_hash{};
  std::vector<Transaction> tx_list;
  std::string miner_id;
  std::vector<Vote> votes;
  Hash256 block_hash{};
};

struct Chain {
  std::vector<Block> blocks;
};

struct StakeTable {
  std::map<std::string, std::uint64_t> entries;  // node_id -> stake tokens
};

class MiningPool {
 public:
  // Validates the transaction and rejects duplicate (meter_id, timestamp,
  // nonce) triples. Throws duplicate-transaction / validation errors.
  void submit_transaction(const Transaction& tx);

  const std::vector<Transaction>& transactions() const { return txs_; }
  std::size_t size() const { return txs_.size(); }
  bool empty() const { return txs_.empty(); }
  void clear();

 private:
  std::vector<Transaction> txs_;
  std::set<std::tuple<std::string, int, std::uint64_t>> seen_;
};

// Exact fixed-point conversion, rounding half to even. Throws on non-finite
// or out-of-range input.
std::int64_t to_milliwatt_hours(double wh);

// Hashed byte layout (all integers big-endian):
//   u64 height | 32-byte prev_hash | u32 tx_count
//   per tx: u16 meter_id length | meter_id bytes | u16 timestamp_min
//           | i64 protected_mwh | u64 nonce
//   u16 miner_id length | miner_id bytes
std::vector<std::uint8_t> canonical_block_bytes(const Block& block);
Hash256 compute_block_hash(const Block& block);

// Height 0, zero prev_hash, no transactions, miner_id "genesis".
Block make_genesis();

// Stake-proportional election; deterministic in the RNG state. Throws
// no-stake when the table is empty or all-zero.
std::string select_miner(const StakeTable& stakes, Rng& rng);

// Forms a block from all pool transactions in canonical order (meter_id,
// then timestamp, then nonce). The pool is not cleared here; callers clear
// it once the block is accepted.
Block mine_block(const MiningPool& pool, const std::string& miner_id, const Chain& chain);

// Every node independently recomputes the hash and checks tip linkage and
// transaction validity (order, uniqueness, no replay of a transaction
// already on the chain). Returns one vote per node, in node order.
std::vector<Vote> verify_block(const Block& block, const std::vector<std::string>& node_ids,
                               const Chain& chain);

// Strict majority: more than half of the votes approve.
bool votes_accept(const std::vector<Vote>& votes);

// Appends after re-checking approval, linkage, and the block hash. Throws
// not-verified (appending the same block twice is a height conflict).
void append_block(Chain& chain, const Block& block);

struct ChainReport {
  bool ok = true;
  std::uint64_t first_bad_height = 0;
  std::string reason;
};

// Full structural audit; violations are reported, never thrown.
ChainReport validate_chain(const Chain& chain);

// One JSON object per block per line, hashes lowercase hex.
void write_chain_jsonl(const std::filesystem::path& path, const Chain& chain);
Chain read_chain_jsonl(const std::filesystem::path& path);  // throws kIo / kParse

// Single-writer round driver: collect readings, elect, mine, verify, append,
// then clear the pool and credit the miner.
class LedgerSim {
 public:
  explicit LedgerSim(StakeTable stakes);

  void submit_reading(const std::string& meter_id, int timestamp_min, double protected_wh);
  const Block& run_round(Rng& rng);

  const Chain& chain() const { return chain_; }
  const MiningPool& pool() const { return pool_; }
  const StakeTable& stakes() const { return stakes_; }
  const std::map<std::string, std::uint64_t>& rewards() const { return rewards_; }

 private:
  StakeTable stakes_;
  std::vector<std::string> node_ids_;
  Chain chain_;
  MiningPool pool_;
  std::map<std::string, std::uint64_t> rewards_;
  std::uint64_t next_nonce_ = 0;
};

}  // namespace dpmeter::ledger
