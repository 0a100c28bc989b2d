#include "dpmeter/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <utility>

#include <json.hpp>

#include "dpmeter/error.hpp"
#include "dpmeter/util.hpp"

namespace dpmeter::ledger {

namespace {

using TxKey = std::tuple<std::string, int, std::uint64_t>;

TxKey key_of(const Transaction& tx) {
  return {tx.meter_id, tx.timestamp_min, tx.nonce};
}

void validate_transaction(const Transaction& tx) {
  if (tx.meter_id.empty() || tx.meter_id.size() > 0xFFFF)
    fail(Errc::kValidation, "meter_id must be 1..65535 bytes");
  if (tx.timestamp_min < 0 || tx.timestamp_min > 1430 || tx.timestamp_min % 10 != 0)
    fail(Errc::kValidation,
         "timestamp must be a multiple of 10 in [0, 1430], got " +
             std::to_string(tx.timestamp_min));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  if (s.size() > 0xFFFF) fail(Errc::kValidation, "identifier exceeds 65535 bytes");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

bool canonical_tx_less(const Transaction& a, const Transaction& b) {
  return key_of(a) < key_of(b);
}

const Block& tip_of(const Chain& chain) {
  if (chain.blocks.empty()) fail(Errc::kValidation, "chain has no genesis block");
  return chain.blocks.back();
}

// One honest node's acceptance predicate. All checks are pure reads of the
// candidate and the current chain.
bool node_accepts(const Block& block, const Chain& chain) {
  if (chain.blocks.empty()) return false;
  const Block& tip = chain.blocks.back();
  if (block.height != tip.height + 1) return false;
  if (block.prev_hash != tip.block_hash) return false;
  if (block.tx_list.empty()) return false;
  try {
    if (compute_block_hash(block) != block.block_hash) return false;
    for (const Transaction& tx : block.tx_list) validate_transaction(tx);
  } catch (const Error&) {
    return false;
  }
  for (std::size_t i = 1; i < block.tx_list.size(); ++i) {
    if (!canonical_tx_less(block.tx_list[i - 1], block.tx_list[i])) return false;
  }
  std::set<TxKey> prior;
  for (const Block& b : chain.blocks)
    for (const Transaction& t : b.tx_list) prior.insert(key_of(t));
  for (const Transaction& tx : block.tx_list)
    if (prior.count(key_of(tx)) != 0) return false;
  return true;
}

}  // namespace

void MiningPool::submit_transaction(const Transaction& tx) {
  validate_transaction(tx);
  if (!seen_.insert(key_of(tx)).second)
    fail(Errc::kDuplicateTransaction,
         "duplicate transaction (" + tx.meter_id + ", " +
             std::to_string(tx.timestamp_min) + ", " + std::to_string(tx.nonce) + ")");
  txs_.push_back(tx);
}

void MiningPool::clear() {
  txs_.clear();
  seen_.clear();
}

std::int64_t to_milliwatt_hours(double wh) {
  if (!std::isfinite(wh)) fail(Errc::kInvalidArgument, "reading must be finite");
  double scaled = wh * 1000.0;
  if (std::fabs(scaled) >= 9.0e18)
    fail(Errc::kInvalidArgument, "reading out of fixed-point range");
  return std::llrint(scaled);  // default FP mode rounds half to even
}

std::vector<std::uint8_t> canonical_block_bytes(const Block& block) {
  std::vector<std::uint8_t> out;
  out.reserve(64 + block.tx_list.size() * 32);
  put_u64(out, block.height);
  out.insert(out.end(), block.prev_hash.begin(), block.prev_hash.end());
  if (block.tx_list.size() > 0xFFFFFFFFu)
    fail(Errc::kValidation, "too many transactions in one block");
  put_u32(out, static_cast<std::uint32_t>(block.tx_list.size()));
  for (const Transaction& tx : block.tx_list) {
    validate_transaction(tx);
    put_string(out, tx.meter_id);
    put_u16(out, static_cast<std::uint16_t>(tx.timestamp_min));
    put_u64(out, static_cast<std::uint64_t>(tx.protected_mwh));
    put_u64(out, tx.nonce);
  }
  put_string(out, block.miner_id);
  return out;
}

Hash256 compute_block_hash(const Block& block) {
  std::vector<std::uint8_t> bytes = canonical_block_bytes(block);
  return sha256(bytes);
}

Block make_genesis() {
  Block genesis;
  genesis.height = 0;
  genesis.prev_hash.fill(0);
  genesis.miner_id = "genesis";
  genesis.block_hash = compute_block_hash(genesis);
  return genesis;
}

std::string select_miner(const StakeTable& stakes, Rng& rng) {
  std::uint64_t total = 0;
  for (const auto& [node_id, stake] : stakes.entries) total += stake;
  if (total == 0) fail(Errc::kNoStake, "no stake deposited; cannot elect a miner");
  std::uint64_t r = rng.below(total);
  std::uint64_t cumulative = 0;
  for (const auto& [node_id, stake] : stakes.entries) {
    cumulative += stake;
    if (r < cumulative) return node_id;
  }
  fail(Errc::kNoStake, "election walk exhausted the stake table");
}

Block mine_block(const MiningPool& pool, const std::string& miner_id, const Chain& chain) {
  if (pool.empty()) fail(Errc::kNothingToMine, "mining pool is empty");
  const Block& tip = tip_of(chain);
  Block block;
  block.height = tip.height + 1;
  block.prev_hash = tip.block_hash;
  block.tx_list = pool.transactions();
  std::sort(block.tx_list.begin(), block.tx_list.end(), canonical_tx_less);
  block.miner_id = miner_id;
  block.block_hash = compute_block_hash(block);
  return block;
}

std::vector<Vote> verify_block(const Block& block, const std::vector<std::string>& node_ids,
                               const Chain& chain) {
  bool verdict = node_accepts(block, chain);
  std::vector<Vote> votes;
  votes.reserve(node_ids.size());
  for (const std::string& node_id : node_ids) votes.push_back({node_id, verdict});
  return votes;
}

bool votes_accept(const std::vector<Vote>& votes) {
  std::size_t approvals = 0;
  for (const Vote& v : votes) approvals += v.approve ? 1 : 0;
  return 2 * approvals > votes.size();
}

void append_block(Chain& chain, const Block& block) {
  const Block& tip = tip_of(chain);
  if (!votes_accept(block.votes))
    fail(Errc::kNotVerified, "block lacks majority approval");
  if (block.height != tip.height + 1)
    fail(Errc::kNotVerified, "height conflict: expected " + std::to_string(tip.height + 1) +
                                 ", got " + std::to_string(block.height));
  if (block.prev_hash != tip.block_hash)
    fail(Errc::kNotVerified, "stale prev_hash: block does not extend the tip");
  if (compute_block_hash(block) != block.block_hash)
    fail(Errc::kNotVerified, "block hash mismatch");
  chain.blocks.push_back(block);
}

ChainReport validate_chain(const Chain& chain) {
  if (chain.blocks.empty()) return {false, 0, "chain has no blocks"};
  std::set<TxKey> all_keys;
  for (std::size_t i = 0; i < chain.blocks.size(); ++i) {
    const Block& block = chain.blocks[i];
    auto bad = [&](const std::string& reason) -> ChainReport {
      return {false, static_cast<std::uint64_t>(i), reason};
    };
    if (block.height != i) return bad("height must be " + std::to_string(i));
    if (i == 0) {
      Hash256 zero{};
      if (block.prev_hash != zero) return bad("genesis prev_hash must be all zero");
    } else {
      if (block.prev_hash != chain.blocks[i - 1].block_hash)
        return bad("prev_hash does not match the previous block hash");
    }
    try {
      if (compute_block_hash(block) != block.block_hash)
        return bad("stored block hash does not match its content");
      for (const Transaction& tx : block.tx_list) validate_transaction(tx);
    } catch (const Error& e) {
      return bad(e.what());
    }
    for (std::size_t t = 1; t < block.tx_list.size(); ++t) {
      if (!canonical_tx_less(block.tx_list[t - 1], block.tx_list[t]))
        return bad("transactions not in canonical order");
    }
    for (const Transaction& tx : block.tx_list) {
      if (!all_keys.insert(key_of(tx)).second)
        return bad("transaction (" + tx.meter_id + ", " +
                   std::to_string(tx.timestamp_min) + ", " + std::to_string(tx.nonce) +
                   ") appears more than once on the chain");
    }
  }
  return {true, 0, ""};
}

void write_chain_jsonl(const std::filesystem::path& path, const Chain& chain) {
  std::string out;
  for (const Block& block : chain.blocks) {
    nlohmann::json j;
    j["height"] = block.height;
    j["prev_hash"] = to_hex(block.prev_hash);
    j["miner_id"] = block.miner_id;
    nlohmann::json txs = nlohmann::json::array();
    for (const Transaction& tx : block.tx_list) {
      nlohmann::json t;
      t["meter_id"] = tx.meter_id;
      t["timestamp_min"] = tx.timestamp_min;
      t["protected_mwh"] = tx.protected_mwh;
      t["nonce"] = tx.nonce;
      txs.push_back(std::move(t));
    }
    j["tx_list"] = std::move(txs);
    j["block_hash"] = to_hex(block.block_hash);
    out += j.dump();
    out += '\n';
  }
  atomic_write_file(path.string(), out);
}

namespace {

Hash256 hash_from_hex(const nlohmann::json& j, const char* field, std::size_t line_no) {
  if (!j.contains(field) || !j[field].is_string())
    fail(Errc::kParse, "line " + std::to_string(line_no) + ": missing string field '" +
                           field + "'");
  std::vector<std::uint8_t> bytes = from_hex(j[field].get<std::string>());
  if (bytes.size() != 32)
    fail(Errc::kParse, "line " + std::to_string(line_no) + ": field '" + field +
                           "' must be 32 hex-encoded bytes");
  Hash256 h{};
  std::copy(bytes.begin(), bytes.end(), h.begin());
  return h;
}

}  // namespace

Chain read_chain_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kIo, "cannot open chain file: " + path.string());
  Chain chain;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      fail(Errc::kParse, "line " + std::to_string(line_no) + ": invalid JSON block record");
    Block block;
    if (!j.contains("height") || !j["height"].is_number_unsigned())
      fail(Errc::kParse, "line " + std::to_string(line_no) + ": missing unsigned 'height'");
    block.height = j["height"].get<std::uint64_t>();
    block.prev_hash = hash_from_hex(j, "prev_hash", line_no);
    if (!j.contains("miner_id") || !j["miner_id"].is_string())
      fail(Errc::kParse, "line " + std::to_string(line_no) + ": missing string 'miner_id'");
    block.miner_id = j["miner_id"].get<std::string>();
    if (!j.contains("tx_list") || !j["tx_list"].is_array())
      fail(Errc::kParse, "line " + std::to_string(line_no) + ": missing array 'tx_list'");
    for (const nlohmann::json& t : j["tx_list"]) {
      if (!t.is_object() || !t.contains("meter_id") || !t["meter_id"].is_string() ||
          !t.contains("timestamp_min") || !t["timestamp_min"].is_number_integer() ||
          !t.contains("protected_mwh") || !t["protected_mwh"].is_number_integer() ||
          !t.contains("nonce") || !t["nonce"].is_number_unsigned())
        fail(Errc::kParse, "line " + std::to_string(line_no) + ": malformed transaction");
      Transaction tx;
      tx.meter_id = t["meter_id"].get<std::string>();
      tx.timestamp_min = t["timestamp_min"].get<int>();
      tx.protected_mwh = t["protected_mwh"].get<std::int64_t>();
      tx.nonce = t["nonce"].get<std::uint64_t>();
      block.tx_list.push_back(std::move(tx));
    }
    block.block_hash = hash_from_hex(j, "block_hash", line_no);
    chain.blocks.push_back(std::move(block));
  }
  return chain;
}

LedgerSim::LedgerSim(StakeTable stakes) : stakes_(std::move(stakes)) {
  for (const auto& [node_id, stake] : stakes_.entries) node_ids_.push_back(node_id);
  chain_.blocks.push_back(make_genesis());
}

void LedgerSim::submit_reading(const std::string& meter_id, int timestamp_min,
                               double protected_wh) {
  Transaction tx;
  tx.meter_id = meter_id;
  tx.timestamp_min = timestamp_min;
  tx.protected_mwh = to_milliwatt_hours(protected_wh);
  tx.nonce = next_nonce_++;
  pool_.submit_transaction(tx);
}

const Block& LedgerSim::run_round(Rng& rng) {
  std::string miner = select_miner(stakes_, rng);
  Block block = mine_block(pool_, miner, chain_);
  block.votes = verify_block(block, node_ids_, chain_);
  append_block(chain_, block);
  pool_.clear();
  rewards_[miner] += 1;
  return chain_.blocks.back();
}

}  // namespace dpmeter::ledger
