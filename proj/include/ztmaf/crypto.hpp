#pragma once

#include "ztmaf/domain.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ztmaf::crypto {

using Bytes      = std::vector<std::uint8_t>;
using ByteView   = std::span<const std::uint8_t>;
using Digest     = std::array<std::uint8_t, 32>;
using PublicKey  = std::array<std::uint8_t, 32>;
using Signature  = std::array<std::uint8_t, 64>;

constexpr double kCoordinateLimit = 1048576.0;  // 2^20 m

ByteView as_bytes(std::string_view s);
std::string to_hex(ByteView bytes);
Bytes       from_hex(std::string_view hex);

/// Ed25519 key pair generated deterministically from a 32-byte seed. The seed
/// never leaves this type except through sign().
class KeyPair
{
public:
  static KeyPair from_seed(const std::array<std::uint8_t, 32> &seed);

  const PublicKey &public_key() const { return public_; }

private:
  friend Signature sign(ByteView message, const KeyPair &key);

  KeyPair() = default;

  std::array<std::uint8_t, 64> secret_{};  // libsodium layout: seed || public
  PublicKey                    public_{};
};

struct SharedSecret
{
  std::array<std::uint8_t, 32> bytes{};
  bool operator==(const SharedSecret &) const = default;
};

struct Nonce
{
  std::array<std::uint8_t, 16> bytes{};
  bool operator==(const Nonce &) const = default;
};

struct SessionKey
{
  std::array<std::uint8_t, 32> bytes{};
  double                       established_s{0.0};
  double                       lifetime_s{0.0};

  double expires_at() const { return established_s + lifetime_s; }
  bool   expired(double now_s) const { return now_s >= expires_at(); }
};

/// Preimage of the request hash: 1-byte label length, label bytes, then five
/// big-endian u32 words (speed mm/s, x and y in mm offset by 2^20 m, behavior
/// and trust in millionths).
Bytes canonical_encode(std::string_view label, const ContextVector &ctx, double trust);
Bytes canonical_encode(const NodeId &id, const ContextVector &ctx, double trust);

Digest sha256(ByteView data);
Digest hash_request(ByteView preimage);
Digest hmac_sha256(ByteView key, ByteView message);

Signature sign(ByteView message, const KeyPair &key);
/// Any malformed input (wrong signature length, bad encoding) yields false.
bool verify(ByteView signature, ByteView message, const PublicKey &public_key);

SessionKey derive_session_key(const SharedSecret &shared, const Nonce &nonce,
                              double established_s = 0.0, double lifetime_s = 0.0);

/// K_shared for one (vehicle, fog) pair: HMAC(master, vehicle_label || fog_label).
SharedSecret provision_shared_secret(ByteView master_secret, std::string_view vehicle_label,
                                     std::string_view fog_label);

/// Per-entity nonce generator: HMAC(stream key, counter) truncated to 16 bytes,
/// keyed from (master seed, purpose, entity index). Tracks its own output and throws
/// InvariantViolation on a repeat.
class NonceStream
{
public:
  NonceStream(std::uint64_t master_seed, std::uint32_t entity_index,
              std::string_view purpose = "nonce-stream");

  Nonce       next();
  std::size_t issued() const { return counter_; }

private:
  Digest                          key_{};
  std::uint64_t                   counter_{0};
  std::unordered_set<std::string> seen_;
};

}  // namespace ztmaf::crypto
