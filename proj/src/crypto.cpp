#include "ztmaf/crypto.hpp"

#include "ztmaf/errors.hpp"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ztmaf::crypto {

namespace {

void ensure_sodium()
{
  static const bool ready = [] {
    if (sodium_init() < 0)
    {
      throw std::runtime_error("libsodium initialisation failed");
    }
    return true;
  }();
  (void)ready;
}

void put_u32_be(Bytes &out, std::uint32_t v)
{
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t quantize(double value, double scale, const char *field)
{
  double q = std::round(value * scale);
  if (q < 0.0 || q > 4294967295.0)
  {
    throw EncodingOverflow(std::string(field) + " does not fit the 32-bit grid");
  }
  return static_cast<std::uint32_t>(q);
}

}  // namespace

ByteView as_bytes(std::string_view s)
{
  return {reinterpret_cast<const std::uint8_t *>(s.data()), s.size()};
}

std::string to_hex(ByteView bytes)
{
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string           out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes)
  {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex)
{
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0)
  {
    throw std::invalid_argument("odd-length hex string");
  }
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2)
  {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0)
    {
      throw std::invalid_argument("bad hex digit");
    }
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

KeyPair KeyPair::from_seed(const std::array<std::uint8_t, 32> &seed)
{
  ensure_sodium();
  KeyPair kp;
  crypto_sign_ed25519_seed_keypair(kp.public_.data(), kp.secret_.data(), seed.data());
  return kp;
}

Bytes canonical_encode(std::string_view label, const ContextVector &ctx, double trust)
{
  if (!std::isfinite(ctx.speed_mps) || !std::isfinite(ctx.location.x) ||
      !std::isfinite(ctx.location.y) || !std::isfinite(ctx.behavior) || !std::isfinite(trust))
  {
    throw InvalidContext("non-finite field in request context");
  }
  if (ctx.speed_mps < 0.0 || ctx.behavior < 0.0 || ctx.behavior > 1.0)
  {
    throw InvalidContext("speed or behavior out of range");
  }
  if (trust < 0.0 || trust > 1.0)
  {
    throw InvalidContext("trust must lie in [0,1]");
  }
  if (std::abs(ctx.location.x) > kCoordinateLimit || std::abs(ctx.location.y) > kCoordinateLimit)
  {
    throw EncodingOverflow("coordinate outside +/-2^20 m");
  }
  if (label.size() > 255)
  {
    throw EncodingOverflow("label longer than 255 bytes");
  }

  Bytes out;
  out.reserve(1 + label.size() + 20);
  out.push_back(static_cast<std::uint8_t>(label.size()));
  out.insert(out.end(), label.begin(), label.end());
  put_u32_be(out, quantize(ctx.speed_mps, 1e3, "speed"));
  put_u32_be(out, quantize(ctx.location.x + kCoordinateLimit, 1e3, "x"));
  put_u32_be(out, quantize(ctx.location.y + kCoordinateLimit, 1e3, "y"));
  put_u32_be(out, quantize(ctx.behavior, 1e6, "behavior"));
  put_u32_be(out, quantize(trust, 1e6, "trust"));
  return out;
}

Bytes canonical_encode(const NodeId &id, const ContextVector &ctx, double trust)
{
  return canonical_encode(id.label(), ctx, trust);
}

Digest sha256(ByteView data)
{
  ensure_sodium();
  Digest out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

Digest hash_request(ByteView preimage)
{
  return sha256(preimage);
}

Digest hmac_sha256(ByteView key, ByteView message)
{
  ensure_sodium();
  crypto_auth_hmacsha256_state state;
  crypto_auth_hmacsha256_init(&state, key.data(), key.size());
  crypto_auth_hmacsha256_update(&state, message.data(), message.size());
  Digest out{};
  crypto_auth_hmacsha256_final(&state, out.data());
  return out;
}

Signature sign(ByteView message, const KeyPair &key)
{
  ensure_sodium();
  Signature sig{};
  crypto_sign_ed25519_detached(sig.data(), nullptr, message.data(), message.size(),
                               key.secret_.data());
  return sig;
}

bool verify(ByteView signature, ByteView message, const PublicKey &public_key)
{
  ensure_sodium();
  if (signature.size() != crypto_sign_ed25519_BYTES)
  {
    return false;
  }
  return crypto_sign_ed25519_verify_detached(signature.data(), message.data(), message.size(),
                                             public_key.data()) == 0;
}

SessionKey derive_session_key(const SharedSecret &shared, const Nonce &nonce, double established_s,
                              double lifetime_s)
{
  SessionKey key;
  key.bytes         = hmac_sha256(shared.bytes, nonce.bytes);
  key.established_s = established_s;
  key.lifetime_s    = lifetime_s;
  return key;
}

SharedSecret provision_shared_secret(ByteView master_secret, std::string_view vehicle_label,
                                     std::string_view fog_label)
{
  std::string message;
  message.reserve(vehicle_label.size() + fog_label.size());
  message.append(vehicle_label);
  message.append(fog_label);
  return SharedSecret{hmac_sha256(master_secret, as_bytes(message))};
}

NonceStream::NonceStream(std::uint64_t master_seed, std::uint32_t entity_index,
                         std::string_view purpose)
{
  std::array<std::uint8_t, 8> seed_bytes{};
  for (int i = 0; i < 8; ++i)
  {
    seed_bytes[i] = static_cast<std::uint8_t>(master_seed >> (8 * i));
  }
  std::string tag = std::string(purpose) + "/" + std::to_string(entity_index);
  key_            = hmac_sha256(seed_bytes, as_bytes(tag));
}

Nonce NonceStream::next()
{
  std::array<std::uint8_t, 8> counter{};
  for (int i = 0; i < 8; ++i)
  {
    counter[i] = static_cast<std::uint8_t>(counter_ >> (8 * (7 - i)));
  }
  ++counter_;
  Digest block = hmac_sha256(key_, counter);
  Nonce  nonce;
  std::copy_n(block.begin(), nonce.bytes.size(), nonce.bytes.begin());
  if (!seen_.emplace(reinterpret_cast<const char *>(nonce.bytes.data()), nonce.bytes.size()).second)
  {
    throw InvariantViolation("nonce stream repeated a value");
  }
  return nonce;
}

}  // namespace ztmaf::crypto
