#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace nights {

using Timestamp = std::chrono::sys_seconds;

/// Injectable time source. Golden tests pin it with FixedClock.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
};

class FixedClock final : public Clock {
 public:
  explicit FixedClock(Timestamp at) : at_(at) {}
  Timestamp now() const override { return at_; }
  void set(Timestamp at) { at_ = at; }

 private:
  Timestamp at_;
};

/// "2025-01-01T00:00:00Z"
std::string format_iso8601(Timestamp t);
/// Accepts the format produced by format_iso8601. Throws ValidationError.
Timestamp parse_iso8601(std::string_view text);

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// splitmix64 finalizer; used to spread seeds into ids.
std::uint64_t mix64(std::uint64_t x);

/// UUID-shaped (8-4-4-4-12 lowercase hex) string derived from two words.
std::string uuid_from(std::uint64_t hi, std::uint64_t lo);

std::string hex64(std::uint64_t v);

std::string_view trim(std::string_view s);

/// Number of code points; invalid bytes count as one each.
std::size_t utf8_length(std::string_view s);

/// Prefix holding at most max_chars code points, never splitting a sequence.
std::string utf8_truncate(std::string_view s, std::size_t max_chars);

bool is_valid_utf8(std::string_view s);

std::string ascii_lower(std::string_view s);

}  // namespace nights
