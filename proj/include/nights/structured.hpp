#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include "json.hpp"

namespace nights {

using json = nlohmann::json;

/// Finds the first JSON object embedded in free-form model output for which
/// `accept` returns true. Markdown fences, leading prose and trailing chatter
/// are skipped; objects nested inside a rejected candidate are still tried.
/// Work is bounded for adversarial input (see kMaxCandidates).
std::optional<json> extract_json_object(std::string_view raw,
                                        const std::function<bool(const json&)>& accept);

inline constexpr std::size_t kMaxCandidates = 256;
inline constexpr std::size_t kMaxRawBytes = 256 * 1024;

}  // namespace nights
