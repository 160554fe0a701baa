#include <regex>

#include "doctest.h"
#include "nights/errors.hpp"
#include "nights/storage.hpp"
#include "nights/structured.hpp"
#include "nights/util.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace nights;

TEST_CASE("iso8601 round trip") {
  const auto t = parse_iso8601("2025-01-01T00:00:00Z");
  CHECK(format_iso8601(t) == "2025-01-01T00:00:00Z");
  CHECK(t.time_since_epoch().count() == 1735689600);
  CHECK(format_iso8601(parse_iso8601("2024-02-29T23:59:59Z")) == "2024-02-29T23:59:59Z");
  for (const char* bad : {"", "2025-01-01", "2025-13-01T00:00:00Z", "2025-01-01T00:00:00", "2025-01-01T25:00:00Z",
                          "2025-02-30T00:00:00Z"}) {
    CHECK_THROWS_AS(parse_iso8601(bad), ValidationError);
  }
}

TEST_CASE("fnv1a64 matches the reference") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(fnv1a64("The chef") == oracle::fnv1a("The chef"));
}

TEST_CASE("uuid shape") {
  const std::regex shape("^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$");
  CHECK(std::regex_match(uuid_from(1, 2), shape));
  CHECK(std::regex_match(session_id_for(42, 0), shape));
  CHECK(session_id_for(42, 0) != session_id_for(42, 1));
  CHECK(session_id_for(42, 0) != session_id_for(43, 0));
  CHECK(is_safe_id(session_id_for(42, 0)));
  CHECK_FALSE(is_safe_id("../etc"));
  CHECK_FALSE(is_safe_id(""));
}

TEST_CASE("utf8 helpers") {
  const std::string s = "Šeherezáda王";
  CHECK(utf8_length(s) == 11);
  CHECK(utf8_truncate(s, 2) == "Še");
  CHECK(utf8_truncate(s, 100) == s);
  CHECK(utf8_truncate("王王", 1) == "王");
  CHECK(is_valid_utf8(s));
  CHECK_FALSE(is_valid_utf8("\xc3"));
  CHECK_FALSE(is_valid_utf8("\xed\xa0\x80"));  // surrogate
  CHECK_FALSE(is_valid_utf8("\xc0\xaf"));      // overlong
  CHECK(trim("  a b \n") == "a b");
  CHECK(ascii_lower("SwORD") == "sword");
}

TEST_CASE("extract_json_object skips prose, fences and rejected candidates") {
  const auto any = [](const json& j) { return j.is_object(); };
  CHECK(extract_json_object("no braces here", any) == std::nullopt);
  CHECK((*extract_json_object("Sure! ```json\n{\"a\": 1}\n``` bye", any))["a"] == 1);
  CHECK((*extract_json_object(R"(x {"s": "brace } in string", "n": 2} y)", any))["n"] == 2);
  const auto has_b = [](const json& j) { return j.contains("b"); };
  CHECK((*extract_json_object(R"({"a": {"b": 3}})", has_b))["b"] == 3);
  CHECK((*extract_json_object(R"({"a":1} {"b":4})", has_b))["b"] == 4);
  CHECK(extract_json_object("{{{{{{{{", any) == std::nullopt);
}

TEST_CASE("extract_json_object stays bounded on hostile input") {
  const std::string hostile(200000, '{');
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(extract_json_object(hostile, [](const json&) { return true; }) == std::nullopt);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(5));
}

TEST_CASE("file storage writes atomically and reads back") {
  fixtures::TempDir dir;
  FileStorage storage(dir.path);
  auto s = new_session(session_id_for(1, 0), 1, PersonaConfig{}, fixtures::fixed_time());
  storage.save_session(s);
  CHECK(storage.session_exists(s.id));
  CHECK(storage.load_session(s.id) == s);
  CHECK_FALSE(std::filesystem::exists(storage.session_path(s.id).string() + ".tmp"));
  CHECK_FALSE(storage.load_session("missing"));
  CHECK_THROWS_AS(storage.save_image("../x", "png"), NotFound);
  std::ofstream(storage.session_path("broken")) << "{";
  CHECK_THROWS_AS(storage.load_session("broken"), StorageError);
}
