#include "nights/storage.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "nights/errors.hpp"

namespace nights {

namespace fs = std::filesystem;

bool is_safe_id(std::string_view id) {
  return !id.empty() && id.size() <= 128 && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_';
  });
}

namespace {

void require_safe(const std::string& id) {
  if (!is_safe_id(id)) throw NotFound("invalid id: " + id);
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw StorageError("cannot create " + path.parent_path().string() + ": " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw StorageError("short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw StorageError("cannot rename into " + path.string() + ": " + ec.message());
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FileStorage::FileStorage(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (const char* sub : {"sessions", "images", "storybooks"}) {
    fs::create_directories(root_ / sub, ec);
    if (ec) throw StorageError("data dir not writable: " + (root_ / sub).string());
  }
}

fs::path FileStorage::session_path(const std::string& id) const {
  return root_ / "sessions" / (id + ".json");
}

fs::path FileStorage::storybook_path(const std::string& id, bool markdown) const {
  return root_ / "storybooks" / (id + (markdown ? ".md" : ".json"));
}

void FileStorage::save_session(const GameSession& session) {
  require_safe(session.id);
  write_file_atomic(session_path(session.id), serialize_session(session));
}

std::optional<GameSession> FileStorage::load_session(const std::string& id) {
  if (!is_safe_id(id)) return std::nullopt;
  const auto text = read_file(session_path(id));
  if (!text) return std::nullopt;
  return deserialize_session(*text);
}

bool FileStorage::session_exists(const std::string& id) {
  return is_safe_id(id) && fs::exists(session_path(id));
}

std::string FileStorage::save_image(const std::string& image_id, const std::string& png) {
  require_safe(image_id);
  const std::string rel = "images/" + image_id + ".png";
  write_file_atomic(root_ / rel, png);
  return rel;
}

std::optional<std::string> FileStorage::load_image(const std::string& image_id) {
  if (!is_safe_id(image_id)) return std::nullopt;
  return read_file(root_ / "images" / (image_id + ".png"));
}

void FileStorage::save_storybook(const std::string& id, const std::string& json_text,
                                 const std::string& markdown) {
  require_safe(id);
  write_file_atomic(storybook_path(id, false), json_text);
  write_file_atomic(storybook_path(id, true), markdown);
}

std::optional<std::string> FileStorage::load_storybook(const std::string& id, bool markdown) {
  if (!is_safe_id(id)) return std::nullopt;
  return read_file(storybook_path(id, markdown));
}

void MemoryStorage::save_session(const GameSession& session) {
  std::lock_guard lock(mu_);
  sessions_[session.id] = session;
}

std::optional<GameSession> MemoryStorage::load_session(const std::string& id) {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

bool MemoryStorage::session_exists(const std::string& id) {
  std::lock_guard lock(mu_);
  return sessions_.count(id) != 0;
}

std::string MemoryStorage::save_image(const std::string& image_id, const std::string& png) {
  std::lock_guard lock(mu_);
  images_[image_id] = png;
  return "images/" + image_id + ".png";
}

std::optional<std::string> MemoryStorage::load_image(const std::string& image_id) {
  std::lock_guard lock(mu_);
  const auto it = images_.find(image_id);
  if (it == images_.end()) return std::nullopt;
  return it->second;
}

void MemoryStorage::save_storybook(const std::string& id, const std::string& json_text,
                                   const std::string& markdown) {
  std::lock_guard lock(mu_);
  storybooks_[id] = {json_text, markdown};
}

std::optional<std::string> MemoryStorage::load_storybook(const std::string& id, bool markdown) {
  std::lock_guard lock(mu_);
  const auto it = storybooks_.find(id);
  if (it == storybooks_.end()) return std::nullopt;
  return markdown ? it->second.second : it->second.first;
}

}  // namespace nights
