#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "nights/model.hpp"

namespace nights {

/// Persistence for sessions, images and storybooks. Implementations are
/// thread-safe; the engine serializes writes per session.
class Storage {
 public:
  virtual ~Storage() = default;

  virtual void save_session(const GameSession& session) = 0;
  virtual std::optional<GameSession> load_session(const std::string& id) = 0;
  virtual bool session_exists(const std::string& id) = 0;

  /// Stores PNG bytes; returns the path relative to the data root.
  virtual std::string save_image(const std::string& image_id, const std::string& png) = 0;
  virtual std::optional<std::string> load_image(const std::string& image_id) = 0;

  virtual void save_storybook(const std::string& id, const std::string& json_text,
                              const std::string& markdown) = 0;
  virtual std::optional<std::string> load_storybook(const std::string& id, bool markdown) = 0;
};

/// `<root>/sessions/<id>.json`, `<root>/images/<id>.png`,
/// `<root>/storybooks/<id>.{json,md}`. Writes go to a temp file first and are
/// renamed into place.
class FileStorage final : public Storage {
 public:
  explicit FileStorage(std::filesystem::path root);

  void save_session(const GameSession& session) override;
  std::optional<GameSession> load_session(const std::string& id) override;
  bool session_exists(const std::string& id) override;
  std::string save_image(const std::string& image_id, const std::string& png) override;
  std::optional<std::string> load_image(const std::string& image_id) override;
  void save_storybook(const std::string& id, const std::string& json_text,
                      const std::string& markdown) override;
  std::optional<std::string> load_storybook(const std::string& id, bool markdown) override;

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path session_path(const std::string& id) const;
  std::filesystem::path storybook_path(const std::string& id, bool markdown) const;

 private:
  std::filesystem::path root_;
};

class MemoryStorage final : public Storage {
 public:
  void save_session(const GameSession& session) override;
  std::optional<GameSession> load_session(const std::string& id) override;
  bool session_exists(const std::string& id) override;
  std::string save_image(const std::string& image_id, const std::string& png) override;
  std::optional<std::string> load_image(const std::string& image_id) override;
  void save_storybook(const std::string& id, const std::string& json_text,
                      const std::string& markdown) override;
  std::optional<std::string> load_storybook(const std::string& id, bool markdown) override;

 private:
  std::mutex mu_;
  std::map<std::string, GameSession> sessions_;
  std::map<std::string, std::string> images_;
  std::map<std::string, std::pair<std::string, std::string>> storybooks_;
};

/// Atomic replace: write `<path>.tmp` then rename. Throws StorageError.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::optional<std::string> read_file(const std::filesystem::path& path);

/// Ids reach the filesystem; allow only [A-Za-z0-9-_].
bool is_safe_id(std::string_view id);

}  // namespace nights
