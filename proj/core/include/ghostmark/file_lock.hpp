#pragma once

#include <chrono>
#include <filesystem>

namespace ghostmark {

// Exclusive advisory lock on `<path>.lock`, held for the object's lifetime.
// Throws LockError if another process still holds it after `wait`.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path,
                    std::chrono::milliseconds wait = std::chrono::milliseconds(0));
  ~FileLock();

  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

  const std::filesystem::path& lock_path() const noexcept { return lock_path_; }

 private:
  std::filesystem::path lock_path_;
  int fd_ = -1;
};

}  // namespace ghostmark
