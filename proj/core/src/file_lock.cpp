#include "ghostmark/file_lock.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "ghostmark/error.hpp"

namespace ghostmark {

FileLock::FileLock(const std::filesystem::path& path, std::chrono::milliseconds wait)
    : lock_path_(path.string() + ".lock") {
  fd_ = ::open(lock_path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError("cannot open " + lock_path_.string() + ": " + std::strerror(errno));
  const auto deadline = std::chrono::steady_clock::now() + wait;
  while (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    if (errno != EWOULDBLOCK && errno != EINTR) {
      const std::string reason = std::strerror(errno);
      ::close(fd_);
      throw IoError("cannot lock " + lock_path_.string() + ": " + reason);
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      ::close(fd_);
      throw LockError("registry is locked by another process (" + lock_path_.string() + ")");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

FileLock::~FileLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace ghostmark
