#ifndef AELOC_TESTS_TMPDIR_HPP
#define AELOC_TESTS_TMPDIR_HPP

#include <atomic>
#include <filesystem>
#include <string>

namespace testutil {

// Scratch directory removed on destruction.
class TmpDir {
 public:
  explicit TmpDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("aeloc_" + tag + "_" + std::to_string(counter.fetch_add(1)) + "_" +
             std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TmpDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& rel = "") const {
    return rel.empty() ? path_.string() : (path_ / rel).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil

#endif  // AELOC_TESTS_TMPDIR_HPP
