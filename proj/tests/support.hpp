#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "proswitch/errors.hpp"

namespace testsupport {

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("proswitch-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(PROSWITCH_FIXTURES) / rel;
}

// Kind of the proswitch::Error thrown by `fn`, or nullopt when none is thrown.
inline std::optional<proswitch::ErrorKind> error_kind(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const proswitch::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

#ifdef PROSWITCH_GOLDEN
inline std::string golden(const std::string& name) {
  std::ifstream in(std::filesystem::path(PROSWITCH_GOLDEN) / name, std::ios::binary);
  if (!in) throw std::runtime_error("missing golden file " + name);
  return std::string(std::istreambuf_iterator<char>(in), {});
}
#endif

}  // namespace testsupport
