#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "philoscope/dataset.hpp"

namespace philoscope::testing {

inline std::filesystem::path fixture_dir() { return PHILOSCOPE_FIXTURE_DIR; }
inline std::filesystem::path sample_dir() { return PHILOSCOPE_SAMPLE_DIR; }

inline const Dataset& fixtures() {
  static const Dataset d = [] {
    const std::vector<std::filesystem::path> paths{fixture_dir()};
    return load(paths).dataset;
  }();
  return d;
}

// Fresh scratch directory under the system temp dir, removed by the caller's scope.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("philoscope_" + name)) {
    std::filesystem::remove_all(path_);
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

}  // namespace philoscope::testing
