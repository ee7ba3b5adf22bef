#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tbsynth/blueprint.hpp"

namespace tbsynth::testing {

inline std::filesystem::path fixture_dir() { return TBSYNTH_FIXTURE_DIR; }
inline std::filesystem::path golden_dir() { return TBSYNTH_GOLDEN_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string fixture(const std::string& rel) { return read_file(fixture_dir() / rel); }

inline Blueprint load_blueprint(const std::string& name) {
  auto r = parse_blueprint(fixture("blueprints/" + name));
  if (!r.ok()) throw std::runtime_error("fixture " + name + ": " + r.errors.front().to_string());
  return *r.blueprint;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("tbsynth_" + tag + "_" + std::to_string(rd()));
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

 private:
  std::filesystem::path path_;
};

}  // namespace tbsynth::testing
