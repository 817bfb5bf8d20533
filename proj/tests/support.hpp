// Copyright 2026 The scenemix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TESTS__SUPPORT_HPP_
#define TESTS__SUPPORT_HPP_

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "scenemix/rng.hpp"

namespace scenemix::test
{

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
  explicit TempDir(const std::string & tag)
  {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("scenemix_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir &) = delete;
  TempDir & operator=(const TempDir &) = delete;

  const std::filesystem::path & path() const { return path_; }
  std::filesystem::path operator/(const std::string & name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline std::vector<char> read_bytes(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
}

/// FNV-1a over every regular file (relative path + contents), in path order.
inline std::uint64_t hash_tree(const std::filesystem::path & root)
{
  std::vector<std::filesystem::path> files;
  for (const auto & e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto & f : files) {
    const std::string rel = std::filesystem::relative(f, root).generic_string();
    h = fnv1a64(rel, h);
    const std::vector<char> bytes = read_bytes(f);
    h = fnv1a64(std::string_view(bytes.data(), bytes.size()), h);
  }
  return h;
}

inline std::uint64_t hash_file(const std::filesystem::path & path)
{
  const std::vector<char> bytes = read_bytes(path);
  return fnv1a64(std::string_view(bytes.data(), bytes.size()));
}

}  // namespace scenemix::test

#endif  // TESTS__SUPPORT_HPP_
