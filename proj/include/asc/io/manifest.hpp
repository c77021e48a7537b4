// Copyright 2026 The ASC Authors. All Rights Reserved.
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

// CSV dataset manifest with header `path,label,device,fold,split`.
//
// Columns are matched by header name. path and label are required; device
// and fold may be absent or empty; split defaults to train when the column
// is absent. Relative paths resolve against the manifest's directory.

#ifndef ASC_IO_MANIFEST_HPP_
#define ASC_IO_MANIFEST_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace asc::io {

enum class Split { kTrain, kTest, kEval };

std::string_view to_string(Split split);
// Case-insensitive train/test/eval; throws std::invalid_argument otherwise.
Split split_from_string(std::string_view name);

struct ManifestEntry {
  std::string audio_path;
  std::string label;
  std::optional<std::string> device;
  std::optional<int> fold;
  Split split = Split::kTrain;
  std::size_t line = 0;  // 1-based line in the source file
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;
  std::vector<std::string> classes;  // sorted distinct labels
  std::vector<std::string> warnings;

  std::size_t n_classes() const { return classes.size(); }
  // Throws std::out_of_range for an undeclared label.
  std::size_t class_index(const std::string& label) const;
  std::filesystem::path resolve(const ManifestEntry& entry) const;
  // Entries of one split, optionally restricted to one fold.
  std::vector<ManifestEntry> select(Split split,
                                    std::optional<int> fold = {}) const;
};

// Errors carry "<source>:<line>:" prefixes. Duplicate (path, split) rows are
// dropped with a warning.
Manifest parse_manifest(std::istream& in, const std::string& source_name,
                        const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries);

// RFC 4180 field splitting (quoted fields, doubled quotes).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace asc::io

#endif  // ASC_IO_MANIFEST_HPP_
