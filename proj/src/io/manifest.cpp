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

#include "asc/io/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <stdexcept>

namespace asc::io {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kEval: return "eval";
  }
  return "?";
}

Split split_from_string(std::string_view name) {
  const std::string s = lower(trim(name));
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  if (s == "eval" || s == "evaluate" || s == "evaluation") return Split::kEval;
  throw std::invalid_argument("unknown split '" + std::string(name) +
                              "' (expected train, test or eval)");
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted field");
  return fields;
}

std::size_t Manifest::class_index(const std::string& label) const {
  const auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) {
    throw std::out_of_range("label '" + label + "' is not a declared class");
  }
  return static_cast<std::size_t>(it - classes.begin());
}

std::filesystem::path Manifest::resolve(const ManifestEntry& entry) const {
  const std::filesystem::path p(entry.audio_path);
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<ManifestEntry> Manifest::select(Split split,
                                            std::optional<int> fold) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.split != split) continue;
    if (fold && e.fold != fold) continue;
    out.push_back(e);
  }
  return out;
}

Manifest parse_manifest(std::istream& in, const std::string& source_name,
                        const std::filesystem::path& base_dir) {
  Manifest m;
  m.base_dir = base_dir;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                             ": " + msg);
  };
  std::map<std::string, std::size_t> column;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(line);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    for (auto& f : fields) f = trim(f);
    if (column.empty()) {
      if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) {
        fields[0].erase(0, 3);
      }
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string name = lower(fields[i]);
        if (name != "path" && name != "label" && name != "device" &&
            name != "fold" && name != "split") {
          fail("unknown column '" + fields[i] + "'");
        }
        if (!column.emplace(name, i).second) fail("duplicate column '" + name + "'");
      }
      if (!column.count("path") || !column.count("label")) {
        fail("header must name at least path and label columns");
      }
      continue;
    }
    if (fields.size() != column.size()) {
      fail("expected " + std::to_string(column.size()) + " fields, got " +
           std::to_string(fields.size()));
    }
    auto field = [&](const char* name) -> std::string {
      const auto it = column.find(name);
      return it == column.end() ? std::string() : fields[it->second];
    };
    ManifestEntry e;
    e.line = line_no;
    e.audio_path = field("path");
    e.label = field("label");
    if (e.audio_path.empty()) fail("empty path");
    if (e.label.empty()) fail("empty label");
    if (const auto d = field("device"); !d.empty()) e.device = d;
    if (const auto f = field("fold"); !f.empty()) {
      int v = 0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        fail("fold '" + f + "' is not an integer");
      }
      e.fold = v;
    }
    if (column.count("split")) {
      try {
        e.split = split_from_string(field("split"));
      } catch (const std::invalid_argument& err) {
        fail(err.what());
      }
    }
    m.entries.push_back(std::move(e));
  }
  if (column.empty()) {
    throw std::runtime_error(source_name + ": empty manifest (no header)");
  }
  if (m.entries.empty()) {
    throw std::runtime_error(source_name + ": empty manifest (no rows)");
  }

  std::set<std::pair<std::string, Split>> seen;
  std::vector<ManifestEntry> kept;
  std::set<std::string> labels;
  for (auto& e : m.entries) {
    if (!seen.emplace(e.audio_path, e.split).second) {
      m.warnings.push_back(source_name + ":" + std::to_string(e.line) +
                           ": duplicate row for " + e.audio_path + " (" +
                           std::string(to_string(e.split)) + "), dropped");
      continue;
    }
    labels.insert(e.label);
    kept.push_back(std::move(e));
  }
  m.entries = std::move(kept);

  // Within one fold a segment may not sit on both sides of the split.
  std::map<std::pair<std::string, std::optional<int>>, const ManifestEntry*> side;
  for (const auto& e : m.entries) {
    const auto [it, fresh] = side.emplace(std::make_pair(e.audio_path, e.fold), &e);
    if (!fresh && it->second->split != e.split) {
      line_no = e.line;
      fail(e.audio_path + " appears in both " +
           std::string(to_string(it->second->split)) + " (line " +
           std::to_string(it->second->line) + ") and " +
           std::string(to_string(e.split)));
    }
  }
  m.classes.assign(labels.begin(), labels.end());
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open manifest");
  return parse_manifest(in, path.string(), path.parent_path());
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot write manifest");
  out << "path,label,device,fold,split\n";
  for (const auto& e : entries) {
    out << quote(e.audio_path) << ',' << quote(e.label) << ','
        << quote(e.device.value_or("")) << ','
        << (e.fold ? std::to_string(*e.fold) : std::string()) << ','
        << to_string(e.split) << '\n';
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace asc::io
