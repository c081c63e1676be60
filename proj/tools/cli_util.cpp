// Copyright 2026 The Creakbench Authors
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

#include "cli_util.hpp"

#include <json.hpp>

#include <fstream>

namespace creakbench::cli {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<EmbeddingRow> read_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("read_embeddings: cannot open " + path);
  std::vector<EmbeddingRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError("read_embeddings: " + path + ":" + std::to_string(lineno) + ": " +
                       e.what());
    }
    EmbeddingRow row;
    if (!j.contains("id") || !j.contains("embedding")) {
      throw InputError("read_embeddings: missing id/embedding at " + path + ":" +
                       std::to_string(lineno));
    }
    row.id = j.at("id").get<std::string>();
    row.speaker = j.value("speaker", std::string{});
    const auto& emb = j.at("embedding");
    row.embedding.resize(static_cast<Eigen::Index>(emb.size()));
    for (std::size_t i = 0; i < emb.size(); ++i) {
      row.embedding(static_cast<Eigen::Index>(i)) = emb[i].get<double>();
    }
    if (j.contains("attrs")) {
      const auto& attrs = j.at("attrs");
      if (attrs.size() != flow::kAttributeDim) {
        throw InputError("read_embeddings: attrs must hold 6 floats at " + path + ":" +
                         std::to_string(lineno));
      }
      std::array<double, flow::kAttributeDim> arr{};
      for (std::size_t i = 0; i < attrs.size(); ++i) arr[i] = attrs[i].get<double>();
      row.attrs = flow::AttributeVector::from_array(arr);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_embeddings(const std::vector<EmbeddingRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("write_embeddings: cannot write " + path);
  for (const auto& row : rows) {
    json j;
    j["id"] = row.id;
    if (!row.speaker.empty()) j["speaker"] = row.speaker;
    j["embedding"] = std::vector<double>(row.embedding.data(),
                                         row.embedding.data() + row.embedding.size());
    j["attrs"] = row.attrs.to_array();
    os << j.dump() << "\n";
  }
  if (!os) throw InputError("write_embeddings: write failed: " + path);
}

}  // namespace creakbench::cli
