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

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "creakbench/creak.hpp"

namespace creakbench {

/// One corpus utterance. JSON Lines on disk, one object per line; keys:
/// id, audio_path, speaker_id, gender, [creak_prob], [mean_pitch_hz],
/// [attrs (6 floats)], plus adaptation outputs [delta_semitones], [noise_u],
/// [adapted_path].
struct ManifestRow {
  std::string id;
  std::string audio_path;
  std::string speaker_id;
  std::optional<Gender> gender;
  std::optional<double> creak_prob;
  std::optional<double> mean_pitch_hz;
  std::optional<std::array<double, 6>> attrs;
  std::optional<double> delta_semitones;
  std::optional<double> noise_u;
  std::optional<std::string> adapted_path;
};

std::vector<ManifestRow> read_manifest(const std::string& path);
void write_manifest(const std::vector<ManifestRow>& rows, const std::string& path);

std::optional<Gender> parse_gender(const std::string& s);
std::string gender_name(Gender g);

}  // namespace creakbench
