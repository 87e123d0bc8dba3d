// Copyright 2026 The Mnemos Authors.
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

#ifndef MNEMOS_CHECKPOINT_H_
#define MNEMOS_CHECKPOINT_H_

#include <filesystem>

#include <nlohmann/json.hpp>

#include "mnemos/em.h"

namespace mnemos {

inline constexpr int kCheckpointVersion = 1;

nlohmann::json TraitsToJson(const TraitState& traits);
TraitState TraitsFromJson(const nlohmann::json& doc);

nlohmann::json ActivationsToJson(const ActivationTensor& z);
ActivationTensor ActivationsFromJson(const nlohmann::json& doc);

nlohmann::json ScoresToJson(const ScoreTable& scores);
ScoreTable ScoresFromJson(const nlohmann::json& doc);

nlohmann::json CheckpointToJson(const EmState& state, const EmConfig& config);
// `config` may be null when the caller only needs the state.
EmState CheckpointFromJson(const nlohmann::json& doc, EmConfig* config);

void SaveCheckpoint(const std::filesystem::path& path, const EmState& state,
                    const EmConfig& config);
EmState LoadCheckpoint(const std::filesystem::path& path,
                       EmConfig* config = nullptr);

}  // namespace mnemos

#endif  // MNEMOS_CHECKPOINT_H_
