// Copyright 2026 The behavior-bench Authors
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

#ifndef BB__DIGEST_HPP_
#define BB__DIGEST_HPP_

#include "bb/core_model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace bb
{

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path & path);

/// Digest of the canonical key-value form of `config`.
std::string config_digest(const AnalysisConfig & config);

}  // namespace bb

#endif  // BB__DIGEST_HPP_
