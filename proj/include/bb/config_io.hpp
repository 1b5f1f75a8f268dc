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

#ifndef BB__CONFIG_IO_HPP_
#define BB__CONFIG_IO_HPP_

#include "bb/core_model.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bb
{

/// `key = value` lines; `#` starts a comment. Keys are case-sensitive.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream & in, const std::string & origin);
KeyValues read_key_values(const std::filesystem::path & path);
std::string format_key_values(const KeyValues & kv);

/// Shortest text that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view text, const std::string & context);
std::int64_t parse_int(std::string_view text, const std::string & context);
std::vector<double> parse_double_list(std::string_view text, const std::string & context);
std::string format_double_list(const std::vector<double> & values);

SiteProfile site_from_key_values(const KeyValues & kv);
KeyValues to_key_values(const SiteProfile & site);
/// "us101", "i80" or a path to a profile file.
SiteProfile load_site(const std::string & name_or_path);
SiteProfile builtin_site(SiteId id);

AnalysisConfig config_from_key_values(const KeyValues & kv);
KeyValues to_key_values(const AnalysisConfig & config);

}  // namespace bb

#endif  // BB__CONFIG_IO_HPP_
