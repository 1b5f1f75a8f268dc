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

#ifndef BB__REPORT_HPP_
#define BB__REPORT_HPP_

#include "bb/pipeline.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace bb
{

/// Deterministic JSON text for the report (no timestamps).
std::string report_json(const BehaviorReport & report);

void write_passfirst_csv(const BehaviorReport & report, const std::string & manifest, std::ostream & out);
void write_courtesy_csv(const BehaviorReport & report, const std::string & manifest, std::ostream & out);
void write_highwaylc_csv(const BehaviorReport & report, const std::string & manifest, std::ostream & out);
void write_rmse_csv(const BehaviorReport & report, const std::string & manifest, std::ostream & out);
void write_safety_csv(const BehaviorReport & report, const std::string & manifest, std::ostream & out);

struct ReportDigests
{
  std::string report;
  std::string manifest;
};

/// Writes report.json, the figure CSVs, events.csv and manifest.json into `dir`.
ReportDigests write_report_dir(
  const BehaviorReport & report, const std::map<std::string, std::string> & input_digests,
  const std::filesystem::path & dir);

}  // namespace bb

#endif  // BB__REPORT_HPP_
