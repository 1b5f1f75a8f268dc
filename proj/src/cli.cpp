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

#include "bb/cli.hpp"

#include "bb/config_io.hpp"
#include "bb/digest.hpp"
#include "bb/ingestion.hpp"
#include "bb/parallel.hpp"
#include "bb/pipeline.hpp"
#include "bb/report.hpp"
#include "bb/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace bb::cli
{

namespace fs = std::filesystem;

namespace
{

struct Options
{
  unsigned threads{0};

  // ingest
  std::string ngsim;
  std::string site;
  double raw_hz{10.0};
  std::optional<double> resample_hz;
  std::string split;
  std::uint64_t seed{0};

  // shared
  std::string out;
  std::string dataset;
  std::string config;
  std::string subset{"all"};

  std::string params;
  std::optional<std::uint64_t> synth_seed;
  std::string kind{"all"};

  std::string scenario{"all"};

  std::string requests;
  std::string source{"cv"};

  std::vector<std::string> predictions;
};

void write_file(const fs::path & path, const std::string & text)
{
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out << text;
}

void write_manifest(const fs::path & dir, const std::string & command, const nlohmann::ordered_json & inputs,
  const std::vector<std::string> & outputs)
{
  nlohmann::ordered_json m;
  m["tool"] = "behavior-bench";
  m["version"] = BB_VERSION;
  m["command"] = command;
  m["inputs"] = inputs;
  m["outputs"] = nlohmann::ordered_json::object();
  for (const auto & name : outputs) {
    m["outputs"][name] = sha256_file(dir / name);
  }
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

AnalysisConfig load_config(const std::string & path)
{
  return path.empty() ? AnalysisConfig{} : config_from_key_values(read_key_values(path));
}

Dataset load_subset(const std::string & dir, const std::string & subset)
{
  Dataset ds = load_dataset_dir(dir);
  if (subset == "all") {
    return ds;
  }
  std::set<Split> splits;
  if (subset == "train") {
    splits = {Split::train};
  } else if (subset == "validation") {
    splits = {Split::validation};
  } else if (subset == "test") {
    splits = {Split::test};
  } else if (subset == "eval") {
    splits = {Split::validation, Split::test};
  } else {
    throw UsageError("subset must be all, train, validation, test or eval");
  }
  const fs::path split_path = fs::path(dir) / "split.csv";
  std::ifstream in(split_path);
  if (!in) {
    throw UsageError("subset '" + subset + "' needs " + split_path.string());
  }
  return apply_split(ds, read_split(in, split_path.string()), splits);
}

std::array<double, 3> parse_ratios(const std::string & text)
{
  const auto v = parse_double_list(text, "--split");
  if (v.size() != 3) {
    throw UsageError("--split needs three ratios");
  }
  const double sum = v[0] + v[1] + v[2];
  // Accept percentages as well as fractions.
  const double scale = sum > 1.5 ? 100.0 : 1.0;
  return {v[0] / scale, v[1] / scale, v[2] / scale};
}

int cmd_ingest(const Options & o, std::ostream & out)
{
  const SiteProfile site = load_site(o.site);
  Dataset ds = parse_ngsim_csv(fs::path(o.ngsim), site, o.raw_hz);
  if (o.resample_hz) {
    ds = resample(ds, *o.resample_hz);
  }
  save_dataset_dir(ds, o.out);
  std::vector<std::string> outputs{"dataset.csv", "site.cfg"};
  if (!o.split.empty()) {
    const auto assignment = split_dataset(ds, parse_ratios(o.split), o.seed);
    std::ostringstream s;
    write_split(assignment, s);
    write_file(fs::path(o.out) / "split.csv", s.str());
    outputs.push_back("split.csv");
  }
  nlohmann::ordered_json inputs = {{"ngsim", sha256_file(o.ngsim)}, {"site", o.site}};
  write_manifest(o.out, "ingest", inputs, outputs);
  out << "ingested " << ds.tracks.size() << " vehicles into " << o.out << '\n';
  return kOk;
}

int cmd_synth(const Options & o, std::ostream & out)
{
  SynthParams p = o.params.empty() ? SynthParams{} : synth_params_from_key_values(read_key_values(o.params));
  if (o.synth_seed) {
    p.seed = *o.synth_seed;
  }
  p.validate();
  SynthOutput s;
  if (o.kind == "merge") {
    s = generate_merge_dataset(p);
  } else if (o.kind == "highway") {
    s = generate_highway_dataset(p);
  } else if (o.kind == "all") {
    s = generate_dataset(p);
  } else {
    throw UsageError("--kind must be merge, highway or all");
  }
  save_dataset_dir(s.dataset, o.out);
  std::ostringstream labels;
  write_labels(s, labels);
  write_file(fs::path(o.out) / "labels.csv", labels.str());
  write_file(fs::path(o.out) / "params.cfg", format_key_values(to_key_values(p)));
  write_manifest(o.out, "synth", {{"params", format_key_values(to_key_values(p))}},
    {"dataset.csv", "site.cfg", "labels.csv", "params.cfg"});
  out << "generated " << s.dataset.tracks.size() << " vehicles into " << o.out << '\n';
  return kOk;
}

int cmd_requests(const Options & o, std::ostream & out, std::ostream & err)
{
  const AnalysisConfig config = load_config(o.config);
  const Dataset ds = load_subset(o.dataset, o.subset);
  const auto which = scenario_select_from_string(o.scenario);
  const auto nat = analyze_naturalistic(ds, config);
  const auto selected = select_anchors(nat.anchors, which);
  std::vector<RequestAnchor> anchors;
  for (const auto & a : selected) {
    anchors.push_back(a.anchor);
  }
  const WireHeader header{
    {"config_digest", config_digest(config)}, {"scenario", o.scenario}, {"subset", o.subset}};
  std::ostringstream text;
  const auto result = write_prediction_requests(ds, anchors, config.neighbor_radius, header, text);
  write_file(o.out, text.str());
  if (anchors.empty()) {
    err << "warning: no events found; wrote an empty request file\n";
  }
  if (!result.skipped.empty()) {
    err << "warning: skipped " << result.skipped.size() << " anchor(s) with insufficient history\n";
  }
  out << "wrote " << result.written << " request(s) to " << o.out << '\n';
  return kOk;
}

int cmd_predict_cv(const Options & o, std::ostream & out)
{
  std::ifstream in(o.requests);
  if (!in) {
    throw DataError("cannot open " + o.requests);
  }
  WireHeader req_header;
  const auto requests = read_prediction_requests(in, o.requests, &req_header);
  std::vector<PredictionInstance> instances;
  for (const auto & r : requests) {
    instances.push_back(constant_velocity_predict(r));
  }
  WireHeader header{{"source", o.source}, {"frame", "local"}};
  if (req_header.count("config_digest")) {
    header["config_digest"] = req_header.at("config_digest");
  }
  std::ostringstream text;
  write_predictions(instances, header, text);
  write_file(o.out, text.str());
  out << "wrote " << instances.size() << " prediction(s) to " << o.out << '\n';
  return kOk;
}

int cmd_evaluate(const Options & o, std::ostream & out)
{
  const AnalysisConfig config = load_config(o.config);
  const std::string digest = config_digest(config);
  const Dataset ds = load_subset(o.dataset, o.subset);
  std::vector<PredictionSet> sets;
  std::map<std::string, std::string> inputs{
    {"dataset.csv", sha256_file(fs::path(o.dataset) / "dataset.csv")},
    {"site.cfg", sha256_file(fs::path(o.dataset) / "site.cfg")},
  };
  for (const auto & path : o.predictions) {
    auto set = parse_predictions(fs::path(path), ds);
    const auto it = set.header.find("config_digest");
    if (it == set.header.end() || it->second != digest) {
      throw DataError(path + ": config digest mismatch");
    }
    inputs["predictions:" + fs::path(path).filename().string()] = sha256_file(path);
    sets.push_back(std::move(set));
  }
  const auto report = evaluate(ds, config, sets);
  const auto digests = write_report_dir(report, inputs, o.out);
  out << "report_digest=" << digests.report << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"Behavioral benchmark for trajectory prediction models"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "Worker threads (0 = all cores; BB_THREADS overrides)");

  auto * ingest = app.add_subcommand("ingest", "Parse an NGSIM CSV into a dataset directory");
  ingest->add_option("--ngsim", o.ngsim, "NGSIM trajectory CSV")->required();
  ingest->add_option("--site", o.site, "us101, i80 or a site profile file")->required();
  ingest->add_option("--out", o.out, "Output directory")->required();
  ingest->add_option("--raw-hz", o.raw_hz, "Sample rate of the input");
  ingest->add_option("--resample-hz", o.resample_hz, "Decimate to this rate");
  ingest->add_option("--split", o.split, "Train,validation,test ratios, e.g. 70,10,20");
  ingest->add_option("--seed", o.seed, "Split seed");

  auto * synth = app.add_subcommand("synth", "Generate a synthetic dataset with known behavior");
  synth->add_option("--params", o.params, "Key-value parameter file");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--seed", o.synth_seed, "Override the parameter seed");
  synth->add_option("--kind", o.kind, "merge, highway or all");

  auto * requests = app.add_subcommand("requests", "Write the prediction requests for a dataset");
  requests->add_option("--dataset", o.dataset, "Dataset directory")->required();
  requests->add_option("--scenario", o.scenario, "merge, highway or all");
  requests->add_option("--out", o.out, "Request file")->required();
  requests->add_option("--config", o.config, "Analysis config file");
  requests->add_option("--subset", o.subset, "all, train, validation, test or eval");

  auto * predict = app.add_subcommand("predict-cv", "Constant-velocity baseline predictions for a request file");
  predict->add_option("--requests", o.requests, "Request file")->required();
  predict->add_option("--out", o.out, "Prediction file")->required();
  predict->add_option("--source", o.source, "Source name written to the header");

  auto * eval = app.add_subcommand("evaluate", "Compute the behavior report");
  eval->add_option("--dataset", o.dataset, "Dataset directory")->required();
  eval->add_option("--predictions", o.predictions, "Prediction files")->expected(0, -1);
  eval->add_option("--out", o.out, "Report directory")->required();
  eval->add_option("--config", o.config, "Analysis config file");
  eval->add_option("--subset", o.subset, "all, train, validation, test or eval");

  std::vector<std::string> storage{"bb"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char *> argv;
  for (auto & s : storage) {
    argv.push_back(s.data());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    unsigned threads = o.threads;
    if (const char * env = std::getenv("BB_THREADS"); env != nullptr && *env != '\0') {
      threads = static_cast<unsigned>(parse_int(env, "BB_THREADS"));
    }
    set_default_threads(threads);

    if (ingest->parsed()) {
      return cmd_ingest(o, out);
    }
    if (synth->parsed()) {
      return cmd_synth(o, out);
    }
    if (requests->parsed()) {
      return cmd_requests(o, out, err);
    }
    if (predict->parsed()) {
      return cmd_predict_cv(o, out);
    }
    return cmd_evaluate(o, out);
  } catch (const UsageError & e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError & e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception & e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace bb::cli
