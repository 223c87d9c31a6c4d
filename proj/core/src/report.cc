/*
 * Copyright 2026 The FedKT Simulator Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <fstream>
#include <string>
#include <unistd.h>

#include "fedkt/experiment.h"

namespace fedkt {
namespace {

using nlohmann::json;

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

json privacy_to_json(const PrivacyReport& p) {
  return {{"level", std::string(to_string(p.level))},
          {"gamma", p.gamma},
          {"queries_answered", p.queries_answered},
          {"epsilon", p.epsilon},
          {"delta", p.delta},
          {"lambda_star", p.lambda_star},
          {"data_dependent_fraction", p.data_dependent_fraction},
          {"pure_epsilon_per_query", p.pure_epsilon_per_query},
          {"party_epsilons", p.party_epsilons},
          {"party_level_epsilon", opt(p.party_level_epsilon)},
          {"example_level_epsilon", opt(p.example_level_epsilon)},
          {"z", opt(p.z)},
          {"advanced_composition_epsilon", p.advanced_composition_epsilon},
          {"notice", kDataDependentBanner}};
}

namespace {

PrivacyReport privacy_from_json(const json& j) {
  PrivacyReport p;
  p.level = parse_privacy_level(j.at("level").get<std::string>());
  p.gamma = j.at("gamma").get<double>();
  p.queries_answered = j.at("queries_answered").get<std::size_t>();
  p.epsilon = j.at("epsilon").get<double>();
  p.delta = j.at("delta").get<double>();
  p.lambda_star = j.at("lambda_star").get<int>();
  p.data_dependent_fraction = j.at("data_dependent_fraction").get<double>();
  p.pure_epsilon_per_query = j.at("pure_epsilon_per_query").get<double>();
  p.party_epsilons = j.at("party_epsilons").get<std::vector<double>>();
  p.party_level_epsilon = get_opt<double>(j, "party_level_epsilon");
  p.example_level_epsilon = get_opt<double>(j, "example_level_epsilon");
  p.z = get_opt<std::size_t>(j, "z");
  p.advanced_composition_epsilon = j.at("advanced_composition_epsilon").get<double>();
  return p;
}

json trial_to_json(const TrialResult& t) {
  return {{"seed", t.seed},
          {"fedkt_accuracy", t.fedkt_accuracy},
          {"solo_accuracy", opt(t.solo_accuracy)},
          {"pate_accuracy", opt(t.pate_accuracy)},
          {"privacy", t.privacy ? privacy_to_json(*t.privacy) : json(nullptr)},
          {"communication",
           {{"total_bytes", t.communication.total_bytes},
            {"num_students", t.communication.num_students},
            {"mean_student_bytes", t.communication.mean_student_bytes},
            {"fedavg_bytes", t.fedavg_bytes}}},
          {"public_examples", t.public_examples},
          {"partition_draws", t.partition_draws},
          {"smallest_party", t.smallest_party},
          {"party_queries", t.party_queries},
          {"server_queries", t.server_queries},
          {"server_abstentions", t.server_abstentions},
          {"mean_party_gap", t.mean_party_gap},
          {"mean_server_gap", t.mean_server_gap},
          {"timings_seconds", t.timings_seconds}};
}

TrialResult trial_from_json(const json& j) {
  TrialResult t;
  t.seed = j.at("seed").get<std::uint64_t>();
  t.fedkt_accuracy = j.at("fedkt_accuracy").get<double>();
  t.solo_accuracy = get_opt<double>(j, "solo_accuracy");
  t.pate_accuracy = get_opt<double>(j, "pate_accuracy");
  if (!j.at("privacy").is_null()) t.privacy = privacy_from_json(j.at("privacy"));
  const json& c = j.at("communication");
  t.communication.total_bytes = c.at("total_bytes").get<std::size_t>();
  t.communication.num_students = c.at("num_students").get<std::size_t>();
  t.communication.mean_student_bytes = c.at("mean_student_bytes").get<double>();
  t.fedavg_bytes = c.at("fedavg_bytes").get<double>();
  t.public_examples = j.at("public_examples").get<std::size_t>();
  t.partition_draws = j.at("partition_draws").get<std::size_t>();
  t.smallest_party = j.at("smallest_party").get<std::size_t>();
  t.party_queries = j.at("party_queries").get<std::size_t>();
  t.server_queries = j.at("server_queries").get<std::size_t>();
  t.server_abstentions = j.at("server_abstentions").get<std::size_t>();
  t.mean_party_gap = j.at("mean_party_gap").get<double>();
  t.mean_server_gap = j.at("mean_server_gap").get<double>();
  t.timings_seconds = j.at("timings_seconds").get<std::map<std::string, double>>();
  return t;
}

void require(bool ok, const std::string& where, const std::string& what) {
  if (!ok) throw Error("report: " + where + " " + what);
}

void require_unit(const json& j, const char* key, const std::string& where, bool nullable) {
  require(j.contains(key), where, std::string("missing '") + key + "'");
  const json& v = j.at(key);
  if (nullable && v.is_null()) return;
  require(v.is_number(), where + "." + key, "must be a number");
  const double x = v.get<double>();
  require(x >= 0.0 && x <= 1.0, where + "." + key, "must lie in [0, 1]");
}

void require_type(const json& j, const char* key, json::value_t type, const std::string& where) {
  require(j.contains(key), where, std::string("missing '") + key + "'");
  const json& v = j.at(key);
  const bool ok = type == json::value_t::number_float ? v.is_number() : v.type() == type;
  require(ok, where + "." + key, "has the wrong type");
}

}  // namespace

json report_to_json(const RunReport& r) {
  json points = json::array();
  for (const SweepPoint& p : r.points) {
    json trials = json::array();
    for (const TrialResult& t : p.trials) trials.push_back(trial_to_json(t));
    points.push_back({{"params", p.params},
                      {"mean_fedkt_accuracy", p.mean_fedkt_accuracy},
                      {"mean_solo_accuracy", opt(p.mean_solo_accuracy)},
                      {"mean_pate_accuracy", opt(p.mean_pate_accuracy)},
                      {"mean_epsilon", opt(p.mean_epsilon)},
                      {"trials", trials}});
  }
  return {{"schema", kReportSchema},
          {"config", r.config},
          {"dataset",
           {{"name", r.dataset.name},
            {"examples", r.dataset.examples},
            {"dim", r.dataset.dim},
            {"classes", r.dataset.classes},
            {"train", r.dataset.train},
            {"public", r.dataset.pub},
            {"test", r.dataset.test}}},
          {"deviations", r.deviations},
          {"points", points}};
}

RunReport report_from_json(const json& j) {
  validate_report(j);
  RunReport r;
  r.config = j.at("config");
  const json& d = j.at("dataset");
  r.dataset.name = d.at("name").get<std::string>();
  r.dataset.examples = d.at("examples").get<std::size_t>();
  r.dataset.dim = d.at("dim").get<std::size_t>();
  r.dataset.classes = d.at("classes").get<std::uint32_t>();
  r.dataset.train = d.at("train").get<std::size_t>();
  r.dataset.pub = d.at("public").get<std::size_t>();
  r.dataset.test = d.at("test").get<std::size_t>();
  r.deviations = j.at("deviations").get<std::vector<std::string>>();
  for (const json& pj : j.at("points")) {
    SweepPoint p;
    p.params = pj.at("params").get<std::map<std::string, double>>();
    p.mean_fedkt_accuracy = pj.at("mean_fedkt_accuracy").get<double>();
    p.mean_solo_accuracy = get_opt<double>(pj, "mean_solo_accuracy");
    p.mean_pate_accuracy = get_opt<double>(pj, "mean_pate_accuracy");
    p.mean_epsilon = get_opt<double>(pj, "mean_epsilon");
    for (const json& tj : pj.at("trials")) p.trials.push_back(trial_from_json(tj));
    r.points.push_back(std::move(p));
  }
  return r;
}

void validate_report(const json& j) {
  using vt = json::value_t;
  require(j.is_object(), "root", "must be an object");
  require(j.contains("schema") && j.at("schema") == kReportSchema, "schema",
          std::string("must equal '") + kReportSchema + "'");
  require_type(j, "config", vt::object, "root");
  require_type(j, "dataset", vt::object, "root");
  const json& d = j.at("dataset");
  require_type(d, "name", vt::string, "dataset");
  for (const char* k : {"examples", "dim", "classes", "train", "public", "test"}) {
    require_type(d, k, vt::number_unsigned, "dataset");
  }
  require_type(j, "deviations", vt::array, "root");
  require_type(j, "points", vt::array, "root");
  require(!j.at("points").empty(), "points", "must not be empty");
  std::size_t pi = 0;
  for (const json& p : j.at("points")) {
    const std::string pw = "points[" + std::to_string(pi++) + "]";
    require_type(p, "params", vt::object, pw);
    require_unit(p, "mean_fedkt_accuracy", pw, false);
    require_unit(p, "mean_solo_accuracy", pw, true);
    require_unit(p, "mean_pate_accuracy", pw, true);
    require_type(p, "trials", vt::array, pw);
    require(!p.at("trials").empty(), pw + ".trials", "must not be empty");
    std::size_t ti = 0;
    for (const json& t : p.at("trials")) {
      const std::string tw = pw + ".trials[" + std::to_string(ti++) + "]";
      require_type(t, "seed", vt::number_unsigned, tw);
      require_unit(t, "fedkt_accuracy", tw, false);
      require_unit(t, "solo_accuracy", tw, true);
      require_unit(t, "pate_accuracy", tw, true);
      require(t.contains("privacy"), tw, "missing 'privacy'");
      if (!t.at("privacy").is_null()) {
        const json& pr = t.at("privacy");
        for (const char* k : {"epsilon", "delta", "gamma", "advanced_composition_epsilon"}) {
          require_type(pr, k, vt::number_float, tw + ".privacy");
          require(pr.at(k).get<double>() >= 0.0, tw + ".privacy." + k, "must be >= 0");
        }
        require_unit(pr, "data_dependent_fraction", tw + ".privacy", false);
      }
      require_type(t, "communication", vt::object, tw);
      require_type(t.at("communication"), "total_bytes", vt::number_unsigned, tw + ".communication");
      require_type(t, "timings_seconds", vt::object, tw);
    }
  }
}

json strip_timings(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (const auto& item : j.items()) {
      if (item.key() == "timings_seconds") continue;
      out[item.key()] = strip_timings(item.value());
    }
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const json& v : j) out.push_back(strip_timings(v));
    return out;
  }
  return j;
}

void write_report_atomic(const json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace fedkt
