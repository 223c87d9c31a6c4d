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

// Command-line front end: run experiments, generate synthetic data, and run
// the privacy accountant over a file of vote histograms.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedkt/dataset_io.h"
#include "fedkt/experiment.h"
#include "fedkt/privacy.h"
#include "fedkt/synthetic.h"

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sweeps;
  std::string out_dir;
  std::optional<std::size_t> trials, n, s, t;
  std::optional<std::string> level;
  std::optional<double> gamma, query_fraction, public_fraction;
  bool no_solo = false;
  bool no_pate = false;
};

struct GenArgs {
  std::string task;
  std::string out;
  std::size_t size = 2000;
  std::uint64_t seed = 0;
  std::uint32_t classes = 2;
  std::size_t dim = 2;
  double separation = 4.0;
  double noise = 0.0;
};

struct AccountantArgs {
  std::string votes;
  double gamma = 0.0;
  std::string level;
  std::size_t s = 1;
  std::size_t t = 1;
  double delta = 1e-5;
};

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

int do_run(const RunArgs& a) {
  fedkt::ExperimentConfig cfg = fedkt::load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.trials) cfg.trials = *a.trials;
  if (a.n) cfg.fedkt.n = *a.n;
  if (a.s) cfg.fedkt.s = *a.s;
  if (a.t) cfg.fedkt.t = *a.t;
  if (a.level) cfg.fedkt.level = fedkt::parse_privacy_level(*a.level);
  if (a.gamma) cfg.fedkt.gamma = *a.gamma;
  if (a.query_fraction) cfg.fedkt.query_fraction = *a.query_fraction;
  if (a.public_fraction) cfg.public_fraction = *a.public_fraction;
  if (a.no_solo) cfg.run_solo = false;
  if (a.no_pate) cfg.run_pate = false;
  if (!a.sweeps.empty()) {
    cfg.sweep.clear();
    for (const auto& s : a.sweeps) cfg.sweep.push_back(fedkt::parse_sweep_axis(s));
  }
  if (!a.out_dir.empty()) cfg.output = (std::filesystem::path(a.out_dir) / "report.json").string();

  const fedkt::RunReport report = fedkt::run_experiment(cfg);
  std::cout << "dataset " << report.dataset.name << ": " << report.dataset.examples
            << " examples, dim " << report.dataset.dim << ", " << report.dataset.classes
            << " classes (train/public/test " << report.dataset.train << "/"
            << report.dataset.pub << "/" << report.dataset.test << ")\n";
  for (const auto& p : report.points) {
    std::string label;
    for (const auto& [k, v] : p.params) {
      std::ostringstream os;
      os << k << "=" << v << " ";
      label += os.str();
    }
    std::cout << (label.empty() ? "" : "[" + label.substr(0, label.size() - 1) + "] ")
              << "fedkt " << fmt_opt(p.mean_fedkt_accuracy) << "  solo "
              << fmt_opt(p.mean_solo_accuracy) << "  pate " << fmt_opt(p.mean_pate_accuracy)
              << "  epsilon " << fmt_opt(p.mean_epsilon) << "\n";
  }
  if (!cfg.output.empty()) std::cout << "report written to " << cfg.output << "\n";
  return 0;
}

int do_gen(const GenArgs& a) {
  fedkt::Rng rng = fedkt::Rng(a.seed).derive({fedkt::id(fedkt::Stream::kSynthetic)});
  fedkt::Dataset d;
  if (a.task == "blobs") {
    fedkt::BlobsOptions o;
    o.size = a.size;
    o.classes = a.classes;
    o.dim = a.dim;
    o.separation = a.separation;
    d = fedkt::make_blobs(o, rng);
  } else {
    d = fedkt::make_xor({a.size, a.noise}, rng);
  }
  fedkt::write_csv(d, a.out);
  std::cout << "wrote " << d.size() << " examples to " << a.out << "\n";
  return 0;
}

std::vector<fedkt::VoteHistogram> read_votes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fedkt::Error("cannot open '" + path + "'");
  std::vector<fedkt::VoteHistogram> out;
  std::string line;
  std::size_t line_no = 0, width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> counts;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        counts.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw fedkt::Error(path + ": line " + std::to_string(line_no) + ": bad count '" + cell + "'");
      }
    }
    if (width == 0) width = counts.size();
    if (counts.size() != width) {
      throw fedkt::Error(path + ": line " + std::to_string(line_no) + ": expected " +
                         std::to_string(width) + " counts");
    }
    out.emplace_back(std::move(counts), static_cast<std::uint32_t>(width));
  }
  if (out.empty()) throw fedkt::Error(path + ": no vote histograms");
  return out;
}

int do_accountant(const AccountantArgs& a) {
  const auto hists = read_votes(a.votes);
  const fedkt::PrivacyLevel level = fedkt::parse_privacy_level(a.level);
  fedkt::PrivacyReport report;
  if (level == fedkt::PrivacyLevel::kL1) {
    report = fedkt::account_server_queries(hists, a.s, a.gamma, a.delta);
  } else if (level == fedkt::PrivacyLevel::kL2) {
    report = fedkt::account_party_queries({{hists}}, a.t, a.gamma, a.delta);
  } else {
    throw fedkt::Error("accountant needs level l1 or l2");
  }
  std::cout << fedkt::privacy_to_json(report).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-shot federated learning via two-tier knowledge transfer"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run_cmd->add_option("--config", run.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Base seed");
  run_cmd->add_option("--sweep", run.sweeps, "name=v1,v2,... (repeatable; replaces the config's sweep)");
  run_cmd->add_option("--out", run.out_dir, "Directory for report.json");
  run_cmd->add_option("--trials", run.trials, "Seeds per sweep point");
  run_cmd->add_option("--n", run.n, "Parties");
  run_cmd->add_option("--s", run.s, "Partitions per party");
  run_cmd->add_option("--t", run.t, "Teachers per partition");
  run_cmd->add_option("--level", run.level, "Privacy level L0, L1 or L2");
  run_cmd->add_option("--gamma", run.gamma, "Laplace noise parameter (scale 1/gamma)");
  run_cmd->add_option("--query-fraction", run.query_fraction, "Share of the public set queried");
  run_cmd->add_option("--public-fraction", run.public_fraction, "Share of the public set used");
  run_cmd->add_flag("--no-solo", run.no_solo, "Skip the SOLO baseline");
  run_cmd->add_flag("--no-pate", run.no_pate, "Skip the centralized PATE baseline");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic task as CSV");
  gen_cmd->add_option("--task", gen.task, "blobs or xor")->required()->check(CLI::IsMember({"blobs", "xor"}));
  gen_cmd->add_option("--out", gen.out, "Output CSV")->required();
  gen_cmd->add_option("--size", gen.size, "Number of examples");
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_option("--classes", gen.classes, "Blob classes");
  gen_cmd->add_option("--dim", gen.dim, "Blob dimension");
  gen_cmd->add_option("--separation", gen.separation, "Distance between neighbouring blob centres");
  gen_cmd->add_option("--noise", gen.noise, "XOR label-flip rate");

  AccountantArgs acc;
  auto* acc_cmd = app.add_subcommand("accountant", "Moments accountant over a CSV of vote histograms");
  acc_cmd->add_option("--votes", acc.votes, "One histogram per line, comma separated")->required()->check(CLI::ExistingFile);
  acc_cmd->add_option("--gamma", acc.gamma, "Laplace noise parameter")->required();
  acc_cmd->add_option("--level", acc.level, "l1 or l2")->required();
  acc_cmd->add_option("--s", acc.s, "Partitions per party (l1 multiplier)");
  acc_cmd->add_option("--t", acc.t, "Teachers per partition (l2 party-level multiplier)");
  acc_cmd->add_option("--delta", acc.delta, "Target delta");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run_cmd->parsed()) return do_run(run);
    if (gen_cmd->parsed()) return do_gen(gen);
    if (acc_cmd->parsed()) return do_accountant(acc);
  } catch (const fedkt::StageError& e) {
    std::cerr << "error in stage " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
