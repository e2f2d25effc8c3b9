#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pacekit/simulator.hpp"

namespace pacekit {

// One controller variant inside a scenario.
struct ControllerChoice {
  std::string name;
  std::string type;  // "layered" | "global" | "comparator"
  int layers = 0;    // layered only; 0 = ceil(1/r_G)
};

// A scenario file: campaign + traffic model + controller grid + seeds.
// Parsed from JSON; invalid configs throw ScenarioError naming the field.
struct Scenario {
  std::string id;
  CampaignSpec campaign;  // budget field acts as default when budgets empty
  std::vector<Micros> budgets;
  TrafficModel traffic;
  std::vector<ControllerChoice> controllers;
  ControllerConfig controller_defaults;
  PipelineConfig pipeline;
  std::uint64_t seed = 1;
  int replications = 1;
  int slot_minutes = 15;
  std::string plan_kind = "even";  // "even" | "traffic" | "explicit"
  std::string out_dir;
  std::string event_log;  // optional dump path prefix

  // Informational tolerance knobs; not used by any control law.
  std::optional<double> plan_deviation_tolerance;
  std::optional<Micros> underspend_tolerance;
};

struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

Scenario load_scenario(const std::filesystem::path& file);
Scenario parse_scenario(const std::string& json_text, const std::string& origin = "<inline>");

// Summary of one run, one row per (controller, budget, seed).
struct SummaryRow {
  std::string scenario_id;
  std::string controller;
  Micros budget = 0;
  std::uint64_t seed = 0;
  Micros total_spend = 0;
  double omega = 0.0;
  double avg_err = 0.0;
  std::optional<double> ecpc_micros;
  double avg_pacing_rate = 0.0;
};

struct ScenarioResult {
  std::vector<SummaryRow> rows;
  std::vector<std::filesystem::path> artifacts;  // CSV files written
};

// Participation-weighted average pacing rate: participations over eligible
// requests. Absent when nothing was eligible.
std::optional<double> compute_avg_pr(std::int64_t participations, std::int64_t eligible);

// Runs the full grid (controllers x budgets x replications), writes per-slot
// CSVs and a summary CSV under out_dir, and returns the summary rows in
// deterministic order. Overrides replace the scenario's own values when set.
struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<std::string> out_dir;
  std::optional<int> slot_minutes;
};

ScenarioResult run_scenario(const Scenario& scenario, const ScenarioOverrides& overrides = {});

// CSV helpers, shared by the CLI and tests. Schema is versioned via the
// leading comment line.
std::string slot_csv(const RunArtifacts& run, const CampaignSpec& spec);
std::string summary_csv(const std::vector<SummaryRow>& rows);

}  // namespace pacekit
