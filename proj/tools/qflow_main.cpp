#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qflow/errors.hpp"
#include "qflow/io.hpp"
#include "qflow/runner.hpp"

namespace {

using namespace qflow;

Scenario load_scenario(const std::string& ref) {
  if (is_preset(ref)) return parse_config(preset_config(ref));
  return parse_config(read_text_file(ref));
}

int exit_code_for(const error& e) {
  switch (e.code()) {
    case errc::config:
    case errc::bad_ordering:
      return 2;
    case errc::divergence:
      return 3;
    default:
      return 1;
  }
}

std::string sweep_csv(const SweepResult& r) {
  // Union of metric columns, in first-seen order.
  std::vector<std::string> cols;
  for (const auto& p : r.points)
    for (const auto& [key, _] : p.metrics.items())
      if (std::find(cols.begin(), cols.end(), key) == cols.end()) cols.push_back(key);
  std::string out = "value";
  for (const auto& c : cols) out += "," + c;
  out += ",error\n";
  for (const auto& p : r.points) {
    out += fmt_double(p.value);
    for (const auto& c : cols) {
      out += ',';
      if (p.metrics.contains(c)) {
        const auto& v = p.metrics[c];
        out += v.is_number() ? fmt_double(v.get<double>()) : v.dump();
      }
    }
    out += ',';
    out += p.error;
    out += '\n';
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D Schrodinger evolution, Madelung fields, trajectory transport, and\n"
               "action-deviation verification checks"};
  app.require_subcommand(1);

  std::string config_ref, axis, values_csv, manifest_path;
  RunOptions opt;
  long seed_flag = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out-dir", opt.out_dir, "output directory");
    cmd->add_option("--seed", seed_flag, "override trajectory seed");
    cmd->add_option("--workers", opt.workers, "concurrent sweep points");
    cmd->add_option("--format", opt.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* run_cmd = app.add_subcommand("run", "run a scenario config or preset");
  run_cmd->add_option("config", config_ref, "config file or preset name")->required();
  add_common(run_cmd);

  auto* verify_cmd = app.add_subcommand("verify", "run and report the configured checks");
  verify_cmd->add_option("config", config_ref, "config file or preset name")->required();
  add_common(verify_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep with aggregated metrics");
  sweep_cmd->add_option("config", config_ref, "config file or preset name")->required();
  sweep_cmd->add_option("--axis", axis, "hbar|dx|dt|n_trajectories")->required();
  sweep_cmd->add_option("--values", values_csv, "comma-separated values")->required();
  add_common(sweep_cmd);

  auto* report_cmd = app.add_subcommand("report", "summarize a manifest");
  report_cmd->add_option("manifest", manifest_path, "manifest.json path")->required();
  add_common(report_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (seed_flag >= 0) opt.seed = std::uint64_t(seed_flag);

    if (run_cmd->parsed() || verify_cmd->parsed()) {
      const Scenario s = load_scenario(config_ref);
      const RunResult r = run_scenario(s, opt);
      std::cout << format_report(r.manifest);
      if (!r.manifest_path.empty())
        std::cout << "manifest: " << r.manifest_path.string() << "\n";
      return r.all_pass ? 0 : 1;
    }

    if (sweep_cmd->parsed()) {
      std::vector<double> values;
      std::stringstream ss(values_csv);
      std::string tok;
      while (std::getline(ss, tok, ',')) values.push_back(std::stod(tok));
      const Scenario s = load_scenario(config_ref);
      const SweepResult r = sweep_scenario(s, axis, values, opt);

      std::filesystem::create_directories(opt.out_dir);
      if (opt.format == "json") {
        nlohmann::ordered_json j;
        j["axis"] = r.axis;
        j["aggregate"] = r.aggregate;
        j["points"] = nlohmann::ordered_json::array();
        for (const auto& p : r.points)
          j["points"].push_back(
              {{"value", p.value}, {"ok", p.ok}, {"error", p.error}, {"metrics", p.metrics}});
        write_text_file(opt.out_dir / "sweep.json", j.dump(2) + "\n");
        std::cout << j.dump(2) << "\n";
      } else {
        const std::string csv = sweep_csv(r);
        write_text_file(opt.out_dir / "sweep.csv", csv);
        std::cout << csv;
        if (!r.aggregate.empty()) std::cout << "aggregate: " << r.aggregate.dump() << "\n";
      }
      bool any_failed = false;
      for (const auto& p : r.points) any_failed |= !p.ok;
      return any_failed ? 1 : 0;
    }

    if (report_cmd->parsed()) {
      const auto manifest = nlohmann::ordered_json::parse(read_text_file(manifest_path));
      if (opt.format == "json")
        std::cout << manifest.dump(2) << "\n";
      else
        std::cout << format_report(manifest);
      return 0;
    }
  } catch (const error& e) {
    std::cerr << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
