#include "qflow/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

#include "qflow/deviation.hpp"
#include "qflow/errors.hpp"
#include "qflow/io.hpp"

namespace qflow {

namespace {

using nlohmann::ordered_json;

ordered_json potential_json(const Potential& p) {
  ordered_json j;
  if (std::holds_alternative<Free>(p)) {
    j["type"] = "free";
  } else if (const auto* h = std::get_if<Harmonic>(&p)) {
    j["type"] = "harmonic";
    j["omega"] = h->omega;
  } else {
    const auto& b = std::get<Barrier>(p);
    j["type"] = "barrier";
    j["height"] = b.height;
    j["center"] = b.center;
    j["width"] = b.width;
  }
  return j;
}

ordered_json initial_json(const InitialWave& w) {
  ordered_json j;
  if (const auto* g = std::get_if<GaussianInit>(&w)) {
    j["type"] = "gaussian";
    j["x0"] = g->x0;
    j["sigma"] = g->sigma;
    j["k0"] = g->k0;
  } else if (const auto* c = std::get_if<CoherentInit>(&w)) {
    j["type"] = "coherent";
    j["x0"] = c->x0;
  } else {
    const auto& d = std::get<DoubleSlitInit>(w);
    j["type"] = "double_slit";
    j["separation"] = d.separation;
    j["slit_width"] = d.slit_width;
    j["k0"] = d.k0;
  }
  return j;
}

ordered_json scenario_json(const Scenario& s) {
  ordered_json j;
  j["name"] = s.name;
  j["grid"] = {{"x_min", s.grid.x_min}, {"x_max", s.grid.x_max}, {"n", s.grid.n}};
  j["constants"] = {{"hbar", s.constants.hbar}, {"mass", s.constants.mass}};
  j["potential"] = potential_json(s.potential);
  j["initial"] = initial_json(s.initial);
  j["evolution"] = {{"dt", s.evolution.dt},
                    {"n_steps", s.evolution.n_steps},
                    {"store_every", s.evolution.store_every}};
  j["trajectories"] = {{"n", s.trajectories.n},
                       {"seed", s.trajectories.seed},
                       {"export_stride", s.trajectories.export_stride}};
  j["deviation"] = {{"enabled", s.deviation.enabled},
                    {"segment_dt", s.deviation.segment_dt},
                    {"n_segments", s.deviation.n_segments}};
  ordered_json checks = ordered_json::object();
  for (const auto& c : s.checks) checks[c.name] = c.threshold;
  j["checks"] = checks;
  return j;
}

long mid_frame(const FrameSeries& frames) {
  return std::clamp(frames.frame_count() / 2, 1L, frames.frame_count() - 2);
}

CheckResult eval_check(const std::string& name, const Scenario& s, const FrameSeries& frames,
                       const TrajectoryEnsemble* final_ensemble) {
  const auto& c = s.constants;
  CheckResult out;
  out.name = name;
  auto from_residual = [&out](const Residual& r, long frame) {
    out.value = r.normalized;
    out.abs_norm = r.abs_norm;
    out.scale = r.scale;
    out.frame_index = frame;
  };
  if (name == "norm_drift") {
    out.value = std::abs(norm(frames.waves.back()) - norm(frames.waves.front()));
    return out;
  }
  if (name == "energy_drift") {
    const double e0 = mean_energy(frames.waves.front(), s.potential, c).value;
    const double e1 = mean_energy(frames.waves.back(), s.potential, c).value;
    out.value = std::abs(e1 - e0) / std::max(std::abs(e0), 1e-300);
    out.scale = std::abs(e0);
    return out;
  }
  if (name == "branch_cancellation") {
    const long stride = std::max(1L, frames.frame_count() / 8);
    Residual worst;
    long worst_k = 0;
    for (long k = 0; k < frames.frame_count(); k += stride) {
      const auto r = branch_average_residual(frames.fields[k], c);
      if (r.normalized >= worst.normalized) {
        worst = r;
        worst_k = k;
      }
    }
    from_residual(worst, worst_k);
    return out;
  }
  const long k = mid_frame(frames);
  if (name == "continuity") {
    from_residual(continuity_residual(frames, k, c), k);
    return out;
  }
  if (name == "identity") {
    from_residual(identity_residual(frames.fields[k], c), k);
    return out;
  }
  if (name == "madelung") {
    from_residual(madelung_residual(frames, k, s.potential, c), k);
    return out;
  }
  if (name == "classical_hj_plus" || name == "classical_hj_minus") {
    const int sign = name == "classical_hj_plus" ? 1 : -1;
    const auto b = implied_classical_fields(frames, k, c, sign);
    from_residual(classical_hj_residual(b, frames.fields[k], s.potential, c), k);
    return out;
  }
  if (name == "equivariance") {
    if (final_ensemble == nullptr)
      fail(errc::config, "check 'equivariance' needs a trajectory ensemble (n >= 100)");
    out.value = equivariance_distance(*final_ensemble, frames.fields.back().rho, s.grid);
    return out;
  }
  fail(errc::config, "unknown check '" + name + "'");
}

}  // namespace

RunResult run_scenario(const Scenario& s_in, const RunOptions& opt) {
  const auto t_start = std::chrono::steady_clock::now();
  Scenario s = s_in;
  if (opt.seed) s.trajectories.seed = *opt.seed;

  namespace fs = std::filesystem;
  if (opt.write_outputs) fs::create_directories(opt.out_dir);

  RunResult result;
  ordered_json& manifest = result.manifest;
  manifest["code_version"] = kCodeVersion;
  manifest["scenario"] = scenario_json(s);
  manifest["seed"] = s.trajectories.seed;

  std::vector<std::pair<std::string, std::string>> outputs;  // rel path -> content

  const WaveField w0 = build_initial_wave(s);
  const FrameSeries frames = evolve(w0, s.potential, s.constants, s.evolution);

  manifest["diagnostics"] = {
      {"max_boundary_density_ratio", frames.diagnostics.max_boundary_density_ratio},
      {"stability_advisory_ratio", frames.diagnostics.stability_advisory_ratio},
      {"frames", frames.frame_count()}};
  if (frames.diagnostics.max_boundary_density_ratio > 1e-10)
    manifest["diagnostics"]["boundary_warning"] =
        "packet density at the walls exceeded 1e-10 of the maximum during the run";

  if (opt.write_outputs) {
    for (long k = 0; k < frames.frame_count(); ++k) {
      char name[64];
      std::snprintf(name, sizeof(name), "frames/frame_%06ld.csv", k);
      outputs.emplace_back(name, frame_csv(frames.waves[k], frames.fields[k]));
    }
  }

  // Trajectory ensemble with snapshot rows at export-stride frame times.
  std::optional<TrajectoryEnsemble> ensemble;
  if (s.trajectories.n > 0) {
    TrajectoryEnsemble e =
        sample_initial(frames.fields.front().rho, s.grid, s.trajectories.n, s.trajectories.seed);
    seed_actions_from_phase(e, frames.fields.front());
    std::vector<TrajectoryRecord> rows;
    auto record = [&](const TrajectoryEnsemble& cur) {
      for (std::size_t i = 0; i < cur.positions.size(); ++i)
        rows.push_back({long(i), cur.t, cur.positions[i], cur.actions[i]});
    };
    record(e);
    const double frame_dt = frames.frame_dt();
    const long per_frame = 5;  // keeps frame spacing within 10x of the advection step
    long j_prev = 0;
    for (long j = s.trajectories.export_stride; j_prev + 1 < frames.frame_count();
         j += s.trajectories.export_stride) {
      j = std::min(j, frames.frame_count() - 1);
      const long n_adv = per_frame * (j - j_prev);
      e = accumulate_action(std::move(e), frames, frame_dt / double(per_frame), n_adv,
                            s.constants);
      record(e);
      j_prev = j;
    }
    if (opt.write_outputs) outputs.emplace_back("trajectories.csv", trajectory_csv(rows));
    manifest["diagnostics"]["trajectories_alive"] = e.alive_count();
    manifest["diagnostics"]["masked_interp_touches"] = e.masked_interp_touches;
    ensemble = std::move(e);
  }

  if (s.deviation.enabled) {
    if (!ensemble) fail(errc::config, "deviation measurement needs a trajectory ensemble");
    TrajectoryEnsemble fresh =
        sample_initial(frames.fields.front().rho, s.grid, s.trajectories.n, s.trajectories.seed);
    seed_actions_from_phase(fresh, frames.fields.front());
    const auto hist = measure_deviation_histogram(fresh, frames, s.potential, s.constants,
                                                  s.deviation.segment_dt, s.deviation.n_segments);
    ordered_json fit = {{"total", hist.total},
                        {"fitted_rate", hist.fitted_rate},
                        {"fitted_mean", hist.fitted_mean},
                        {"sign_plus_fraction", hist.sign_plus_fraction},
                        {"ks_statistic", hist.ks_statistic},
                        {"skipped_segments", hist.skipped_segments}};
    if (opt.write_outputs) {
      outputs.emplace_back("deviation_histogram.csv", histogram_csv(hist.edges, hist.counts));
      outputs.emplace_back("deviation_fit.json", fit.dump(2) + "\n");
    }
    manifest["deviation_fit"] = fit;
  }

  bool all_pass = true;
  ordered_json checks_json = ordered_json::array();
  for (const auto& spec : s.checks) {
    if (spec.name == "equivariance" && !ensemble) continue;  // default set, no ensemble
    CheckResult r = eval_check(spec.name, s, frames, ensemble ? &*ensemble : nullptr);
    r.threshold = spec.threshold;
    r.pass = r.value <= spec.threshold;
    all_pass &= r.pass;
    result.checks.push_back(r);
    checks_json.push_back({{"name", r.name},
                           {"value", r.value},
                           {"threshold", r.threshold},
                           {"pass", r.pass},
                           {"abs_norm", r.abs_norm},
                           {"normalization", r.scale},
                           {"frame_index", r.frame_index},
                           {"grid_n", s.grid.n},
                           {"dx", s.grid.dx()},
                           {"dt", s.evolution.dt}});
  }
  manifest["checks"] = checks_json;
  manifest["all_pass"] = all_pass;
  result.all_pass = all_pass;

  ordered_json files = ordered_json::array();
  if (opt.write_outputs) {
    fs::create_directories(opt.out_dir / "frames");
    for (const auto& [rel, content] : outputs) {
      const fs::path path = opt.out_dir / rel;
      write_text_file(path, content);
      files.push_back({{"path", rel}, {"bytes", content.size()}, {"fnv1a64", fnv1a64_hex(content)}});
    }
  }
  manifest["outputs"] = files;

  const auto t_end = std::chrono::steady_clock::now();
  manifest["timing"] = {
      {"wall_seconds", std::chrono::duration<double>(t_end - t_start).count()}};

  if (opt.write_outputs) {
    result.manifest_path = opt.out_dir / "manifest.json";
    write_text_file(result.manifest_path, manifest.dump(2) + "\n");
  }
  return result;
}

namespace {

Scenario scenario_for_point(const Scenario& base, const std::string& axis, double value) {
  Scenario s = base;
  if (axis == "dx") {
    const double extent = base.grid.x_max - base.grid.x_min;
    const long n = long(std::llround(extent / value)) + 1;
    s.grid = Grid1D(base.grid.x_min, base.grid.x_max, n);
  } else if (axis == "dt") {
    const double total = base.evolution.dt * double(base.evolution.n_steps);
    s.evolution.dt = value;
    s.evolution.n_steps = std::max(1L, long(std::llround(total / value)));
  } else if (axis == "n_trajectories") {
    s.trajectories.n = long(value);
  } else {
    fail(errc::config, "sweep: unknown axis '" + axis + "'");
  }
  return finalize_scenario(std::move(s));
}

}  // namespace

SweepResult sweep_scenario(const Scenario& base, const std::string& axis,
                           const std::vector<double>& values, const RunOptions& opt) {
  if (values.size() < 1) fail(errc::config, "sweep: need at least one value");
  if (axis != "hbar" && axis != "dx" && axis != "dt" && axis != "n_trajectories")
    fail(errc::config, "sweep: unknown axis '" + axis + "'");
  SweepResult result;
  result.axis = axis;

  if (axis == "hbar") {
    // hbar sweeps are the classical-limit study; values are multipliers of the
    // base hbar. Each point runs independently so a resolution-guard violation
    // aborts only that point.
    for (double scale : values) {
      SweepPoint p;
      p.value = scale;
      try {
        const auto row = hbar_limit_point(base, base.constants, scale);
        p.ok = true;
        p.metrics = {{"hbar", row.hbar},
                     {"q_fraction", row.q_fraction},
                     {"trajectory_deviation", row.trajectory_deviation}};
      } catch (const error& e) {
        p.error = std::string(errc_name(e.code())) + ": " + e.what();
      }
      result.points.push_back(p);
    }
    bool q_dec = true, d_dec = true;
    const SweepPoint* prev = nullptr;
    for (const auto& p : result.points) {
      if (!p.ok) continue;
      if (prev != nullptr) {
        q_dec &= p.metrics["q_fraction"].get<double>() <
                 prev->metrics["q_fraction"].get<double>();
        d_dec &= p.metrics["trajectory_deviation"].get<double>() <
                 prev->metrics["trajectory_deviation"].get<double>();
      }
      prev = &p;
    }
    result.aggregate = {{"q_fraction_decreasing", q_dec},
                        {"trajectory_deviation_decreasing", d_dec}};
    return result;
  }

  auto run_point = [&](double value) {
    SweepPoint p;
    p.value = value;
    try {
      Scenario s = scenario_for_point(base, axis, value);
      RunOptions local = opt;
      local.write_outputs = false;
      const RunResult r = run_scenario(s, local);
      p.ok = true;
      for (const auto& c : r.checks) p.metrics[c.name] = c.value;
      p.metrics["all_pass"] = r.all_pass;
    } catch (const error& e) {
      p.error = std::string(errc_name(e.code())) + ": " + e.what();
    }
    return p;
  };

  const int workers = std::max(1, opt.workers);
  std::vector<std::future<SweepPoint>> futures;
  result.points.resize(values.size());
  for (std::size_t i = 0; i < values.size(); i += std::size_t(workers)) {
    const std::size_t hi = std::min(values.size(), i + std::size_t(workers));
    futures.clear();
    for (std::size_t j = i; j < hi; ++j)
      futures.push_back(std::async(std::launch::async, run_point, values[j]));
    for (std::size_t j = i; j < hi; ++j) result.points[j] = futures[j - i].get();
  }

  // Measured convergence orders for refinement axes.
  if (axis == "dx" || axis == "dt") {
    ordered_json orders = ordered_json::object();
    for (const auto& name : {"continuity", "madelung", "identity", "classical_hj_plus"}) {
      ordered_json col = ordered_json::array();
      for (std::size_t i = 0; i + 1 < result.points.size(); ++i) {
        const auto& a = result.points[i];
        const auto& b = result.points[i + 1];
        if (!a.ok || !b.ok || !a.metrics.contains(name) || !b.metrics.contains(name)) continue;
        const double ma = a.metrics[name].get<double>();
        const double mb = b.metrics[name].get<double>();
        const double ratio = values[i] / values[i + 1];
        if (ma > 0.0 && mb > 0.0 && ratio > 0.0 && ratio != 1.0)
          col.push_back(std::log(ma / mb) / std::log(ratio));
      }
      if (!col.empty()) orders[name] = col;
    }
    result.aggregate["measured_orders"] = orders;
  }
  return result;
}

std::string format_report(const nlohmann::ordered_json& manifest) {
  std::ostringstream out;
  out << "run: " << manifest.value("code_version", std::string("?"));
  if (manifest.contains("scenario"))
    out << "  scenario: " << manifest["scenario"].value("name", std::string("?"));
  out << "\n";
  if (manifest.contains("checks")) {
    for (const auto& c : manifest["checks"]) {
      out << (c.value("pass", false) ? "[PASS] " : "[FAIL] ") << c.value("name", std::string("?"))
          << "  value=" << fmt_double(c.value("value", 0.0))
          << "  threshold=" << fmt_double(c.value("threshold", 0.0)) << "\n";
    }
  }
  if (manifest.contains("outputs"))
    out << "outputs: " << manifest["outputs"].size() << " file(s)\n";
  if (manifest.contains("all_pass"))
    out << "overall: " << (manifest["all_pass"].get<bool>() ? "pass" : "fail") << "\n";
  return out.str();
}

}  // namespace qflow
