#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "qflow/evolve.hpp"
#include "qflow/trajectories.hpp"

namespace qflow {

/// Shortest decimal form that round-trips to the same double.
std::string fmt_double(double v);

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);
std::string hash_file_hex(const std::filesystem::path& path);

std::string frame_csv(const WaveField& w, const MadelungFields& m);

struct TrajectoryRecord {
  long id;
  double t;
  double x;
  double action;
};
std::string trajectory_csv(const std::vector<TrajectoryRecord>& rows);

std::string histogram_csv(const std::vector<double>& edges, const std::vector<long>& counts);

}  // namespace qflow
