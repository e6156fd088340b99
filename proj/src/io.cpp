#include "qflow/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "qflow/errors.hpp"

namespace qflow {

std::string fmt_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) fail(errc::config, "fmt_double: conversion failed");
  return std::string(buf, ptr);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::config, "cannot open for writing: " + path.string());
  out.write(content.data(), long(content.size()));
  if (!out) fail(errc::config, "write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::config, "cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hash_file_hex(const std::filesystem::path& path) {
  return fnv1a64_hex(read_text_file(path));
}

std::string frame_csv(const WaveField& w, const MadelungFields& m) {
  std::string out = "x,re_psi,im_psi,rho,S,v,Q\n";
  for (long i = 0; i < w.grid.n; ++i) {
    out += fmt_double(w.grid.x(i));
    out += ',';
    out += fmt_double(w.psi[i].real());
    out += ',';
    out += fmt_double(w.psi[i].imag());
    out += ',';
    out += fmt_double(m.rho[i]);
    out += ',';
    out += fmt_double(m.S[i]);
    out += ',';
    out += fmt_double(m.v[i]);
    out += ',';
    out += fmt_double(m.Q[i]);
    out += '\n';
  }
  return out;
}

std::string trajectory_csv(const std::vector<TrajectoryRecord>& rows) {
  std::string out = "id,t,x,S_acc\n";
  for (const auto& r : rows) {
    out += std::to_string(r.id);
    out += ',';
    out += fmt_double(r.t);
    out += ',';
    out += fmt_double(r.x);
    out += ',';
    out += fmt_double(r.action);
    out += '\n';
  }
  return out;
}

std::string histogram_csv(const std::vector<double>& edges, const std::vector<long>& counts) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out += fmt_double(edges[i]);
    out += ',';
    out += fmt_double(edges[i + 1]);
    out += ',';
    out += std::to_string(counts[i]);
    out += '\n';
  }
  return out;
}

}  // namespace qflow
