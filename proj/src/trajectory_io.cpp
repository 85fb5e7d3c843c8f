#include "hippoicl/trajectory_io.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>

#include "hippoicl/byte_io.hpp"

namespace hippoicl {

namespace {

constexpr char kMagic[8] = {'H', 'I', 'P', 'P', 'O', 'T', 'R', 'J'};

}  // namespace

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "index,t,u\n" << std::setprecision(17);
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    out << k << ',' << traj.time(k) << ',' << traj.samples[k] << '\n';
  }
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_trajectory_csv(traj, out);
}

void write_trajectory_binary(const Trajectory& traj, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  byte_io::put_f64(out, traj.dt);
  byte_io::put_u64(out, traj.samples.size());
  byte_io::put_u64(out, traj.seed);
  for (double v : traj.samples) byte_io::put_f64(out, v);
}

Trajectory read_trajectory_binary(std::istream& in) {
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() != sizeof magic || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw Error("not a trajectory file (bad magic)");
  }
  Trajectory traj;
  traj.dt = byte_io::get_f64(in);
  const std::uint64_t n = byte_io::get_u64(in);
  traj.seed = byte_io::get_u64(in);
  if (n > (std::numeric_limits<std::uint32_t>::max)()) throw Error("trajectory length too large");
  traj.samples.resize(n);
  for (auto& v : traj.samples) v = byte_io::get_f64(in);
  traj.generator = "file";
  traj.validate();
  return traj;
}

void save_trajectory_binary(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_trajectory_binary(traj, out);
}

Trajectory load_trajectory_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_trajectory_binary(in);
}

}  // namespace hippoicl
